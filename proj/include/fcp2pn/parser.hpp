// Text format parser for FCP specifications.
//
// Grammar (whitespace-insensitive, "--" line comments):
//   spec      := {equation} main
//   equation  := IDENT "(" [names] ")" ":=" term
//   main      := ["main" "="] {"new" NAME "."} "(" term {"|" term} ")"
//   term      := sum | call | "new" NAME "." term | guard term
//   sum       := prefix "." factor {"+" prefix "." factor} | "0"
//   factor    := "0" | call | "(" term ")" | "new" NAME "." factor
//                | guard factor | prefix "." factor
//   prefix    := NAME "!" "<" names ">" | NAME "?" "(" names ")" | "tau"
//   guard     := "[" NAME "=" NAME "]" | "[" NAME "!=" NAME "]"
//   call      := IDENT "(" [names] ")"
// Equation identifiers start uppercase, names lowercase. A single thread may
// be given without the surrounding parentheses ("main = 0").

#ifndef FCP2PN_PARSER_HPP
#define FCP2PN_PARSER_HPP

#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "fcp2pn/ast.hpp"

namespace fcp2pn {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error("parse error at " + std::to_string(line_) + ":" +
                           std::to_string(col_) + ": " + msg),
        line(line_),
        col(col_) {}
};

namespace detail {

struct Token {
  enum Type { Name, Ident, Punct, KwNew, KwTau, KwMain, Zero, End } type;
  std::string text;
  int line, col;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skipWs();
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_ = {Token::End, "", line_, col_};
      return;
    }
    char c = src_[pos_];
    if (std::islower((unsigned char)c) || std::isupper((unsigned char)c)) {
      std::string word;
      while (pos_ < src_.size() &&
             (std::isalnum((unsigned char)src_[pos_]) || src_[pos_] == '_' ||
              src_[pos_] == '#')) {
        word += src_[pos_];
        step();
      }
      if (word == "new")
        tok_ = {Token::KwNew, word, tok_.line, tok_.col};
      else if (word == "tau")
        tok_ = {Token::KwTau, word, tok_.line, tok_.col};
      else if (word == "main")
        tok_ = {Token::KwMain, word, tok_.line, tok_.col};
      else if (std::isupper((unsigned char)word[0]))
        tok_ = {Token::Ident, word, tok_.line, tok_.col};
      else
        tok_ = {Token::Name, word, tok_.line, tok_.col};
      return;
    }
    if (c == '0') {
      step();
      tok_ = {Token::Zero, "0", tok_.line, tok_.col};
      return;
    }
    // multi-char punctuation
    if (c == ':' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
      step();
      step();
      tok_ = {Token::Punct, ":=", tok_.line, tok_.col};
      return;
    }
    if (c == '!' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
      step();
      step();
      tok_ = {Token::Punct, "!=", tok_.line, tok_.col};
      return;
    }
    static const std::string singles = "()<>.|+=?![],";
    if (singles.find(c) != std::string::npos) {
      step();
      tok_ = {Token::Punct, std::string(1, c), tok_.line, tok_.col};
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
  }

  void skipWs() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace((unsigned char)src_[pos_])) step();
      if (pos_ + 1 < src_.size() && src_[pos_] == '-' && src_[pos_ + 1] == '-') {
        while (pos_ < src_.size() && src_[pos_] != '\n') step();
        continue;
      }
      break;
    }
  }

  void step() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

class Parser {
 public:
  Parser(const std::string& src, FcpSpec& spec) : lex_(src), spec_(spec) {}

  void run() {
    while (lex_.peek().type == Token::Ident) parseEquation();
    parseMain();
    if (lex_.peek().type != Token::End)
      fail("trailing input after main term");
    checkCallArities();
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, lex_.peek().line, lex_.peek().col);
  }

  Token expectPunct(const std::string& p) {
    if (lex_.peek().type != Token::Punct || lex_.peek().text != p)
      fail("expected '" + p + "'");
    return lex_.next();
  }

  NameId expectName() {
    if (lex_.peek().type != Token::Name) fail("expected a name");
    return spec_.intern(lex_.next().text);
  }

  std::vector<NameId> nameList() {
    std::vector<NameId> out;
    out.push_back(expectName());
    while (lex_.peek().type == Token::Punct && lex_.peek().text == ",") {
      lex_.next();
      out.push_back(expectName());
    }
    return out;
  }

  void parseEquation() {
    std::string id = lex_.next().text;
    if (spec_.equations.count(id)) fail("duplicate equation " + id);
    expectPunct("(");
    std::vector<NameId> formals;
    if (!(lex_.peek().type == Token::Punct && lex_.peek().text == ")"))
      formals = nameList();
    expectPunct(")");
    expectPunct(":=");
    TermPtr body = parseTerm();
    spec_.eq_order.push_back(id);
    spec_.equations[id] = Equation{std::move(formals), std::move(body)};
  }

  void parseMain() {
    if (lex_.peek().type == Token::KwMain) {
      lex_.next();
      expectPunct("=");
    }
    while (lex_.peek().type == Token::KwNew) {
      lex_.next();
      spec_.outer_restrictions.push_back(expectName());
      expectPunct(".");
    }
    if (lex_.peek().type == Token::Punct && lex_.peek().text == "(") {
      // Could be "(t | t)" thread list or a parenthesized sum. Parse the first
      // term, then decide by the separator.
      lex_.next();
      spec_.threads.push_back(parseTerm());
      while (lex_.peek().type == Token::Punct && lex_.peek().text == "|") {
        lex_.next();
        spec_.threads.push_back(parseTerm());
      }
      expectPunct(")");
    } else {
      spec_.threads.push_back(parseTerm());
    }
  }

  TermPtr parseTerm() {
    const Token& t = lex_.peek();
    if (t.type == Token::KwNew) {
      lex_.next();
      NameId r = expectName();
      expectPunct(".");
      return SeqTerm::restrict(r, parseTerm());
    }
    if (t.type == Token::Punct && t.text == "[") {
      lex_.next();
      NameId x = expectName();
      bool pos;
      if (lex_.peek().type == Token::Punct && lex_.peek().text == "=") {
        pos = true;
      } else if (lex_.peek().type == Token::Punct && lex_.peek().text == "!=") {
        pos = false;
      } else {
        fail("expected '=' or '!=' in guard");
      }
      lex_.next();
      NameId y = expectName();
      expectPunct("]");
      return SeqTerm::guard(x, y, pos, parseTerm());
    }
    if (t.type == Token::Ident) {
      std::string id = lex_.next().text;
      expectPunct("(");
      std::vector<NameId> args;
      if (!(lex_.peek().type == Token::Punct && lex_.peek().text == ")"))
        args = nameList();
      expectPunct(")");
      return SeqTerm::call(id, std::move(args));
    }
    return parseSum();
  }

  TermPtr parseSum() {
    if (lex_.peek().type == Token::Zero) {
      lex_.next();
      return SeqTerm::stop();
    }
    if (lex_.peek().type == Token::Punct && lex_.peek().text == "(") {
      // parenthesized term, e.g. (a?(x).0 + tau.0)
      lex_.next();
      TermPtr inner = parseTerm();
      expectPunct(")");
      return inner;
    }
    std::vector<Branch> branches;
    branches.push_back(parseBranch());
    while (lex_.peek().type == Token::Punct && lex_.peek().text == "+") {
      lex_.next();
      branches.push_back(parseBranch());
    }
    return SeqTerm::choice(std::move(branches));
  }

  Branch parseBranch() {
    Prefix p = parsePrefix();
    expectPunct(".");
    TermPtr cont = parseFactor();
    return Branch{std::move(p), std::move(cont)};
  }

  // Continuation after a prefix dot. Binds tighter than "+": in
  // "a.b.0 + c.0" the sum is at the outer level. A parenthesized term may
  // still contain a sum.
  TermPtr parseFactor() {
    const Token& t = lex_.peek();
    if (t.type == Token::Zero) {
      lex_.next();
      return SeqTerm::stop();
    }
    if (t.type == Token::KwNew) {
      lex_.next();
      NameId r = expectName();
      expectPunct(".");
      return SeqTerm::restrict(r, parseFactor());
    }
    if (t.type == Token::Punct && t.text == "[") {
      lex_.next();
      NameId x = expectName();
      bool pos;
      if (lex_.peek().type == Token::Punct && lex_.peek().text == "=") {
        pos = true;
      } else if (lex_.peek().type == Token::Punct && lex_.peek().text == "!=") {
        pos = false;
      } else {
        fail("expected '=' or '!=' in guard");
      }
      lex_.next();
      NameId y = expectName();
      expectPunct("]");
      return SeqTerm::guard(x, y, pos, parseFactor());
    }
    if (t.type == Token::Ident) {
      std::string id = lex_.next().text;
      expectPunct("(");
      std::vector<NameId> args;
      if (!(lex_.peek().type == Token::Punct && lex_.peek().text == ")"))
        args = nameList();
      expectPunct(")");
      return SeqTerm::call(id, std::move(args));
    }
    if (t.type == Token::Punct && t.text == "(") {
      lex_.next();
      TermPtr inner = parseTerm();
      expectPunct(")");
      return inner;
    }
    std::vector<Branch> branches;
    branches.push_back(parseBranch());
    return SeqTerm::choice(std::move(branches));
  }

  Prefix parsePrefix() {
    if (lex_.peek().type == Token::KwTau) {
      lex_.next();
      return Prefix{Prefix::Tau, -1, {}};
    }
    if (lex_.peek().type != Token::Name) fail("expected a prefix");
    NameId chan = spec_.intern(lex_.next().text);
    if (lex_.peek().type == Token::Punct && lex_.peek().text == "!") {
      lex_.next();
      expectPunct("<");
      std::vector<NameId> payload = nameList();
      expectPunct(">");
      return Prefix{Prefix::Send, chan, std::move(payload)};
    }
    if (lex_.peek().type == Token::Punct && lex_.peek().text == "?") {
      lex_.next();
      expectPunct("(");
      std::vector<NameId> binders = nameList();
      expectPunct(")");
      for (size_t i = 0; i < binders.size(); ++i)
        for (size_t j = i + 1; j < binders.size(); ++j)
          if (binders[i] == binders[j]) fail("repeated binder in receive");
      return Prefix{Prefix::Recv, chan, std::move(binders)};
    }
    fail("expected '!' or '?' after channel name");
  }

  void checkCallAritiesIn(const TermPtr& t) {
    switch (t->kind) {
      case SeqTerm::Choice:
        for (const auto& b : t->branches) checkCallAritiesIn(b.cont);
        break;
      case SeqTerm::Call: {
        auto it = spec_.equations.find(t->callee);
        if (it == spec_.equations.end())
          throw ParseError("unknown identifier " + t->callee, 0, 0);
        if (it->second.formals.size() != t->args.size())
          throw ParseError("arity mismatch in call to " + t->callee, 0, 0);
        break;
      }
      case SeqTerm::Restrict:
      case SeqTerm::Guard:
        checkCallAritiesIn(t->body);
        break;
    }
  }

  void checkCallArities() {
    for (const auto& th : spec_.threads) checkCallAritiesIn(th);
    for (const auto& id : spec_.eq_order)
      checkCallAritiesIn(spec_.equations.at(id).body);
  }

  Lexer lex_;
  FcpSpec& spec_;
};

}  // namespace detail

inline FcpSpec parse_fcp(const std::string& text) {
  FcpSpec spec;
  detail::Parser(text, spec).run();
  return spec;
}

}  // namespace fcp2pn

#endif
