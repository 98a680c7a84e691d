// Abstract syntax for finite-control pi-calculus specifications.
//
// Copyright 2026
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FCP2PN_AST_HPP
#define FCP2PN_AST_HPP

#include <algorithm>
#include <cassert>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace fcp2pn {

using NameId = int;

enum class NameKind {
  Unused,      // interned but not occurring (e.g. renamed away)
  Public,
  Restricted,  // bound by "new"
  Input,       // bound by a receive prefix
  Formal,      // formal parameter of a defining equation
};

struct Prefix {
  enum Kind { Send, Recv, Tau } kind = Tau;
  NameId chan = -1;
  std::vector<NameId> names;  // payloads (Send) or binders (Recv); empty for Tau

  bool operator==(const Prefix&) const = default;
};

struct SeqTerm;
using TermPtr = std::shared_ptr<const SeqTerm>;

struct Branch {
  Prefix pre;
  TermPtr cont;
};

// A sequential process term. Stop is a Choice with no branches.
struct SeqTerm {
  enum Kind { Choice, Call, Restrict, Guard } kind = Choice;

  // Choice
  std::vector<Branch> branches;

  // Call
  std::string callee;
  std::vector<NameId> args;

  // Restrict / Guard
  NameId binder = -1;       // Restrict
  NameId gx = -1, gy = -1;  // Guard operands
  bool positive = true;     // Guard: true = match [x=y], false = mismatch [x!=y]
  TermPtr body;

  static TermPtr stop() {
    auto t = std::make_shared<SeqTerm>();
    t->kind = Choice;
    return t;
  }
  static TermPtr choice(std::vector<Branch> bs) {
    auto t = std::make_shared<SeqTerm>();
    t->kind = Choice;
    t->branches = std::move(bs);
    return t;
  }
  static TermPtr call(std::string id, std::vector<NameId> as) {
    auto t = std::make_shared<SeqTerm>();
    t->kind = Call;
    t->callee = std::move(id);
    t->args = std::move(as);
    return t;
  }
  static TermPtr restrict(NameId r, TermPtr b) {
    auto t = std::make_shared<SeqTerm>();
    t->kind = Restrict;
    t->binder = r;
    t->body = std::move(b);
    return t;
  }
  static TermPtr guard(NameId x, NameId y, bool pos, TermPtr b) {
    auto t = std::make_shared<SeqTerm>();
    t->kind = Guard;
    t->gx = x;
    t->gy = y;
    t->positive = pos;
    t->body = std::move(b);
    return t;
  }
};

struct Equation {
  std::vector<NameId> formals;
  TermPtr body;
};

// Parsed and possibly validated FCP specification.
struct FcpSpec {
  std::vector<std::string> name_text;
  std::vector<NameKind> name_kind;
  std::vector<NameId> outer_restrictions;  // main-level "new" binders, outermost first
  std::vector<TermPtr> threads;
  std::vector<std::string> eq_order;  // declaration order of equations
  std::map<std::string, Equation> equations;
  bool extensions = false;  // match/mismatch allowed

  NameId intern(const std::string& s) {
    for (NameId i = 0; i < (NameId)name_text.size(); ++i)
      if (name_text[i] == s) return i;
    name_text.push_back(s);
    name_kind.push_back(NameKind::Unused);
    return (NameId)name_text.size() - 1;
  }
  NameId find(const std::string& s) const {
    for (NameId i = 0; i < (NameId)name_text.size(); ++i)
      if (name_text[i] == s) return i;
    return -1;
  }
  const std::string& text(NameId n) const { return name_text.at(n); }
  NameKind kind(NameId n) const { return name_kind.at(n); }

  const Equation& eq(const std::string& id) const {
    auto it = equations.find(id);
    if (it == equations.end()) throw std::runtime_error("unknown identifier: " + id);
    return it->second;
  }

  std::vector<NameId> names_of_kind(NameKind k) const {
    std::vector<NameId> out;
    for (NameId i = 0; i < (NameId)name_kind.size(); ++i)
      if (name_kind[i] == k) out.push_back(i);
    return out;
  }
};

// ---- free / bound names ----------------------------------------------------

inline void free_names_into(const TermPtr& t, std::set<NameId>& out,
                            std::set<NameId>* bound_seen = nullptr) {
  switch (t->kind) {
    case SeqTerm::Choice:
      for (const auto& b : t->branches) {
        if (b.pre.kind != Prefix::Tau) out.insert(b.pre.chan);
        if (b.pre.kind == Prefix::Send)
          for (NameId n : b.pre.names) out.insert(n);
        std::set<NameId> inner;
        free_names_into(b.cont, inner, bound_seen);
        if (b.pre.kind == Prefix::Recv) {
          for (NameId n : b.pre.names) {
            inner.erase(n);
            if (bound_seen) bound_seen->insert(n);
          }
        }
        out.insert(inner.begin(), inner.end());
      }
      break;
    case SeqTerm::Call:
      for (NameId n : t->args) out.insert(n);
      break;
    case SeqTerm::Restrict: {
      std::set<NameId> inner;
      free_names_into(t->body, inner, bound_seen);
      inner.erase(t->binder);
      if (bound_seen) bound_seen->insert(t->binder);
      out.insert(inner.begin(), inner.end());
      break;
    }
    case SeqTerm::Guard: {
      out.insert(t->gx);
      out.insert(t->gy);
      free_names_into(t->body, out, bound_seen);
      break;
    }
  }
}

inline std::set<NameId> free_names(const TermPtr& t) {
  std::set<NameId> out;
  free_names_into(t, out);
  return out;
}

inline std::set<NameId> bound_names(const TermPtr& t) {
  std::set<NameId> fn, bn;
  free_names_into(t, fn, &bn);
  return bn;
}

// ---- size metric -----------------------------------------------------------

inline long term_size(const TermPtr& t) {
  switch (t->kind) {
    case SeqTerm::Choice: {
      if (t->branches.empty()) return 1;  // |0| = 1
      long s = 3 * (long)t->branches.size() - 1;
      for (const auto& b : t->branches) s += term_size(b.cont);
      return s;
    }
    case SeqTerm::Call:
      return 1 + (long)t->args.size();
    case SeqTerm::Restrict:
      return 1 + term_size(t->body);
    case SeqTerm::Guard:
      return 1 + term_size(t->body);
  }
  return 0;
}

inline long spec_size(const FcpSpec& spec) {
  long s = (long)spec.outer_restrictions.size();
  if (!spec.threads.empty()) {
    s += (long)spec.threads.size() - 1;
    for (const auto& t : spec.threads) s += term_size(t);
  }
  for (const auto& id : spec.eq_order) {
    const Equation& e = spec.equations.at(id);
    s += 1 + (long)e.formals.size() + term_size(e.body);
  }
  return s;
}

// ---- pretty printing -------------------------------------------------------

inline std::string print_term(const FcpSpec& spec, const TermPtr& t);

inline std::string print_prefix(const FcpSpec& spec, const Prefix& p) {
  switch (p.kind) {
    case Prefix::Tau:
      return "tau";
    case Prefix::Send: {
      std::string s = spec.text(p.chan) + "!<";
      for (size_t i = 0; i < p.names.size(); ++i)
        s += (i ? "," : "") + spec.text(p.names[i]);
      return s + ">";
    }
    case Prefix::Recv: {
      std::string s = spec.text(p.chan) + "?(";
      for (size_t i = 0; i < p.names.size(); ++i)
        s += (i ? "," : "") + spec.text(p.names[i]);
      return s + ")";
    }
  }
  return "";
}

inline std::string print_term(const FcpSpec& spec, const TermPtr& t) {
  switch (t->kind) {
    case SeqTerm::Choice: {
      if (t->branches.empty()) return "0";
      std::string s;
      for (size_t i = 0; i < t->branches.size(); ++i) {
        if (i) s += " + ";
        s += print_prefix(spec, t->branches[i].pre) + "." +
             print_term(spec, t->branches[i].cont);
      }
      if (t->branches.size() > 1) return "(" + s + ")";
      return s;
    }
    case SeqTerm::Call: {
      std::string s = t->callee + "(";
      for (size_t i = 0; i < t->args.size(); ++i)
        s += (i ? "," : "") + spec.text(t->args[i]);
      return s + ")";
    }
    case SeqTerm::Restrict:
      return "new " + spec.text(t->binder) + "." + print_term(spec, t->body);
    case SeqTerm::Guard:
      return "[" + spec.text(t->gx) + (t->positive ? "=" : "!=") +
             spec.text(t->gy) + "]" + print_term(spec, t->body);
  }
  return "";
}

inline std::string print_spec(const FcpSpec& spec) {
  std::string s;
  for (const auto& id : spec.eq_order) {
    const Equation& e = spec.equations.at(id);
    s += id + "(";
    for (size_t i = 0; i < e.formals.size(); ++i)
      s += (i ? "," : "") + spec.text(e.formals[i]);
    s += ") := " + print_term(spec, e.body) + "\n";
  }
  s += "main = ";
  for (NameId r : spec.outer_restrictions) s += "new " + spec.text(r) + ".";
  s += "(";
  for (size_t i = 0; i < spec.threads.size(); ++i) {
    if (i) s += " | ";
    s += print_term(spec, spec.threads[i]);
  }
  s += ")\n";
  return s;
}

// Structural AST equality (name ids must match exactly).
inline bool term_equal(const TermPtr& a, const TermPtr& b) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case SeqTerm::Choice:
      if (a->branches.size() != b->branches.size()) return false;
      for (size_t i = 0; i < a->branches.size(); ++i) {
        if (!(a->branches[i].pre == b->branches[i].pre)) return false;
        if (!term_equal(a->branches[i].cont, b->branches[i].cont)) return false;
      }
      return true;
    case SeqTerm::Call:
      return a->callee == b->callee && a->args == b->args;
    case SeqTerm::Restrict:
      return a->binder == b->binder && term_equal(a->body, b->body);
    case SeqTerm::Guard:
      return a->gx == b->gx && a->gy == b->gy && a->positive == b->positive &&
             term_equal(a->body, b->body);
  }
  return false;
}

}  // namespace fcp2pn

#endif
