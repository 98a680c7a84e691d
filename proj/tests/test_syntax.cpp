#include <catch2/catch_amalgamated.hpp>

#include "fcp2pn/ast.hpp"
#include "fcp2pn/parser.hpp"
#include "fcp2pn/validate.hpp"

using namespace fcp2pn;

TEST_CASE("parse the two-thread restriction example") {
  FcpSpec s = parse_fcp("new r.( p!<r>.0 | p?(x).0 )");
  REQUIRE(s.outer_restrictions.size() == 1);
  REQUIRE(s.threads.size() == 2);
  REQUIRE(s.equations.empty());
  CHECK(s.text(s.outer_restrictions[0]) == "r");
  CHECK(s.threads[0]->kind == SeqTerm::Choice);
  CHECK(s.threads[0]->branches.size() == 1);
  CHECK(s.threads[0]->branches[0].pre.kind == Prefix::Send);
}

TEST_CASE("parse main = 0") {
  FcpSpec s = parse_fcp("main = 0");
  REQUIRE(s.threads.size() == 1);
  CHECK(s.threads[0]->kind == SeqTerm::Choice);
  CHECK(s.threads[0]->branches.empty());
}

TEST_CASE("syntax error reported with position") {
  CHECK_THROWS_AS(parse_fcp("p!<"), ParseError);
  CHECK_THROWS_AS(parse_fcp("main = q!"), ParseError);
  CHECK_THROWS_AS(parse_fcp("main = K(a)"), ParseError);  // unknown identifier
  CHECK_THROWS_AS(parse_fcp("K(a) := 0 main = K(a,b)"), ParseError);  // arity
}

TEST_CASE("equations, calls, sums, tau") {
  FcpSpec s = parse_fcp(
      "K(f) := tau.K(f)\n"
      "L() := f?(y).(y!<f>.0 + tau.L())\n"
      "main = (K(a) | L())\n");
  REQUIRE(s.eq_order == std::vector<std::string>{"K", "L"});
  REQUIRE(s.threads.size() == 2);
  CHECK(s.threads[0]->kind == SeqTerm::Call);
  CHECK(s.threads[0]->callee == "K");
  const Equation& l = s.eq("L");
  CHECK(l.formals.empty());
  CHECK(l.body->branches.size() == 1);
  CHECK(l.body->branches[0].cont->branches.size() == 2);
}

TEST_CASE("prefix dot binds tighter than choice") {
  // a.b + c parses as (a.b) + c, not a.(b + c)
  FcpSpec s = parse_fcp("main = ( p?(x).x!<x>.0 + q?(y).y!<y>.0 | 0 )");
  const TermPtr& t = s.threads[0];
  REQUIRE(t->kind == SeqTerm::Choice);
  REQUIRE(t->branches.size() == 2);
  CHECK(t->branches[0].pre.kind == Prefix::Recv);
  CHECK(t->branches[1].pre.kind == Prefix::Recv);
  CHECK(t->branches[0].cont->branches.size() == 1);
  CHECK(t->branches[1].cont->branches.size() == 1);
  // parentheses restore the nested reading
  FcpSpec n = parse_fcp("main = ( p?(x).(x!<x>.0 + q?(y).y!<y>.0) | 0 )");
  REQUIRE(n.threads[0]->branches.size() == 1);
  CHECK(n.threads[0]->branches[0].cont->branches.size() == 2);
}

TEST_CASE("print then reparse is identity on the AST") {
  const char* txt =
      "K(f,g) := f!<g>.K(g,f)\n"
      "main = new r.( K(r,p) | p?(x).x!<p>.0 | tau.0 )\n";
  FcpSpec s1 = parse_fcp(txt);
  std::string printed = print_spec(s1);
  FcpSpec s2 = parse_fcp(printed);
  REQUIRE(s1.threads.size() == s2.threads.size());
  for (size_t i = 0; i < s1.threads.size(); ++i) {
    CAPTURE(i);
    // compare via printing since name ids may differ in interning order
    CHECK(print_term(s1, s1.threads[i]) == print_term(s2, s2.threads[i]));
  }
  CHECK(print_spec(s2) == printed);
}

TEST_CASE("size metric") {
  SECTION("stop is 1") {
    FcpSpec s = parse_fcp("main = 0");
    CHECK(spec_size(s) == 1);
  }
  SECTION("call with two arguments is 3") {
    FcpSpec s = parse_fcp("K(a,b) := 0 main = K(a,b)");
    // |K(a,b)| = 3 for the main term; the equation adds 1+2+1
    CHECK(term_size(s.threads[0]) == 3);
  }
  SECTION("tau.0 is 3") {
    FcpSpec s = parse_fcp("main = tau.0");
    CHECK(spec_size(s) == 3);
  }
  SECTION("restriction adds 1") {
    FcpSpec s = parse_fcp("main = new r.(r!<r>.0)");
    CHECK(spec_size(s) == 1 + 3);
  }
  SECTION("two-branch sum") {
    FcpSpec s = parse_fcp("main = tau.0 + tau.0");
    CHECK(spec_size(s) == 3 * 2 - 1 + 1 + 1);
  }
}

TEST_CASE("free and bound names") {
  FcpSpec s = parse_fcp("main = p!<r>.0");
  NameId p = s.find("p"), r = s.find("r");
  CHECK(free_names(s.threads[0]) == std::set<NameId>{p, r});

  // restriction inside a thread binds; leading new on a bare main is spec level
  FcpSpec s2 = parse_fcp("main = ( new r.p!<r>.0 | 0 )");
  CHECK(free_names(s2.threads[0]) == std::set<NameId>{s2.find("p")});
  CHECK(bound_names(s2.threads[0]) == std::set<NameId>{s2.find("r")});

  FcpSpec s3 = parse_fcp("main = p?(x).0");
  CHECK(bound_names(s3.threads[0]) == std::set<NameId>{s3.find("x")});
}

TEST_CASE("no-clash leaves the restriction example untouched") {
  FcpSpec s = parse_fcp("new r.( p!<r>.0 | p?(x).0 )");
  ValidationResult v = validate_no_clash(s);
  CHECK(v.renames.empty());
  CHECK(v.spec.kind(v.spec.find("p")) == NameKind::Public);
  CHECK(v.spec.kind(v.spec.find("r")) == NameKind::Restricted);
  CHECK(v.spec.kind(v.spec.find("x")) == NameKind::Input);
  CHECK(v.spec.names_of_kind(NameKind::Formal).empty());
}

TEST_CASE("double binding repaired with #1") {
  FcpSpec s = parse_fcp("main = ( p?(x).x!<p>.0 | q?(x).x!<q>.0 )");
  ValidationResult v = validate_no_clash(s);
  REQUIRE(v.renames.size() == 1);
  NameId nx = v.spec.find("x#1");
  REQUIRE(nx != -1);
  CHECK(v.renames[0].to == nx);
  // second thread now uses x#1 throughout
  CHECK(print_term(v.spec, v.spec.threads[1]) == "q?(x#1).x#1!<q>.0");
  CHECK(v.spec.kind(nx) == NameKind::Input);
}

TEST_CASE("formal clashing with a free name is renamed") {
  FcpSpec s = parse_fcp("K(p) := p!<p>.0 main = ( K(q) | p?(z).0 )");
  ValidationResult v = validate_no_clash(s);
  REQUIRE(v.renames.size() == 1);
  const Equation& k = v.spec.eq("K");
  REQUIRE(k.formals.size() == 1);
  CHECK(v.spec.text(k.formals[0]) == "p#1");
  CHECK(print_term(v.spec, k.body) == "p#1!<p#1>.0");
  CHECK(v.spec.kind(v.spec.find("p")) == NameKind::Public);
  CHECK(v.spec.kind(v.spec.find("p#1")) == NameKind::Formal);
}

TEST_CASE("size is invariant under alpha repair") {
  FcpSpec s = parse_fcp("main = ( p?(x).x!<p>.0 | q?(x).new x.0 )");
  long before = spec_size(s);
  ValidationResult v = validate_no_clash(s);
  CHECK(spec_size(v.spec) == before);
  CHECK_FALSE(v.renames.empty());
}

TEST_CASE("guards rejected without the extensions flag") {
  FcpSpec s = parse_fcp("main = [a=b]tau.0");
  CHECK_THROWS(validate_no_clash(s));
  s.extensions = true;
  CHECK_NOTHROW(validate_no_clash(s));
}

TEST_CASE("name partition covers and is disjoint") {
  FcpSpec s = parse_fcp(
      "K(f) := f?(u).K(u)\n"
      "main = new r.( K(r) | r!<p>.tau.0 )\n");
  ValidationResult v = validate_no_clash(s);
  const FcpSpec& sp = v.spec;
  int covered = 0;
  for (NameId n = 0; n < (NameId)sp.name_text.size(); ++n)
    if (sp.kind(n) != NameKind::Unused) ++covered;
  CHECK(covered == 4);  // p public, r restricted, u input, f formal
  CHECK(sp.kind(sp.find("p")) == NameKind::Public);
  CHECK(sp.kind(sp.find("r")) == NameKind::Restricted);
  CHECK(sp.kind(sp.find("u")) == NameKind::Input);
  CHECK(sp.kind(sp.find("f")) == NameKind::Formal);
}
