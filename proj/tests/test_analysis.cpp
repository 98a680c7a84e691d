#include <catch2/catch_amalgamated.hpp>

#include "fcp2pn/analysis.hpp"
#include "fcp2pn/parser.hpp"
#include "fcp2pn/validate.hpp"

using namespace fcp2pn;

static FcpSpec prep(const std::string& txt) {
  return validate_no_clash(parse_fcp(txt)).spec;
}

static std::vector<Skeleton> skels(const FcpSpec& s) {
  std::vector<Skeleton> out;
  for (const auto& th : s.threads) out.push_back(build_skeleton(s, th));
  return out;
}

TEST_CASE("domains: restricted value flows into the receiver") {
  FcpSpec s = prep("main = ( new r.p!<r>.0 | p?(x).0 )");
  DomainMap dm = compute_domains(s);
  NameId p = s.find("p"), r = s.find("r"), x = s.find("x");
  CHECK(dm.at(p) == std::set<DomValue>{DomValue{false, p}});
  CHECK(dm.at(r) == std::set<DomValue>{DomValue{true, r}});
  CHECK(dm.at(x) == std::set<DomValue>{DomValue{true, r}});
  CHECK(dm.has_restricted(x));
  CHECK_FALSE(dm.has_restricted(p));
}

TEST_CASE("domains: no communication means empty input domains") {
  FcpSpec s = prep("main = ( p?(x).0 | 0 )");
  DomainMap dm = compute_domains(s);
  CHECK(dm.at(s.find("x")).empty());
}

TEST_CASE("domains: same-thread actions never synchronize") {
  FcpSpec s = prep("main = ( (p!<q>.0 + p?(z).0) | 0 )");
  DomainMap dm = compute_domains(s);
  CHECK(dm.at(s.find("z")).empty());
}

TEST_CASE("domains: arguments flow into formals across calls") {
  FcpSpec s = prep(
      "K(f) := f!<f>.0\n"
      "main = ( K(a) | a?(y).0 )\n");
  DomainMap dm = compute_domains(s);
  NameId a = s.find("a");
  CHECK(dm.at(s.find("f")) == std::set<DomValue>{DomValue{false, a}});
  CHECK(dm.at(s.find("y")) == std::set<DomValue>{DomValue{false, a}});
}

TEST_CASE("rough domains cover all publics and restriction tokens") {
  FcpSpec s = prep("main = ( new r.p!<r>.0 | p?(x).0 )");
  DomainMap dm = compute_domains(s, true);
  NameId p = s.find("p"), r = s.find("r"), x = s.find("x");
  std::set<DomValue> full{DomValue{false, p}, DomValue{true, r}};
  CHECK(dm.at(x) == full);
  CHECK(dm.at(r) == std::set<DomValue>{DomValue{true, r}});
}

TEST_CASE("budget: restriction-free spec needs no fresh values") {
  FcpSpec s = prep("main = ( p!<a>.0 | p?(x).0 )");
  DomainMap dm = compute_domains(s);
  NewBudget nb = compute_new_budget(s, dm, skels(s));
  CHECK(nb.total == 0);
}

TEST_CASE("budget: two for the restricted sender example") {
  FcpSpec s = prep("main = ( new r.p!<r>.0 | p?(x).0 )");
  DomainMap dm = compute_domains(s);
  NewBudget nb = compute_new_budget(s, dm, skels(s));
  CHECK(nb.total == 2);
  CHECK(nb.per_thread.at(0) == 1);
  CHECK(nb.per_thread.at(1) == 1);
  // rough bound agrees here: one restricted plus one input name
  NewBudget rough = compute_new_budget(s, dm, skels(s), true);
  CHECK(rough.total == 2);
}

TEST_CASE("budget ignores names that never hold fresh values") {
  // x only ever receives the public name a
  FcpSpec s = prep("main = ( new r.(p!<a>.r!<r>.0) | p?(x).0 )");
  DomainMap dm = compute_domains(s);
  CHECK_FALSE(dm.has_restricted(s.find("x")));
  NewBudget nb = compute_new_budget(s, dm, skels(s));
  CHECK(nb.per_thread.at(1) == 0);
  CHECK(nb.total == 1);
}

TEST_CASE("abstraction tuples: depth counts same-type enclosing binders") {
  FcpSpec s = prep("main = ( p?(x).x?(y).0 | 0 )");
  Abstraction ab = compute_abstraction(s);
  NameId x = s.find("x"), y = s.find("y");
  CHECK(ab.tuple.at(x).depth == 0);
  CHECK(ab.tuple.at(y).depth == 1);
  CHECK(ab.tuple.at(x).type == 1);
  CHECK(ab.row.at(x) != ab.row.at(y));
}

TEST_CASE("abstraction: binders in different choice branches share a class") {
  FcpSpec s = prep("main = ( (p?(x).x!<x>.0 + q?(y).y!<y>.0) | 0 )");
  Abstraction ab = compute_abstraction(s);
  NameId x = s.find("x"), y = s.find("y");
  CHECK(ab.tuple.at(x) == ab.tuple.at(y));
  CHECK(ab.row.at(x) == ab.row.at(y));
  // refinement keeps them together: they are never live at once
  refine_abstraction(ab, s, skels(s));
  CHECK(ab.row.at(x) == ab.row.at(y));
}

TEST_CASE("abstraction: names in different threads are distinct") {
  FcpSpec s = prep("main = ( p?(x).x!<x>.0 | q?(y).y!<y>.0 )");
  Abstraction ab = compute_abstraction(s);
  CHECK(ab.tuple.at(s.find("x")).thread == 0);
  CHECK(ab.tuple.at(s.find("y")).thread == 1);
  CHECK(ab.row.at(s.find("x")) != ab.row.at(s.find("y")));
}

TEST_CASE("restricted and input names never share a row") {
  FcpSpec s = prep("main = ( new r.p?(x).r!<x>.0 | 0 )");
  Abstraction ab = compute_abstraction(s);
  CHECK(ab.tuple.at(s.find("r")).type == 0);
  CHECK(ab.tuple.at(s.find("x")).type == 1);
  CHECK(ab.row.at(s.find("r")) != ab.row.at(s.find("x")));
}

TEST_CASE("refinement splits names live together across a call") {
  // f is still mapped while the callee formal u is being mapped
  FcpSpec s = prep(
      "K(f) := p?(x).L(f)\n"
      "L(u) := u!<u>.0\n"
      "main = K(a)\n");
  Abstraction ab = compute_abstraction(s);
  NameId f = s.find("f"), u = s.find("u");
  REQUIRE(ab.tuple.at(f) == ab.tuple.at(u));  // the raw tuple would share
  refine_abstraction(ab, s, skels(s));
  CHECK(ab.row.at(f) != ab.row.at(u));
  // soundness: at every reachable skeleton state, mapped names have
  // pairwise distinct rows
  for (const auto& sk : skels(s)) {
    for (size_t st = 0; st < sk.states.size(); ++st) {
      std::set<NameId> live = sk.mapped_at(s, (int)st);
      std::set<int> rows;
      for (NameId n : live) rows.insert(ab.row.at(n));
      CHECK(rows.size() == live.size());
    }
  }
}

TEST_CASE("parameter reordering aligns flipped calls") {
  FcpSpec s = prep(
      "K(f1,f2) := L(f2,f1)\n"
      "L(f3,f4) := K(f4,f3)\n"
      "main = K(a,b)\n");
  Abstraction ab = compute_abstraction(s);
  FcpSpec r = reorder_parameters(s, ab);
  Abstraction ab2 = compute_abstraction(r);
  // after reordering, every bound-name argument matches its formal's tuple
  auto check = [&](const TermPtr& t, auto&& self) -> void {
    if (t->kind == SeqTerm::Call) {
      const Equation& e = r.eq(t->callee);
      for (size_t i = 0; i < t->args.size(); ++i) {
        NameId a = t->args[i];
        if (!ab2.tuple.count(a)) continue;
        CHECK(ab2.tuple.at(a) == ab2.tuple.at(e.formals[i]));
      }
    } else if (t->kind == SeqTerm::Choice) {
      for (const auto& b : t->branches) self(b.cont, self);
    } else if (t->kind == SeqTerm::Restrict || t->kind == SeqTerm::Guard) {
      self(t->body, self);
    }
  };
  for (const auto& id : r.eq_order) check(r.eq(id).body, check);
  CHECK(spec_size(r) == spec_size(s));
}

TEST_CASE("aligned spec is left alone") {
  FcpSpec s = prep(
      "K(f1,f2) := L(f1,f2)\n"
      "L(f3,f4) := K(f3,f4)\n"
      "main = K(a,b)\n");
  Abstraction ab = compute_abstraction(s);
  FcpSpec r = reorder_parameters(s, ab);
  CHECK(print_spec(r) == print_spec(s));
}
