#include <catch2/catch_amalgamated.hpp>

#include "fcp2pn/control.hpp"
#include "fcp2pn/normalize.hpp"
#include "fcp2pn/parser.hpp"
#include "fcp2pn/validate.hpp"

using namespace fcp2pn;

static FcpSpec prep(const std::string& txt) {
  return validate_no_clash(parse_fcp(txt)).spec;
}

TEST_CASE("skeleton of a restricted sender thread") {
  FcpSpec s = prep("main = ( new r.p!<r>.0 | p?(x).0 )");
  Skeleton sk = build_skeleton(s, s.threads[0]);
  REQUIRE(sk.states.size() == 3);
  REQUIRE(sk.edges.size() == 2);
  const SkelState& s0 = sk.states[(size_t)sk.entry];
  CHECK(s0.node->kind == SeqTerm::Restrict);
  CHECK_FALSE(s0.stable);
  REQUIRE(s0.out.size() == 1);
  const SkelEdge& nu = sk.edges[(size_t)s0.out[0]];
  CHECK(nu.kind == SkelEdge::Nu);
  CHECK(s.text(nu.a) == "r");
  const SkelState& s1 = sk.states[(size_t)nu.to];
  CHECK(s1.stable);
  CHECK(s1.lambda.empty());
  REQUIRE(s1.out.size() == 1);
  const SkelEdge& snd = sk.edges[(size_t)s1.out[0]];
  CHECK(snd.kind == SkelEdge::SendPre);
  const SkelState& s2 = sk.states[(size_t)snd.to];
  CHECK(s2.stable);
  CHECK(s2.node->branches.empty());
  // r is no longer free after the send and waits in the queue
  REQUIRE(s2.lambda.size() == 1);
  CHECK(s.text(s2.lambda[0]) == "r");
}

TEST_CASE("unused receive binder joins the pending queue") {
  FcpSpec s = prep("main = ( new r.p!<r>.0 | p?(x).0 )");
  Skeleton sk = build_skeleton(s, s.threads[1]);
  REQUIRE(sk.states.size() == 2);
  const SkelEdge& rc = sk.edges[0];
  CHECK(rc.kind == SkelEdge::RecvPre);
  const SkelState& tgt = sk.states[(size_t)rc.to];
  REQUIRE(tgt.lambda.size() == 1);
  CHECK(s.text(tgt.lambda[0]) == "x");
}

TEST_CASE("call phases: map last argument first, unmap, expand") {
  FcpSpec s = prep(
      "K(f,g) := tau.L(g,f)\n"
      "L(u,w) := u!<w>.K(u,w)\n"
      "main = K(a,b)\n");
  Skeleton sk = build_skeleton(s, s.threads[0]);
  // entry maps b then a (both public: queue stays empty), then expands
  const SkelState& e0 = sk.states[(size_t)sk.entry];
  CHECK(e0.stable);
  CHECK(e0.pos == 2);
  const SkelEdge& m1 = sk.edges[(size_t)e0.out.at(0)];
  CHECK(m1.kind == SkelEdge::CallMap);
  CHECK(s.text(m1.a) == "b");   // last argument first
  CHECK(s.text(m1.b) == "g");
  const SkelState& e1 = sk.states[(size_t)m1.to];
  CHECK_FALSE(e1.stable);
  CHECK(e1.lambda.empty());
  const SkelEdge& m2 = sk.edges[(size_t)e1.out.at(0)];
  CHECK(s.text(m2.a) == "a");
  CHECK(s.text(m2.b) == "f");
  const SkelEdge& body = sk.edges[(size_t)sk.states[(size_t)m2.to].out.at(0)];
  CHECK(body.kind == SkelEdge::CallBody);

  // inside the loop, non-public arguments queue up and are unmapped
  bool sawUnmap = false;
  for (const auto& e : sk.edges)
    if (e.kind == SkelEdge::CallUnmap) sawUnmap = true;
  CHECK(sawUnmap);
  // every unmap precedes the body expansion: a CallBody edge only leaves a
  // state with an empty queue
  for (const auto& e : sk.edges)
    if (e.kind == SkelEdge::CallBody)
      CHECK(sk.states[(size_t)e.from].lambda.empty());
}

TEST_CASE("recursive thread reuses equation body states") {
  FcpSpec s = eliminate_self_calls(prep("K(f) := tau.K(f)\nmain = K(a)\n"));
  Skeleton sk = build_skeleton(s, s.threads[0]);
  CHECK(sk.states.size() == 9);
  CHECK(sk.edges.size() == 9);
  // exactly one choice state: both body expansions of K share it
  int choices = 0;
  for (const auto& st : sk.states)
    if (st.node->kind == SeqTerm::Choice && !st.node->branches.empty())
      ++choices;
  CHECK(choices == 1);
  // three body expansions: K from the outer call, the relay, K from the
  // relay's call; the last two share K's body state
  int bodies = 0;
  for (const auto& e : sk.edges)
    if (e.kind == SkelEdge::CallBody) ++bodies;
  CHECK(bodies == 3);
}

TEST_CASE("mapped names at skeleton states") {
  FcpSpec s = eliminate_self_calls(prep("K(f) := tau.K(f)\nmain = K(a)\n"));
  Skeleton sk = build_skeleton(s, s.threads[0]);
  for (size_t i = 0; i < sk.states.size(); ++i) {
    const SkelState& st = sk.states[i];
    std::set<NameId> m = sk.mapped_at(s, (int)i);
    // public names are never mapped
    for (NameId n : m) CHECK(s.kind(n) != NameKind::Public);
    // queue members are always mapped
    for (NameId n : st.lambda) CHECK(m.count(n) == 1);
  }
  // at the tau choice the only mapped name is K's formal
  for (size_t i = 0; i < sk.states.size(); ++i) {
    const SkelState& st = sk.states[i];
    if (st.node->kind == SeqTerm::Choice && !st.node->branches.empty()) {
      std::set<NameId> m = sk.mapped_at(s, (int)i);
      REQUIRE(m.size() == 1);
      CHECK(s.text(*m.begin()) == "f");
    }
  }
}

TEST_CASE("guard edges carry operands and polarity") {
  FcpSpec raw = parse_fcp("main = ( p?(x).[x=q]tau.0 | p?(z).[z!=q]z!<q>.0 )");
  raw.extensions = true;
  FcpSpec s = validate_no_clash(std::move(raw)).spec;
  Skeleton sk = build_skeleton(s, s.threads[0]);
  bool found = false;
  for (const auto& e : sk.edges)
    if (e.kind == SkelEdge::GuardStep) {
      found = true;
      CHECK(s.text(e.a) == "x");
      CHECK(s.text(e.b) == "q");
      CHECK(e.positive);
      CHECK_FALSE(sk.states[(size_t)e.from].stable);
      // x is dropped after the guard since the body does not use it
      const SkelState& tgt = sk.states[(size_t)e.to];
      REQUIRE(tgt.lambda.size() == 1);
      CHECK(s.text(tgt.lambda[0]) == "x");
    }
  CHECK(found);
  Skeleton sk2 = build_skeleton(s, s.threads[1]);
  bool neg = false;
  for (const auto& e : sk2.edges)
    if (e.kind == SkelEdge::GuardStep) {
      neg = true;
      CHECK_FALSE(e.positive);
      // z stays free in the guarded continuation, no queueing
      CHECK(sk2.states[(size_t)e.to].lambda.empty());
    }
  CHECK(neg);
}
