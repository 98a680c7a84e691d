#include <catch2/catch_amalgamated.hpp>

#include "fcp2pn/parser.hpp"
#include "fcp2pn/translator.hpp"

using namespace fcp2pn;

namespace {

// the running two-thread example: a restricted name sent over a public channel
const char* kRestrictedSender = "main = ( new r.p!<r>.0 | p?(x).0 )";

TranslateOptions localOpts() {
  // keep the restriction thread-local, enumerate bluntly, two fresh values
  TranslateOptions o;
  o.split = false;
  o.drop_main_restrictions = false;
  o.rough_domains = true;
  o.new_bound = 2;
  return o;
}

bool check_everywhere(const Translation& tr, size_t max_states = 10000) {
  ExploreResult r = explore(tr.net, max_states);
  if (!r.safe()) return false;
  for (const Marking& m : r.lts.states) {
    if (!check_sm(m, tr.subst.sm)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("restricted sender, thread-local translation") {
  Translation tr = translate(parse_fcp(kRestrictedSender), localOpts());
  // substitution layer: [x=p], [x=n1], [x=n2], [x!=n1], [x!=n2],
  // [r=n1], [r=n2], [r*!=n1], [r*!=n2]
  CHECK(tr.report.subst_places == 9);
  CHECK(tr.report.nu == 2);
  CHECK(tr.report.sync == 2);
  CHECK(tr.net.transitions.size() == 4);
  // thread 0 has three control states, thread 1 two
  CHECK(tr.report.control_places == 5);

  ExploreResult r = explore(tr.net, 100);
  CHECK(r.safe());
  CHECK(r.lts.states.size() == 5);
  CHECK(r.lts.edges.size() == 4);
  for (const Marking& m : r.lts.states) {
    CHECK(check_sm(m, tr.subst.sm));
    CHECK(check_one_control_per_thread(tr.net, m));
  }
}

TEST_CASE("restriction transitions test freshness by read arcs") {
  Translation tr = translate(parse_fcp(kRestrictedSender), localOpts());
  int loops = 0;
  for (const Transition& t : tr.net.transitions) {
    if (t.name.rfind("nu", 0) != 0) continue;
    // consumes the counter, loops on the input row's complement place
    int consumed_star = 0, looped_neq = 0;
    for (int p : t.pre) {
      const std::string& n = tr.net.places[(size_t)p].name;
      if (n.rfind("star_", 0) == 0) ++consumed_star;
      if (n.rfind("neq_", 0) == 0 &&
          std::find(t.post.begin(), t.post.end(), p) != t.post.end())
        ++looped_neq;
    }
    CHECK(consumed_star == 1);
    CHECK(looped_neq == 1);  // one input row, matching index only
    ++loops;
  }
  CHECK(loops == 2);
}

TEST_CASE("default pipeline drops the main restriction") {
  Translation tr = translate(parse_fcp(kRestrictedSender));
  // r becomes public: no fresh pool, a single [x=r] place
  CHECK(tr.pool == 0);
  CHECK(tr.report.subst_places == 1);
  // split communication: one channel value, one payload value
  CHECK(tr.report.middle_places == 1);
  CHECK(tr.report.split_first == 1);
  CHECK(tr.report.split_second == 1);
  CHECK(check_everywhere(tr));

  NetLts lts = stable_lts(tr.net, 100);
  CHECK(lts.states.size() == 2);
  REQUIRE(lts.edges.size() == 1);
  // the edge is the first splitting stage (the commitment point)
  CHECK(tr.net.transitions[(size_t)lts.edges[0].transition].observable);
}

TEST_CASE("splitting trades products for sums") {
  TranslateOptions o = localOpts();
  o.split = true;
  Translation tr = translate(parse_fcp(kRestrictedSender), o);
  // one channel value, two payload values: 1+2 instead of 1*2
  CHECK(tr.report.sync == 0);
  CHECK(tr.report.middle_places == 1);
  CHECK(tr.report.split_first == 1);
  CHECK(tr.report.split_second == 2);
  CHECK(check_everywhere(tr));
}

TEST_CASE("pool override below the initial demand") {
  FcpSpec s = parse_fcp("main = new h.( h!<h>.0 | h?(x).0 )");
  TranslateOptions o;
  o.drop_main_restrictions = false;
  o.new_bound = 0;
  CHECK_THROWS_AS(translate(s, o), BudgetExhausted);
  o.new_bound = 1;
  Translation tr = translate(s, o);
  CHECK(check_everywhere(tr));
}

TEST_CASE("call sites map, queue and unmap parameters") {
  FcpSpec s = parse_fcp(
      "K(f) := f?(x).K(x)\n"
      "M() := a!<a>.M()\n"
      "main = ( K(a) | M() )\n");
  Translation tr = translate(s);
  CHECK(tr.report.call_map > 0);
  CHECK(tr.report.call_unmap > 0);
  CHECK(tr.report.call_body > 0);
  ExploreResult r = explore(tr.net, 10000);
  CHECK(r.safe());
  for (const Marking& m : r.lts.states) CHECK(check_sm(m, tr.subst.sm));
  // the system loops forever: no deadlocks even without a gadget
  CHECK(find_deadlocks(tr.net, 10000).empty());
}

TEST_CASE("success gadget separates termination from deadlock") {
  // both threads finish: proper termination
  Translation done = translate(parse_fcp(kRestrictedSender));
  std::set<int> loops = add_success_gadget(done);
  REQUIRE_FALSE(loops.empty());
  CHECK(find_deadlocks(done.net, 1000, loops).empty());

  // receiver without a sender: wedged thread
  Translation stuck = translate(parse_fcp("main = ( p?(x).0 | tau.0 )"));
  std::set<int> loops2 = add_success_gadget(stuck);
  REQUIRE_FALSE(loops2.empty());
  CHECK_FALSE(find_deadlocks(stuck.net, 1000, loops2).empty());
}

TEST_CASE("unmap sharing merges duplicate call continuations") {
  FcpSpec s = parse_fcp(
      "K() := 0\n"
      "main = ( tau.K() + tau.K() )\n");
  TranslateOptions on, off;
  off.unmap_sharing = false;
  Translation a = translate(s, on), b = translate(s, off);
  CHECK(a.report.control_places + 1 == b.report.control_places);
  CHECK(a.report.call_body + 1 == b.report.call_body);
  CHECK(check_everywhere(a));
  CHECK(check_everywhere(b));
}

TEST_CASE("translation is deterministic") {
  FcpSpec s = parse_fcp(
      "K(f) := f?(x).K(x)\n"
      "M() := a!<a>.M()\n"
      "main = ( K(a) | M() )\n");
  Translation a = translate(s), b = translate(s);
  REQUIRE(a.net.places.size() == b.net.places.size());
  REQUIRE(a.net.transitions.size() == b.net.transitions.size());
  for (size_t i = 0; i < a.net.places.size(); ++i)
    CHECK(a.net.places[i].name == b.net.places[i].name);
  for (size_t i = 0; i < a.net.transitions.size(); ++i) {
    CHECK(a.net.transitions[i].pre == b.net.transitions[i].pre);
    CHECK(a.net.transitions[i].post == b.net.transitions[i].post);
  }
  CHECK(a.net.initial == b.net.initial);
}

TEST_CASE("guards require the extensions flag") {
  FcpSpec s = parse_fcp("main = ( p?(x).[x=q]tau.0 | p!<q>.0 )");
  s.extensions = true;
  CHECK_THROWS_AS(translate(s), NotSupported);
  TranslateOptions o;
  o.extensions = true;
  Translation tr = translate(s, o);
  CHECK(tr.report.guard == 1);  // dom(x) = {q}: a single match transition
  CHECK(check_everywhere(tr));
}

TEST_CASE("polyadic prefixes are rejected") {
  FcpSpec s = parse_fcp("main = ( p!<a,b>.0 | p?(x,y).0 )");
  CHECK_THROWS_AS(translate(s), NotSupported);
}

TEST_CASE("no restrictions anywhere: empty fresh pool") {
  Translation tr = translate(parse_fcp("main = ( p!<a>.0 | p?(x).0 )"));
  CHECK(tr.pool == 0);
  CHECK(tr.subst.star.empty());
  CHECK(check_everywhere(tr));
}
