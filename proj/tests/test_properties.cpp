#include <catch2/catch_amalgamated.hpp>

#include "fcp2pn/bisim.hpp"
#include "fcp2pn/exporters.hpp"
#include "fcp2pn/normalize.hpp"
#include "fcp2pn/translator.hpp"
#include "random_fcp.hpp"

using namespace fcp2pn;

namespace {

constexpr size_t kCap = 100000;

// Translation plus full exploration, skipping draws whose state space
// blows past the cap. Returns false only on a genuine failure.
bool try_explore(const FcpSpec& spec, const TranslateOptions& opt,
                 Translation& tr, ExploreResult& er) {
  try {
    tr = translate(spec, opt);
    er = explore(tr.net, kCap);
    return true;
  } catch (const StateLimitExceeded&) {
    return false;
  }
}

}  // namespace

TEST_CASE("random specs: stable net steps mirror the reactions") {
  testgen::RandomFcp gen(101);
  int done = 0;
  while (done < 20) {
    FcpSpec spec = gen.draw(25);
    Translation tr;
    ExploreResult er;
    if (!try_explore(spec, {}, tr, er)) continue;
    PiLts pi = build_pi_lts(tr.spec, kCap);
    NetLts st = stable_lts(tr.net, kCap);
    INFO(print_spec(spec));
    CHECK(strong_bisim(to_generic(pi), to_generic(st)).equivalent);
    ++done;
  }
}

TEST_CASE("random specs: the full net is weakly equivalent") {
  testgen::RandomFcp gen(202);
  int done = 0;
  while (done < 10) {
    FcpSpec spec = gen.draw(15);
    Translation tr;
    ExploreResult er;
    if (!try_explore(spec, {}, tr, er)) continue;
    PiLts pi = build_pi_lts(tr.spec, kCap);
    INFO(print_spec(spec));
    CHECK(weak_bisim(to_generic(pi), to_generic(er.lts, &tr.net)).equivalent);
    ++done;
  }
}

TEST_CASE("random specs: safety and substitution invariants everywhere") {
  testgen::RandomFcp gen(303);
  int done = 0;
  while (done < 20) {
    FcpSpec spec = gen.draw(25);
    Translation tr;
    ExploreResult er;
    if (!try_explore(spec, {}, tr, er)) continue;
    INFO(print_spec(spec));
    REQUIRE(er.safe());
    for (const Marking& m : er.lts.states) {
      CHECK(check_sm(m, tr.subst.sm));
    }
    ++done;
  }
}

TEST_CASE("random specs: translation output is deterministic") {
  testgen::RandomFcp gen(404);
  for (int i = 0; i < 10; ++i) {
    FcpSpec spec = gen.draw(25);
    std::string once = export_lola(translate(spec).net);
    std::string twice = export_lola(translate(spec).net);
    CHECK(once == twice);
  }
}

TEST_CASE("random specs: parameter reordering preserves behavior") {
  testgen::RandomFcp gen(505);
  int done = 0;
  while (done < 10) {
    FcpSpec spec = gen.draw(25);
    TranslateOptions plain;
    plain.reorder = false;
    Translation a, b;
    ExploreResult ea, eb;
    if (!try_explore(spec, {}, a, ea) || !try_explore(spec, plain, b, eb))
      continue;
    INFO(print_spec(spec));
    CHECK(weak_bisim(to_generic(ea.lts, &a.net), to_generic(eb.lts, &b.net))
              .equivalent);
    ++done;
  }
}

TEST_CASE("random specs: splitting preserves behavior") {
  testgen::RandomFcp gen(606);
  int done = 0;
  while (done < 10) {
    FcpSpec spec = gen.draw(25);
    TranslateOptions nosplit;
    nosplit.split = false;
    Translation a, b;
    ExploreResult ea, eb;
    if (!try_explore(spec, {}, a, ea) || !try_explore(spec, nosplit, b, eb))
      continue;
    INFO(print_spec(spec));
    CHECK(weak_bisim(to_generic(ea.lts, &a.net), to_generic(eb.lts, &b.net))
              .equivalent);
    ++done;
  }
}

TEST_CASE("random specs: normalization passes are idempotent") {
  testgen::RandomFcp gen(707);
  for (int i = 0; i < 10; ++i) {
    FcpSpec spec = validate_no_clash(gen.draw(25)).spec;
    FcpSpec once = normalize_base(spec);
    FcpSpec twice = normalize_base(once);
    CHECK(print_spec(once) == print_spec(twice));
  }
}
