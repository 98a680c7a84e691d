// Deterministic generator of small well-formed process specifications,
// shared by the randomized equivalence and safety suites.

#ifndef FCP2PN_TESTS_RANDOM_FCP_HPP
#define FCP2PN_TESTS_RANDOM_FCP_HPP

#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fcp2pn/ast.hpp"
#include "fcp2pn/parser.hpp"

namespace testgen {

// Draws specs with at most three threads, monadic prefixes, optional
// restrictions and at most one (possibly recursive) equation. Receive
// binders and restricted names get globally unique identifiers so the
// clash validator never has to rename anything.
class RandomFcp {
 public:
  explicit RandomFcp(std::uint32_t seed) : rng_(seed) {}

  fcp2pn::FcpSpec draw(long max_size) {
    for (;;) {
      fcp2pn::FcpSpec spec = fcp2pn::parse_fcp(draw_text(max_size));
      if (fcp2pn::spec_size(spec) <= max_size) return spec;
    }
  }

 private:
  using Eqs = std::vector<std::pair<std::string, int>>;

  std::mt19937 rng_;
  int binders_ = 0;

  int pick(int n) { return (int)(rng_() % (unsigned)n); }

  std::string fresh(const char* stem) {
    return std::string(stem) + std::to_string(binders_++);
  }

  const std::string& name_from(const std::vector<std::string>& scope) {
    return scope[(size_t)pick((int)scope.size())];
  }

  // One prefix; a receive extends the scope seen by the continuation.
  std::string prefix(std::vector<std::string>& scope) {
    switch (pick(4)) {
      case 0:
        return "tau";
      case 1: {
        std::string ch = name_from(scope);
        std::string x = fresh("x");
        scope.push_back(x);
        return ch + "?(" + x + ")";
      }
      default:
        return name_from(scope) + "!<" + name_from(scope) + ">";
    }
  }

  std::string stop(const std::vector<std::string>& scope, const Eqs& eqs) {
    if (!eqs.empty() && pick(3) == 0) {
      const auto& [k, arity] = eqs[(size_t)pick((int)eqs.size())];
      std::string call = k + "(";
      for (int i = 0; i < arity; ++i) {
        if (i) call += ",";
        call += name_from(scope);
      }
      return call + ")";
    }
    return "0";
  }

  std::string seq(int budget, std::vector<std::string> scope,
                  const Eqs& eqs) {
    if (budget < 3) return stop(scope, eqs);
    int roll = pick(8);
    if (roll == 0) return stop(scope, eqs);
    if (roll == 1 && budget >= 7) {
      std::vector<std::string> left = scope, right = scope;
      std::string a = prefix(left) + "." + seq((budget - 5) / 2, left, eqs);
      std::string b = prefix(right) + "." + seq((budget - 5) / 2, right, eqs);
      return "(" + a + " + " + b + ")";
    }
    std::string p = prefix(scope);
    return p + "." + seq(budget - 3, scope, eqs);
  }

  std::string draw_text(long max_size) {
    binders_ = 0;
    std::ostringstream out;
    std::vector<std::string> globals = {"a", "b", "c"};
    Eqs eqs;
    if (max_size >= 20 && pick(2) == 0) {
      int arity = pick(2);
      eqs.push_back({"K", arity});
      std::vector<std::string> scope = globals;
      out << "K(";
      for (int i = 0; i < arity; ++i) {
        std::string f = fresh("f");
        out << (i ? "," : "") << f;
        scope.push_back(f);
      }
      // the body starts with a prefix so recursive calls stay guarded
      std::string guard = prefix(scope);
      out << ") := " << guard << "." << seq(5, scope, eqs) << "\n";
    }
    int threads = 1 + pick(3);
    int budget = (int)max_size / threads - 2;
    std::vector<std::string> scope = globals;
    out << "main = ";
    if (pick(3) == 0) {
      std::string r = fresh("r");
      out << "new " << r << ".";
      scope.push_back(r);
    }
    out << "( ";
    for (int t = 0; t < threads; ++t) {
      if (t) out << " | ";
      std::vector<std::string> local = scope;
      if (pick(4) == 0) {
        std::string r = fresh("r");
        out << "new " << r << ".";
        local.push_back(r);
      }
      out << seq(budget, local, eqs);
    }
    out << " )";
    return out.str();
  }
};

}  // namespace testgen

#endif
