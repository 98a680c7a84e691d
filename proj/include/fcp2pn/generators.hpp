// Benchmark model generators.
//
// gen_ness(k): k students hand in coursework through a shared submission
// channel after pairing up non-deterministically; deadlocks iff k is odd.
// gen_dness(k): the deterministic variant where student 2i-1 always pairs
// with student 2i over a dedicated channel; k must be even, never deadlocks.
// gen_cs(m, n): a client/server system with one server, m session workers
// and n clients, all recursive.
//
// The generators emit concrete source text and run it through the parser,
// so whatever they produce is by construction also valid input syntax.

#ifndef FCP2PN_GENERATORS_HPP
#define FCP2PN_GENERATORS_HPP

#include <map>
#include <stdexcept>
#include <string>

#include "fcp2pn/parser.hpp"
#include "fcp2pn/symmetry.hpp"

namespace fcp2pn {

inline FcpSpec gen_ness(int k) {
  if (k < 1)
    throw std::invalid_argument("gen_ness: invalid parameter k=" +
                                std::to_string(k) + " (need k >= 1)");
  auto h = [](int i) { return "h" + std::to_string(i); };
  std::string s = "main = new h.";
  for (int i = 1; i <= k; ++i) s += "new " + h(i) + ".";
  s += "( ";
  // teachers: pass the submission channel on, then wait for confirmation
  for (int i = 1; i <= k; ++i) {
    std::string xi = "xt" + std::to_string(i);
    s += h(i) + "!<nessc>." + h(i) + "?(" + xi + ").0 | ";
  }
  // students: either announce yourself on h, or pick up a partner's
  // announcement and submit both names
  for (int i = 1; i <= k; ++i) {
    std::string nsc = "nsc" + std::to_string(i);
    std::string xs = "xs" + std::to_string(i);
    s += h(i) + "?(" + nsc + ").(" + "h!<" + h(i) + ">." + h(i) +
         "!<fin>.0 + h?(" + xs + ")." + nsc + "!<" + h(i) + ">." + nsc +
         "!<" + xs + ">." + h(i) + "!<fin>.0) | ";
  }
  // the environment collects one submission per student
  for (int i = 1; i <= k; ++i) s += "nessc?(y" + std::to_string(i) + ").";
  s += "0 )\n";
  return parse_fcp(s);
}

inline FcpSpec gen_dness(int k) {
  if (k < 2 || k % 2 != 0)
    throw std::invalid_argument("gen_dness: invalid parameter k=" +
                                std::to_string(k) + " (need even k >= 2)");
  auto h = [](int i) { return "h" + std::to_string(i); };
  std::string s = "main = ";
  for (int i = 1; i <= k; ++i) s += "new " + h(i) + ".";
  for (int i = 1; i <= k / 2; ++i) s += "new g" + std::to_string(i) + ".";
  s += "( ";
  for (int i = 1; i <= k; ++i) {
    std::string xi = "xt" + std::to_string(i);
    s += h(i) + "!<nessc>." + h(i) + "?(" + xi + ").0 | ";
  }
  // fixed pairing: student 2i-1 announces on g_i, student 2i responds
  for (int i = 1; i <= k / 2; ++i) {
    std::string g = "g" + std::to_string(i);
    std::string a = h(2 * i - 1), b = h(2 * i);
    std::string nsa = "nsc" + std::to_string(2 * i - 1);
    std::string nsb = "nsc" + std::to_string(2 * i);
    std::string w = "w" + std::to_string(i);
    s += a + "?(" + nsa + ")." + g + "!<" + a + ">." + a + "!<fin>.0 | ";
    s += b + "?(" + nsb + ")." + g + "?(" + w + ")." + nsb + "!<" + b +
         ">." + nsb + "!<" + w + ">." + b + "!<fin>.0 | ";
  }
  for (int i = 1; i <= k; ++i) s += "nessc?(y" + std::to_string(i) + ").";
  s += "0 )\n";
  return parse_fcp(s);
}

inline FcpSpec gen_cs(int m, int n) {
  if (m < 1 || n < 1)
    throw std::invalid_argument("gen_cs: invalid parameters m=" +
                                std::to_string(m) + ", n=" +
                                std::to_string(n) + " (need m,n >= 1)");
  std::string s =
      "CLIENT(url) := new ip.url!<ip>.ip?(s).s?(x).CLIENT(url)\n"
      "SERVER(url,getses) := url?(y).getses?(s).y!<s>.SERVER(url,getses)\n"
      "SESSION(getses) := new ses.getses!<ses>.ses!<ses>.SESSION(getses)\n"
      "main = new getses.( SERVER(url,getses)";
  for (int i = 0; i < m; ++i) s += " | SESSION(getses)";
  for (int i = 0; i < n; ++i) s += " | CLIENT(url)";
  s += " )\n";
  return parse_fcp(s);
}

// Thread-permutation symmetry of the gen_ness nets. Participant i owns
// the channel h<i>, one teacher thread (thread i-1) and one student
// thread (thread k+i-1); permuting participants permutes their control
// chains, their substitution rows, and the h-indexed columns of the
// collector's rows, and fixes the collector thread itself. The partner
// row xs<i> can hold any other participant's channel h<j>, so those
// places carry two indices and go into a matrix family. Communication
// middle places are filled in structurally; the returned candidate is
// empty when that fails, and must pass verify_linked_symmetry before a
// sweep may rely on it.
inline LinkedSymmetry ness_thread_symmetry(const PetriNet& net, int k) {
  std::map<std::string, int> idx;
  for (int p = 0; p < (int)net.places.size(); ++p)
    idx[net.places[(size_t)p].name] = p;
  auto find = [&](const std::string& n) {
    auto it = idx.find(n);
    return it == idx.end() ? -1 : it->second;
  };
  LinkedSymmetry ls;
  ls.units.resize((size_t)k);
  for (int i = 1; i <= k; ++i) {
    auto& u = ls.units[(size_t)(i - 1)];
    auto push = [&](const std::string& n) {
      int p = find(n);
      if (p >= 0) u.push_back(p);
    };
    push("eq_xt" + std::to_string(i) + "_fin");
    push("eq_nsc" + std::to_string(i) + "_nessc");
    for (int r = 1; r <= k; ++r)
      push("eq_y" + std::to_string(r) + "_h" + std::to_string(i));
    for (int thread : {i - 1, k + i - 1})
      for (int s = 0;; ++s) {
        int p = find("ctl_" + std::to_string(thread) + "_" +
                     std::to_string(s));
        if (p < 0) break;
        u.push_back(p);
      }
  }
  std::vector<std::vector<int>> xs((size_t)k, std::vector<int>((size_t)k, -1));
  for (int i = 1; i <= k; ++i)
    for (int j = 1; j <= k; ++j)
      xs[(size_t)(i - 1)][(size_t)(j - 1)] =
          find("eq_xs" + std::to_string(i) + "_h" + std::to_string(j));
  ls.matrices.push_back(std::move(xs));
  if (!complete_linked_with_aux(net, ls)) ls.units.clear();
  return ls;
}

}  // namespace fcp2pn

#endif
