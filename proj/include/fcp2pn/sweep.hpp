// Memory-lean exhaustive sweeps for large safe nets.
//
// explore() keeps every marking twice (state vector plus ordered index),
// which tops out around twenty million markings on a small machine. The
// sweep below stores only a 96-bit fingerprint per visited marking in an
// open-addressing table and spills breadth-first frontiers to temporary
// files, so hundreds of millions of markings fit in a few gigabytes.
// Duplicate detection through fingerprints is probabilistic: two distinct
// markings collide with probability about n^2 / 2^97, which is below 1e-12
// for the state counts handled here. Checks that need the exact transition
// system (bisimulation, certificates) must keep using explore().

#ifndef FCP2PN_SWEEP_HPP
#define FCP2PN_SWEEP_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fcp2pn/petri.hpp"
#include "fcp2pn/symmetry.hpp"

namespace fcp2pn {

namespace detail {

inline uint64_t mix64(uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

inline std::pair<uint64_t, uint64_t> fingerprint(
    const std::vector<uint64_t>& words) {
  uint64_t a = 0x6a09e667f3bcc908ULL, b = 0xbb67ae8584caa73bULL;
  for (uint64_t w : words) {
    a = mix64(a ^ w);
    b = mix64(b + w + 0x9e3779b97f4a7c15ULL);
  }
  return {a, b};
}

// Linear-probing set of 96-bit fingerprints, sized once up front.
class FingerprintSet {
 public:
  explicit FingerprintSet(size_t max_elems)
      : limit_(max_elems),
        cap_(max_elems + max_elems / 8 + 64),
        lo_(cap_, 0),
        hi_(cap_, 0) {}

  // true when the fingerprint was not present yet
  bool insert(uint64_t h1, uint64_t h2) {
    uint64_t lo = h1 ? h1 : 1;  // zero marks an empty slot
    uint32_t hi = (uint32_t)h2;
    size_t i = (size_t)(((unsigned __int128)h1 * cap_) >> 64);
    for (;;) {
      if (lo_[i] == 0) {
        if (size_ == limit_) throw StateLimitExceeded(limit_);
        lo_[i] = lo;
        hi_[i] = hi;
        ++size_;
        return true;
      }
      if (lo_[i] == lo && hi_[i] == hi) return false;
      if (++i == cap_) i = 0;
    }
  }

  size_t size() const { return size_; }

 private:
  size_t limit_, cap_, size_ = 0;
  std::vector<uint64_t> lo_;
  std::vector<uint32_t> hi_;
};

class TmpFile {
 public:
  TmpFile() : f_(std::tmpfile()) {
    if (!f_) throw std::runtime_error("cannot create a spill file");
  }
  ~TmpFile() {
    if (f_) std::fclose(f_);
  }
  TmpFile(const TmpFile&) = delete;
  TmpFile& operator=(const TmpFile&) = delete;
  FILE* get() { return f_; }

 private:
  FILE* f_;
};

}  // namespace detail

struct SweepResult {
  uint64_t states = 0;
  uint64_t safety_violations = 0;
  uint64_t sm_violations = 0;
  uint64_t deadlocks = 0;     // dead markings rejected by is_terminal
  uint64_t terminations = 0;  // dead markings accepted by is_terminal
  std::vector<Marking> dead_samples;  // a few witnesses, for reporting
};

namespace detail {

template <class Canon>
SweepResult sweep_impl(const PetriNet& net, size_t max_states,
                       const SmConstraints* sm,
                       const std::function<bool(const Marking&)>& is_terminal,
                       Canon* canon) {
  SweepResult res;
  const size_t nw = net.initial.words().size();
  Marking init = net.initial;
  if (canon) canon->apply(init);
  detail::FingerprintSet seen(max_states);
  auto f0 = detail::fingerprint(init.words());
  seen.insert(f0.first, f0.second);
  res.states = 1;

  auto cur = std::make_unique<detail::TmpFile>();
  auto next = std::make_unique<detail::TmpFile>();
  std::fwrite(init.words().data(), 8, nw, cur->get());

  Marking m = net.initial, succ = net.initial;
  std::vector<uint64_t> buf(nw);
  size_t level = 1;
  while (level) {
    std::rewind(cur->get());
    size_t wrote = 0;
    while (std::fread(buf.data(), 8, nw, cur->get()) == nw) {
      m.words() = buf;
      bool progress = false;
      for (int t = 0; t < (int)net.transitions.size(); ++t) {
        if (!is_enabled(net, m, t)) continue;
        progress = true;
        if (violates_safety(net, m, t)) ++res.safety_violations;
        // in-place firing; same-size assignment never reallocates
        succ.words() = m.words();
        for (int p : net.transitions[(size_t)t].pre) succ.reset(p);
        for (int p : net.transitions[(size_t)t].post) succ.set(p);
        if (canon) canon->apply(succ);
        auto f = detail::fingerprint(succ.words());
        if (seen.insert(f.first, f.second)) {
          ++res.states;
          std::fwrite(succ.words().data(), 8, nw, next->get());
          ++wrote;
        }
      }
      if (sm && !check_sm(m, *sm)) ++res.sm_violations;
      if (!progress) {
        if (is_terminal && is_terminal(m)) {
          ++res.terminations;
        } else {
          ++res.deadlocks;
          if (res.dead_samples.size() < 4) res.dead_samples.push_back(m);
        }
      }
    }
    cur = std::move(next);
    next = std::make_unique<detail::TmpFile>();
    level = wrote;
  }
  return res;
}

template <class Canon>
SweepResult reduced_deadlock_sweep_impl(
    const PetriNet& net, size_t max_states,
    const std::function<bool(const Marking&)>& is_terminal, Canon* canon) {
  const int nt = (int)net.transitions.size();
  const int np = (int)net.places.size();
  // static structure: producers per place, conflicts per transition
  std::vector<std::vector<int>> producers((size_t)np);
  for (int t = 0; t < nt; ++t)
    for (int p : net.transitions[(size_t)t].post)
      producers[(size_t)p].push_back(t);
  std::vector<std::vector<int>> consumers((size_t)np);
  for (int t = 0; t < nt; ++t)
    for (int p : net.transitions[(size_t)t].pre)
      consumers[(size_t)p].push_back(t);
  std::vector<std::vector<int>> conflict((size_t)nt);
  for (int t = 0; t < nt; ++t) {
    std::vector<int> c;
    for (int p : net.transitions[(size_t)t].pre)
      c.insert(c.end(), consumers[(size_t)p].begin(),
               consumers[(size_t)p].end());
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    conflict[(size_t)t] = std::move(c);
  }

  SweepResult res;
  const size_t nw = net.initial.words().size();
  Marking init = net.initial;
  if (canon) canon->apply(init);
  detail::FingerprintSet seen(max_states);
  auto f0 = detail::fingerprint(init.words());
  seen.insert(f0.first, f0.second);
  res.states = 1;

  auto cur = std::make_unique<detail::TmpFile>();
  auto next = std::make_unique<detail::TmpFile>();
  std::fwrite(init.words().data(), 8, nw, cur->get());

  Marking m = net.initial, succ = net.initial;
  std::vector<uint64_t> buf(nw);
  std::vector<int> stamp((size_t)nt, -1);
  std::vector<int> work, fire_list;
  int epoch = 0;
  size_t level = 1;
  while (level) {
    std::rewind(cur->get());
    size_t wrote = 0;
    while (std::fread(buf.data(), 8, nw, cur->get()) == nw) {
      m.words() = buf;
      // seed with the enabled transition of smallest conflict closure
      int seed = -1;
      for (int t = 0; t < nt; ++t) {
        if (!is_enabled(net, m, t)) continue;
        if (seed < 0 ||
            conflict[(size_t)t].size() < conflict[(size_t)seed].size())
          seed = t;
      }
      if (seed < 0) {
        if (is_terminal && is_terminal(m)) {
          ++res.terminations;
        } else {
          ++res.deadlocks;
          if (res.dead_samples.size() < 4) res.dead_samples.push_back(m);
        }
        continue;
      }
      ++epoch;
      work.clear();
      fire_list.clear();
      auto join = [&](int t) {
        if (stamp[(size_t)t] == epoch) return;
        stamp[(size_t)t] = epoch;
        work.push_back(t);
      };
      join(seed);
      while (!work.empty()) {
        int t = work.back();
        work.pop_back();
        if (is_enabled(net, m, t)) {
          fire_list.push_back(t);
          for (int c : conflict[(size_t)t]) join(c);
        } else {
          for (int p : net.transitions[(size_t)t].pre) {
            if (m.test(p)) continue;
            for (int pr : producers[(size_t)p]) join(pr);
            break;  // one unmarked input place suffices
          }
        }
      }
      for (int t : fire_list) {
        succ.words() = m.words();
        for (int p : net.transitions[(size_t)t].pre) succ.reset(p);
        for (int p : net.transitions[(size_t)t].post) succ.set(p);
        if (canon) canon->apply(succ);
        auto f = detail::fingerprint(succ.words());
        if (seen.insert(f.first, f.second)) {
          ++res.states;
          std::fwrite(succ.words().data(), 8, nw, next->get());
          ++wrote;
        }
      }
    }
    cur = std::move(next);
    next = std::make_unique<detail::TmpFile>();
    level = wrote;
  }
  return res;
}

}  // namespace detail

// Breadth-first sweep over all reachable markings, checking 1-safety,
// optionally the substitution-marking constraints, and classifying dead
// markings. is_terminal tells proper termination apart from a deadlock;
// without it every dead marking counts as a deadlock. With a (verified)
// symmetry the sweep visits one orbit representative per marking orbit;
// all checked properties are preserved by verified automorphisms, so
// the verdicts still cover the whole net.
inline SweepResult sweep(
    const PetriNet& net, size_t max_states,
    const SmConstraints* sm = nullptr,
    const std::function<bool(const Marking&)>& is_terminal = {},
    const SymmetrySpec* sym = nullptr) {
  std::optional<Canonicalizer> canon;
  if (sym && !sym->empty()) canon.emplace(*sym);
  return detail::sweep_impl(net, max_states, sm, is_terminal,
                            canon ? &*canon : nullptr);
}

inline SweepResult sweep(const PetriNet& net, size_t max_states,
                         const SmConstraints* sm,
                         const std::function<bool(const Marking&)>& is_terminal,
                         const LinkedSymmetry* sym) {
  std::optional<LinkedCanonicalizer> canon;
  if (sym && !sym->empty()) canon.emplace(*sym);
  return detail::sweep_impl(net, max_states, sm, is_terminal,
                            canon ? &*canon : nullptr);
}

// Deadlock-preserving partial-order reduction (stubborn sets). At each
// marking only the enabled members of one stubborn set are fired: the set
// seeds with an enabled transition and closes under two rules, (a) every
// transition sharing an input place with an enabled member joins, and
// (b) a disabled member contributes the producers of one of its unmarked
// input places. Every deadlock of the full net stays reachable in the
// reduced graph, and a marking is dead in the reduction exactly when it
// is dead in the net, so deadlock verdicts are exact while the visited
// fraction of the state space can shrink by orders of magnitude. Safety
// or invariant checks must not use this sweep: omitted interleavings are
// not revisited. A verified symmetry composes soundly because the
// frontier stores canonical representatives, so stubborn sets are always
// computed on the representative of an orbit.
inline SweepResult reduced_deadlock_sweep(
    const PetriNet& net, size_t max_states,
    const std::function<bool(const Marking&)>& is_terminal = {},
    const SymmetrySpec* sym = nullptr) {
  std::optional<Canonicalizer> canon;
  if (sym && !sym->empty()) canon.emplace(*sym);
  return detail::reduced_deadlock_sweep_impl(net, max_states, is_terminal,
                                             canon ? &*canon : nullptr);
}

inline SweepResult reduced_deadlock_sweep(
    const PetriNet& net, size_t max_states,
    const std::function<bool(const Marking&)>& is_terminal,
    const LinkedSymmetry* sym) {
  std::optional<LinkedCanonicalizer> canon;
  if (sym && !sym->empty()) canon.emplace(*sym);
  return detail::reduced_deadlock_sweep_impl(net, max_states, is_terminal,
                                             canon ? &*canon : nullptr);
}

// Depth-first search that stops at the first dead marking not accepted by
// is_terminal. Suited to nets where deadlocks are frequent: a witness is
// typically found after one deep dive instead of an exhaustive sweep.
inline std::optional<Marking> find_one_deadlock(
    const PetriNet& net, size_t max_states,
    const std::function<bool(const Marking&)>& is_terminal = {}) {
  detail::FingerprintSet seen(max_states);
  auto f0 = detail::fingerprint(net.initial.words());
  seen.insert(f0.first, f0.second);
  std::vector<Marking> stack{net.initial};
  Marking succ = net.initial;
  while (!stack.empty()) {
    Marking m = std::move(stack.back());
    stack.pop_back();
    bool progress = false;
    for (int t = 0; t < (int)net.transitions.size(); ++t) {
      if (!is_enabled(net, m, t)) continue;
      progress = true;
      succ.words() = m.words();
      for (int p : net.transitions[(size_t)t].pre) succ.reset(p);
      for (int p : net.transitions[(size_t)t].post) succ.set(p);
      auto f = detail::fingerprint(succ.words());
      if (seen.insert(f.first, f.second)) stack.push_back(succ);
    }
    if (!progress && !(is_terminal && is_terminal(m))) return m;
  }
  return std::nullopt;
}

}  // namespace fcp2pn

#endif
