// Strong and weak bisimulation checking over finite transition systems.
//
// The reaction semantics is unlabeled, so the strong check treats every
// edge uniformly. The weak check saturates internal steps (tau* obs tau*
// for observable moves, reflexive tau* for silent ones) and then runs the
// strong partition refinement on the saturated systems.

#ifndef FCP2PN_BISIM_HPP
#define FCP2PN_BISIM_HPP

#include <map>
#include <set>
#include <vector>

#include "fcp2pn/petri.hpp"
#include "fcp2pn/semantics.hpp"

namespace fcp2pn {

struct GenericLts {
  int num_states = 0;
  int initial = 0;
  struct Edge {
    int src;
    bool observable;
    int dst;
  };
  std::vector<Edge> edges;
};

inline GenericLts to_generic(const PiLts& lts) {
  GenericLts g;
  g.num_states = (int)lts.states.size();
  g.initial = lts.initial;
  for (const auto& [a, b] : lts.edges) g.edges.push_back({a, true, b});
  return g;
}

// Without a net, every edge counts as observable (e.g. a stable-step
// system); with one, observability comes from the fired transition.
inline GenericLts to_generic(const NetLts& lts, const PetriNet* net = nullptr) {
  GenericLts g;
  g.num_states = (int)lts.states.size();
  g.initial = lts.initial;
  for (const auto& e : lts.edges) {
    bool obs = true;
    if (net && e.transition >= 0)
      obs = net->transitions[(size_t)e.transition].observable;
    g.edges.push_back({e.from, obs, e.to});
  }
  return g;
}

struct BisimResult {
  bool equivalent = false;
  int depth = -1;  // refinement round where the initials split
  // certificate: block ids per state of each system (same numbering)
  std::vector<int> block1, block2;
};

namespace detail {

// Partition refinement over the disjoint union; labels are edge kinds
// (collapsed to one for the strong/unlabeled case).
inline BisimResult refine(const GenericLts& a, const GenericLts& b,
                          bool labeled) {
  int n = a.num_states + b.num_states;
  std::vector<std::vector<std::pair<int, int>>> succ((size_t)n);  // (label, dst)
  auto add = [&](const GenericLts& l, int off) {
    for (const auto& e : l.edges)
      succ[(size_t)(e.src + off)].push_back(
          {labeled && !e.observable ? 1 : 0, e.dst + off});
  };
  add(a, 0);
  add(b, a.num_states);
  std::vector<int> block((size_t)n, 0);
  int blocks = 1, round = 0, split_round = -1;
  for (;;) {
    ++round;
    std::map<std::pair<int, std::set<std::pair<int, int>>>, int> sig;
    std::vector<int> next((size_t)n);
    for (int s = 0; s < n; ++s) {
      std::set<std::pair<int, int>> moves;
      for (const auto& [lab, d] : succ[(size_t)s])
        moves.insert({lab, block[(size_t)d]});
      auto key = std::make_pair(block[(size_t)s], std::move(moves));
      auto [it, fresh] = sig.emplace(std::move(key), (int)sig.size());
      next[(size_t)s] = it->second;
    }
    bool initials_apart =
        next[(size_t)a.initial] != next[(size_t)(b.initial + a.num_states)];
    if (initials_apart && split_round < 0) split_round = round;
    if ((int)sig.size() == blocks) {
      BisimResult r;
      r.equivalent = !initials_apart && block[(size_t)a.initial] ==
                                            block[(size_t)(b.initial +
                                                           a.num_states)];
      r.depth = r.equivalent ? -1 : (split_round < 0 ? round : split_round);
      r.block1.assign(block.begin(), block.begin() + a.num_states);
      r.block2.assign(block.begin() + a.num_states, block.end());
      return r;
    }
    blocks = (int)sig.size();
    block = std::move(next);
  }
}

}  // namespace detail

inline BisimResult strong_bisim(const GenericLts& a, const GenericLts& b) {
  return detail::refine(a, b, false);
}

// tau* closure; observable edges become tau* obs tau*, silent moves the
// reflexive closure itself.
inline GenericLts saturate(const GenericLts& l, size_t max_edges = 50000000) {
  std::vector<std::vector<int>> tau((size_t)l.num_states);
  std::vector<std::vector<std::pair<int, bool>>> out((size_t)l.num_states);
  for (const auto& e : l.edges) {
    out[(size_t)e.src].push_back({e.dst, e.observable});
    if (!e.observable) tau[(size_t)e.src].push_back(e.dst);
  }
  // closure[s] = all states reachable from s by internal edges
  std::vector<std::vector<int>> closure((size_t)l.num_states);
  for (int s = 0; s < l.num_states; ++s) {
    std::set<int> seen{s};
    std::vector<int> stack{s};
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      for (int y : tau[(size_t)x])
        if (seen.insert(y).second) stack.push_back(y);
    }
    closure[s].assign(seen.begin(), seen.end());
  }
  GenericLts g;
  g.num_states = l.num_states;
  g.initial = l.initial;
  std::set<std::pair<int, int>> weak_obs, weak_eps;
  for (int s = 0; s < l.num_states; ++s) {
    for (int m : closure[(size_t)s]) {
      weak_eps.insert({s, m});
      for (const auto& [d, obs] : out[(size_t)m]) {
        if (!obs) continue;
        for (int t : closure[(size_t)d]) weak_obs.insert({s, t});
      }
    }
    if (weak_obs.size() + weak_eps.size() > max_edges)
      throw StateLimitExceeded(max_edges);
  }
  for (const auto& [s, t] : weak_obs) g.edges.push_back({s, true, t});
  for (const auto& [s, t] : weak_eps) g.edges.push_back({s, false, t});
  return g;
}

namespace detail {

// Tarjan over the internal edges; emits components sinks-first, so comp
// ids ascend in reverse topological order of the condensation.
inline std::pair<std::vector<int>, int> tau_sccs(
    int n, const std::vector<std::vector<int>>& tau) {
  std::vector<int> comp((size_t)n, -1), low((size_t)n), idx((size_t)n, -1);
  std::vector<int> stk;
  std::vector<char> onstk((size_t)n, 0);
  int at = 0, ncomp = 0;
  struct Frame {
    int v;
    size_t next;
  };
  for (int root = 0; root < n; ++root) {
    if (idx[(size_t)root] >= 0) continue;
    std::vector<Frame> call{{root, 0}};
    idx[(size_t)root] = low[(size_t)root] = at++;
    stk.push_back(root);
    onstk[(size_t)root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.next < tau[(size_t)f.v].size()) {
        int w = tau[(size_t)f.v][f.next++];
        if (idx[(size_t)w] < 0) {
          idx[(size_t)w] = low[(size_t)w] = at++;
          stk.push_back(w);
          onstk[(size_t)w] = 1;
          call.push_back({w, 0});
        } else if (onstk[(size_t)w]) {
          low[(size_t)f.v] = std::min(low[(size_t)f.v], idx[(size_t)w]);
        }
      } else {
        int v = f.v;
        call.pop_back();
        if (!call.empty())
          low[(size_t)call.back().v] =
              std::min(low[(size_t)call.back().v], low[(size_t)v]);
        if (low[(size_t)v] == idx[(size_t)v]) {
          for (;;) {
            int w = stk.back();
            stk.pop_back();
            onstk[(size_t)w] = 0;
            comp[(size_t)w] = ncomp;
            if (w == v) break;
          }
          ++ncomp;
        }
      }
    }
  }
  return {comp, ncomp};
}

inline void merge_into(std::vector<int>& dst, const std::vector<int>& src) {
  std::vector<int> out;
  out.reserve(dst.size() + src.size());
  std::merge(dst.begin(), dst.end(), src.begin(), src.end(),
             std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  dst = std::move(out);
}

// Weak refinement without materializing the saturated edge relation:
// per round, propagate block sets through the internal-step condensation.
inline BisimResult weak_refine(const GenericLts& a, const GenericLts& b) {
  int n = a.num_states + b.num_states;
  std::vector<std::vector<int>> tau((size_t)n);
  std::vector<std::vector<int>> obsdst((size_t)n);
  auto add = [&](const GenericLts& l, int off) {
    for (const auto& e : l.edges) {
      if (e.observable)
        obsdst[(size_t)(e.src + off)].push_back(e.dst + off);
      else
        tau[(size_t)(e.src + off)].push_back(e.dst + off);
    }
  };
  add(a, 0);
  add(b, a.num_states);
  auto [comp, ncomp] = tau_sccs(n, tau);
  std::vector<std::vector<int>> members((size_t)ncomp), csucc((size_t)ncomp);
  for (int s = 0; s < n; ++s) members[(size_t)comp[(size_t)s]].push_back(s);
  for (int s = 0; s < n; ++s)
    for (int t : tau[(size_t)s])
      if (comp[(size_t)s] != comp[(size_t)t])
        csucc[(size_t)comp[(size_t)s]].push_back(comp[(size_t)t]);
  for (auto& v : csucc) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }

  std::vector<int> block((size_t)n, 0);
  int blocks = 1, round = 0, split_round = -1;
  for (;;) {
    ++round;
    // blocks reachable by internal steps alone (reflexive)
    std::vector<std::vector<int>> eps((size_t)ncomp), wobs((size_t)ncomp);
    for (int c = 0; c < ncomp; ++c) {
      std::vector<int> own;
      for (int s : members[(size_t)c]) own.push_back(block[(size_t)s]);
      std::sort(own.begin(), own.end());
      own.erase(std::unique(own.begin(), own.end()), own.end());
      eps[(size_t)c] = std::move(own);
      for (int d : csucc[(size_t)c]) merge_into(eps[(size_t)c], eps[(size_t)d]);
    }
    // blocks reachable by internal* observable internal*
    for (int c = 0; c < ncomp; ++c) {
      for (int d : csucc[(size_t)c]) merge_into(wobs[(size_t)c], wobs[(size_t)d]);
      for (int s : members[(size_t)c])
        for (int d : obsdst[(size_t)s])
          merge_into(wobs[(size_t)c], eps[(size_t)comp[(size_t)d]]);
    }
    std::map<std::tuple<int, std::vector<int>, std::vector<int>>, int> sig;
    std::vector<int> next((size_t)n);
    for (int s = 0; s < n; ++s) {
      auto key = std::make_tuple(block[(size_t)s], eps[(size_t)comp[(size_t)s]],
                                 wobs[(size_t)comp[(size_t)s]]);
      auto [it, fresh] = sig.emplace(std::move(key), (int)sig.size());
      next[(size_t)s] = it->second;
    }
    bool initials_apart =
        next[(size_t)a.initial] != next[(size_t)(b.initial + a.num_states)];
    if (initials_apart && split_round < 0) split_round = round;
    if ((int)sig.size() == blocks) {
      BisimResult r;
      r.equivalent = !initials_apart && block[(size_t)a.initial] ==
                                            block[(size_t)(b.initial +
                                                           a.num_states)];
      r.depth = r.equivalent ? -1 : (split_round < 0 ? round : split_round);
      r.block1.assign(block.begin(), block.begin() + a.num_states);
      r.block2.assign(block.begin() + a.num_states, block.end());
      return r;
    }
    blocks = (int)sig.size();
    block = std::move(next);
  }
}

}  // namespace detail

inline BisimResult weak_bisim(const GenericLts& a, const GenericLts& b,
                              size_t = 0) {
  return detail::weak_refine(a, b);
}

// Direct transfer-property check of a reported equivalence (desk scale):
// states in one block must mirror each other's moves blockwise.
inline bool check_strong_certificate(const GenericLts& a, const GenericLts& b,
                                     const BisimResult& r) {
  if (!r.equivalent) return false;
  std::map<int, std::vector<std::pair<const GenericLts*, int>>> members;
  for (int s = 0; s < a.num_states; ++s)
    members[r.block1[(size_t)s]].push_back({&a, s});
  for (int s = 0; s < b.num_states; ++s)
    members[r.block2[(size_t)s]].push_back({&b, s});
  auto moves = [&](const GenericLts* l, int s) {
    std::set<int> m;
    const std::vector<int>& blk = l == &a ? r.block1 : r.block2;
    for (const auto& e : l->edges)
      if (e.src == s) m.insert(blk[(size_t)e.dst]);
    return m;
  };
  for (const auto& [blk, mem] : members) {
    std::set<int> first = moves(mem[0].first, mem[0].second);
    for (size_t i = 1; i < mem.size(); ++i)
      if (moves(mem[i].first, mem[i].second) != first) return false;
  }
  return true;
}

}  // namespace fcp2pn

#endif
