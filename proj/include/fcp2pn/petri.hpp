// Safe low-level Petri nets: firing semantics, reachability with safety
// reporting, deadlock analysis, and the stable-marking transition system.
//
// Markings use set semantics (a place is marked or not). The nets we build
// are supposed to be 1-bounded; a firing that would put a second token on a
// place is detected and reported with a witness path, not represented.
// Read arcs are consume+produce loops.

#ifndef FCP2PN_PETRI_HPP
#define FCP2PN_PETRI_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace fcp2pn {

struct NotEnabled : std::runtime_error {
  explicit NotEnabled(const std::string& t)
      : std::runtime_error("transition not enabled: " + t) {}
};

struct StateLimitExceeded : std::runtime_error {
  explicit StateLimitExceeded(size_t limit)
      : std::runtime_error("state limit exceeded: " +
                           std::to_string(limit)) {}
};

struct Place {
  enum Role { Control, Subst, Aux };
  Role role = Aux;
  std::string name;      // unique, printable (exports key on it)
  int thread = -1;       // Control places: owning thread
  bool stable = false;   // Control places: a reaction may end here
};

struct Transition {
  std::string name;
  std::vector<int> pre, post;  // place indices, kept sorted and unique
  bool observable = false;     // reaction transition (tau, sync, body jump)
  std::string note;            // provenance, free-form (DOT tooltips)
};

// Fixed-width bitset over place indices.
class Marking {
 public:
  Marking() = default;
  explicit Marking(size_t nplaces) : w_((nplaces + 63) / 64, 0) {}

  bool test(int p) const { return (w_[(size_t)p >> 6] >> (p & 63)) & 1u; }
  void set(int p) { w_[(size_t)p >> 6] |= (uint64_t)1 << (p & 63); }
  void reset(int p) { w_[(size_t)p >> 6] &= ~((uint64_t)1 << (p & 63)); }

  std::vector<int> marked() const {
    std::vector<int> out;
    for (size_t i = 0; i < w_.size(); ++i)
      for (uint64_t m = w_[i]; m; m &= m - 1) {
#if defined(__GNUC__)
        out.push_back((int)(i * 64) + __builtin_ctzll(m));
#else
        uint64_t low = m & (~m + 1);
        int b = 0;
        while (!((low >> b) & 1)) ++b;
        out.push_back((int)(i * 64) + b);
#endif
      }
    return out;
  }

  size_t count() const {
    size_t n = 0;
    for (uint64_t w : w_)
#if defined(__GNUC__)
      n += (size_t)__builtin_popcountll(w);
#else
      for (; w; w &= w - 1) ++n;
#endif
    return n;
  }

  // raw word access, for bulk packing in large sweeps
  const std::vector<uint64_t>& words() const { return w_; }
  std::vector<uint64_t>& words() { return w_; }

  friend bool operator==(const Marking& a, const Marking& b) {
    return a.w_ == b.w_;
  }
  friend bool operator<(const Marking& a, const Marking& b) {
    return a.w_ < b.w_;
  }

 private:
  std::vector<uint64_t> w_;
};

struct PetriNet {
  std::vector<Place> places;
  std::vector<Transition> transitions;
  Marking initial;

  int add_place(Place p) {
    places.push_back(std::move(p));
    return (int)places.size() - 1;
  }

  int add_transition(Transition t) {
    auto dedupe = [](std::vector<int>& v) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    dedupe(t.pre);
    dedupe(t.post);
    transitions.push_back(std::move(t));
    return (int)transitions.size() - 1;
  }

  size_t arc_count() const {
    size_t f = 0;
    for (const auto& t : transitions) f += t.pre.size() + t.post.size();
    return f;
  }

  // |N| = |P| + |T| + |F| + |M0|
  size_t size() const {
    return places.size() + transitions.size() + arc_count() +
           initial.count();
  }

  Marking empty_marking() const { return Marking(places.size()); }
};

inline bool is_enabled(const PetriNet& net, const Marking& m, int t) {
  for (int p : net.transitions[(size_t)t].pre)
    if (!m.test(p)) return false;
  return true;
}

inline std::vector<int> enabled(const PetriNet& net, const Marking& m) {
  std::vector<int> out;
  for (int t = 0; t < (int)net.transitions.size(); ++t)
    if (is_enabled(net, m, t)) out.push_back(t);
  return out;
}

// Fires t: M' = (M minus pre) union post. With set semantics a produce onto
// an already marked place silently stays a single token; explore() is the
// layer that reports that as a safety violation.
inline Marking fire(const PetriNet& net, const Marking& m, int t) {
  if (!is_enabled(net, m, t))
    throw NotEnabled(net.transitions[(size_t)t].name);
  Marking out = m;
  const Transition& tr = net.transitions[(size_t)t];
  for (int p : tr.pre) out.reset(p);
  for (int p : tr.post) out.set(p);
  return out;
}

// True when firing t from m would place a token on an already marked place
// that t does not consume (loops are fine).
inline bool violates_safety(const PetriNet& net, const Marking& m, int t,
                            int* place = nullptr) {
  const Transition& tr = net.transitions[(size_t)t];
  for (int p : tr.post) {
    if (!m.test(p)) continue;
    if (std::binary_search(tr.pre.begin(), tr.pre.end(), p)) continue;
    if (place) *place = p;
    return true;
  }
  return false;
}

struct NetLts {
  std::vector<Marking> states;
  std::map<Marking, int> index;
  struct Edge {
    int from, transition, to;
  };
  std::vector<Edge> edges;
  int initial = 0;

  int intern(const Marking& m) {
    auto it = index.find(m);
    if (it != index.end()) return it->second;
    int id = (int)states.size();
    states.push_back(m);
    index.emplace(m, id);
    return id;
  }
};

struct SafetyViolation {
  int state;              // LTS state the bad firing leaves from
  int transition;
  int place;              // doubly marked place
  std::vector<int> path;  // transitions from the initial marking to state
};

struct ExploreResult {
  NetLts lts;
  std::vector<SafetyViolation> violations;
  bool safe() const { return violations.empty(); }
};

inline ExploreResult explore(const PetriNet& net, size_t max_states) {
  ExploreResult res;
  NetLts& lts = res.lts;
  std::vector<std::pair<int, int>> parent;  // (state, transition), -1 at root
  lts.intern(net.initial);
  parent.push_back({-1, -1});
  for (size_t i = 0; i < lts.states.size(); ++i) {
    Marking m = lts.states[i];  // copy: states vector grows
    for (int t = 0; t < (int)net.transitions.size(); ++t) {
      if (!is_enabled(net, m, t)) continue;
      int bad;
      if (violates_safety(net, m, t, &bad)) {
        std::vector<int> path;
        for (int s = (int)i; parent[(size_t)s].second >= 0;
             s = parent[(size_t)s].first)
          path.push_back(parent[(size_t)s].second);
        std::reverse(path.begin(), path.end());
        res.violations.push_back(SafetyViolation{(int)i, t, bad, path});
      }
      Marking next = fire(net, m, t);
      size_t before = lts.states.size();
      int to = lts.intern(next);
      if (lts.states.size() > before) {
        if (lts.states.size() > max_states)
          throw StateLimitExceeded(max_states);
        parent.push_back({(int)i, t});
      }
      lts.edges.push_back(NetLts::Edge{(int)i, t, to});
    }
  }
  return res;
}

// Dead markings. A marking whose only enabled transitions belong to
// success_loops is proper termination, not a deadlock.
inline std::vector<Marking> find_deadlocks(const PetriNet& net,
                                           size_t max_states,
                                           const std::set<int>& success_loops =
                                               {}) {
  std::vector<Marking> dead;
  NetLts lts;
  lts.intern(net.initial);
  for (size_t i = 0; i < lts.states.size(); ++i) {
    Marking m = lts.states[i];
    bool progress = false, terminating = false;
    for (int t = 0; t < (int)net.transitions.size(); ++t) {
      if (!is_enabled(net, m, t)) continue;
      if (success_loops.count(t)) {
        terminating = true;
        continue;  // success loops preserve the marking by construction
      }
      progress = true;
      size_t before = lts.states.size();
      lts.intern(fire(net, m, t));
      if (lts.states.size() > before && lts.states.size() > max_states)
        throw StateLimitExceeded(max_states);
    }
    if (!progress && !terminating) dead.push_back(m);
  }
  return dead;
}

// ---------------------------------------------------------------------------
// Stable-marking transition system.
//
// A marking is stable when no unstable control place is marked. An edge
// M => M' exists when a firing sequence leads from M to M' such that no
// intermediate marking is stable and exactly one fired transition is
// observable (the race-free step relation); the edge carries that
// observable transition. A stable marking reached with zero observable
// firings has no pi counterpart: such arrivals are recorded with
// transition -1 so that a bisimulation check fails loudly instead of
// silently dropping reachable behaviour.

struct UnstableInitial : std::runtime_error {
  UnstableInitial() : std::runtime_error("initial marking is not stable") {}
};

inline NetLts stable_lts(const PetriNet& net, size_t max_states) {
  // unstable: any non-substitution place not flagged stable (this covers
  // mid-reaction control states and the middle places of split syncs)
  std::vector<int> unstable;
  for (int p = 0; p < (int)net.places.size(); ++p)
    if (net.places[(size_t)p].role != Place::Subst &&
        !net.places[(size_t)p].stable)
      unstable.push_back(p);
  auto is_stable = [&](const Marking& m) {
    for (int p : unstable)
      if (m.test(p)) return false;
    return true;
  };
  if (!is_stable(net.initial)) throw UnstableInitial();

  NetLts lts;
  lts.intern(net.initial);
  for (size_t i = 0; i < lts.states.size(); ++i) {
    Marking src = lts.states[i];
    // micro search over (marking, observable fired yet, which one)
    std::map<std::pair<Marking, int>, int> seen;  // value: observable id
    std::vector<std::pair<Marking, int>> frontier;
    seen.emplace(std::make_pair(src, -1), -1);
    frontier.push_back({src, -1});
    std::set<std::pair<int, int>> emitted;  // (transition, target state)
    for (size_t f = 0; f < frontier.size(); ++f) {
      auto [m, obs] = frontier[f];
      for (int t = 0; t < (int)net.transitions.size(); ++t) {
        if (!is_enabled(net, m, t)) continue;
        bool o = net.transitions[(size_t)t].observable;
        if (o && obs >= 0) continue;  // at most one observable per step
        int obs2 = o ? t : obs;
        Marking next = fire(net, m, t);
        if (is_stable(next)) {
          size_t before = lts.states.size();
          int to = lts.intern(next);
          if (lts.states.size() > before && lts.states.size() > max_states)
            throw StateLimitExceeded(max_states);
          if (emitted.insert({obs2, to}).second)
            lts.edges.push_back(NetLts::Edge{(int)i, obs2, to});
          continue;
        }
        auto key = std::make_pair(std::move(next), obs2);
        if (seen.emplace(key, obs2).second) frontier.push_back(key);
      }
    }
  }
  return lts;
}

// ---------------------------------------------------------------------------
// Substitution marking invariants for translated nets.

struct SmConstraints {
  // One group per fresh value n: the [r=n] places over all restricted rows r
  // plus the reference-counter place [r*!=n]; exactly one of them is marked.
  struct RestGroup {
    std::vector<int> eq_places;
    int star_place;
  };
  std::vector<RestGroup> rest;

  // One group per substitution row x: all [x=a] places; at most one marked.
  std::vector<std::vector<int>> bind;

  // One pair per (input/formal row x, fresh value n): [x=n] and [x!=n] are
  // complementary.
  struct ComplPair {
    int eq, neq;
  };
  std::vector<ComplPair> complement;
};

inline bool check_sm(const Marking& m, const SmConstraints& sm,
                     std::string* why = nullptr) {
  for (size_t g = 0; g < sm.rest.size(); ++g) {
    int sum = m.test(sm.rest[g].star_place) ? 1 : 0;
    for (int p : sm.rest[g].eq_places) sum += m.test(p) ? 1 : 0;
    if (sum != 1) {
      if (why) *why = "restriction group " + std::to_string(g);
      return false;
    }
  }
  for (size_t g = 0; g < sm.bind.size(); ++g) {
    int sum = 0;
    for (int p : sm.bind[g]) sum += m.test(p) ? 1 : 0;
    if (sum > 1) {
      if (why) *why = "binding row " + std::to_string(g);
      return false;
    }
  }
  for (size_t g = 0; g < sm.complement.size(); ++g) {
    int sum = (m.test(sm.complement[g].eq) ? 1 : 0) +
              (m.test(sm.complement[g].neq) ? 1 : 0);
    if (sum != 1) {
      if (why) *why = "complement pair " + std::to_string(g);
      return false;
    }
  }
  return true;
}

// Translated nets keep exactly one control token per thread.
inline bool check_one_control_per_thread(const PetriNet& net,
                                         const Marking& m) {
  std::map<int, int> per_thread;
  for (int p = 0; p < (int)net.places.size(); ++p)
    if (net.places[(size_t)p].role == Place::Control && m.test(p))
      ++per_thread[net.places[(size_t)p].thread];
  for (const auto& [th, n] : per_thread)
    if (n != 1) return false;
  // a thread with zero tokens never shows up in the map; count threads
  std::set<int> threads;
  for (const auto& pl : net.places)
    if (pl.role == Place::Control) threads.insert(pl.thread);
  return per_thread.size() == threads.size();
}

}  // namespace fcp2pn

#endif
