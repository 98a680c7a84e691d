// Reverse translations: safe Petri nets into FCPs.
//
// Three variants. Blocking: a transition thread consumes its preset tokens
// one by one and can get stuck halfway; faithful only after restricting to
// states where every transition thread is back at its head. Non-blocking:
// empty places can signal failure, so a transition returns the tokens it
// already took (in reverse order) and retries; weakly bisimilar to the net
// but with retry livelocks. Scheduling: a global scheduler hands out one
// "go" per round and resets every transition thread after a success; a
// failed transition stays blocked until reset, so when nothing can fire
// the scheduler blocks instead of spinning.
//
// All outputs use plain CCS-like capabilities: public channels only, a
// fixed dummy payload "eps", no parameters, no restriction, no tau.

#ifndef FCP2PN_PN2FCP_HPP
#define FCP2PN_PN2FCP_HPP

#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fcp2pn/bisim.hpp"
#include "fcp2pn/parser.hpp"
#include "fcp2pn/petri.hpp"
#include "fcp2pn/semantics.hpp"
#include "fcp2pn/validate.hpp"

namespace fcp2pn {

enum class ReverseVariant { Blocking, NonBlocking, Scheduling };

// The generated process plus the prefix occurrences that mark the point
// where a simulated firing takes effect (one per transition). A reaction
// of the FCP is considered visible iff one of its prefixes is a commit;
// every other communication is bookkeeping.
struct ReverseTranslation {
  FcpSpec spec;
  std::string source;             // the generated program text
  std::set<std::string> commits;  // prefix descriptors, see PiSystem::desc
};

namespace detail {

class ReverseBuilder {
 public:
  ReverseBuilder(const PetriNet& net, ReverseVariant var)
      : net_(net), var_(var) {
    for (const Transition& t : net.transitions)
      if (t.pre.empty() && t.post.empty())
        throw std::invalid_argument(
            "reverse translation: transition without arcs: " + t.name);
  }

  ReverseTranslation run() {
    for (size_t p = 0; p < net_.places.size(); ++p) place_eqs((int)p);
    for (size_t t = 0; t < net_.transitions.size(); ++t) tran_eqs((int)t);
    if (var_ == ReverseVariant::Scheduling) scheduler_eq();
    main_term();
    ReverseTranslation out;
    out.source = std::move(src_);
    out.spec = parse_fcp(out.source);
    out.commits = std::move(commits_);
    return out;
  }

 private:
  const PetriNet& net_;
  ReverseVariant var_;
  std::string src_;
  std::set<std::string> commits_;
  int binders_ = 0;

  std::string z() { return "z" + std::to_string(binders_++); }
  static std::string chan(int p) { return "p" + std::to_string(p); }
  static std::string fail_chan(int p) { return "px" + std::to_string(p); }
  static std::string id(const char* base, int t) {
    return std::string(base) + std::to_string(t);
  }

  void place_eqs(int p) {
    src_ += id("MARKED_P", p) + "() := " + chan(p) + "!<eps>." +
            id("EMPTY_P", p) + "()\n";
    src_ += id("EMPTY_P", p) + "() := " + chan(p) + "?(" + z() + ")." +
            id("MARKED_P", p) + "()";
    if (var_ != ReverseVariant::Blocking)
      src_ += " + " + fail_chan(p) + "!<eps>." + id("EMPTY_P", p) + "()";
    src_ += "\n";
  }

  void tran_eqs(int t) {
    const std::vector<int>& pre = net_.transitions[(size_t)t].pre;
    const std::vector<int>& post = net_.transitions[(size_t)t].post;
    if (var_ == ReverseVariant::Blocking) {
      std::vector<std::string> parts;
      for (int p : pre) parts.push_back(chan(p) + "?(" + z() + ")");
      for (int q : post) parts.push_back(chan(q) + "!<eps>");
      std::string tail = id("TRAN_T", t) + "()";
      for (auto it = parts.rbegin(); it != parts.rend(); ++it)
        tail = *it + "." + tail;
      src_ += id("TRAN_T", t) + "() := " + tail + "\n";
      commits_.insert(parts.back() + "." + id("TRAN_T", t) + "()");
      return;
    }
    int m = (int)pre.size(), n = (int)post.size();
    bool sched = var_ == ReverseVariant::Scheduling;
    std::string first = m > 0 ? id("TC_T", t) + "_1()" : id("PROD_T", t) + "()";
    if (sched) {
      src_ += id("TRAN_T", t) + "() := rst" + std::to_string(t) + "?(" + z() +
              ")." + id("TRAN_T", t) + "() + go?(" + z() + ")." + first + "\n";
    } else {
      src_ += id("TRAN_T", t) + "() := " + first + "\n";
    }
    for (int i = 1; i <= m; ++i) {
      std::string next = i < m ? id("TC_T", t) + "_" + std::to_string(i + 1) +
                                     "()"
                               : id("PROD_T", t) + "()";
      std::string take = chan(pre[(size_t)(i - 1)]) + "?(" + z() + ")." + next;
      src_ += id("TC_T", t) + "_" + std::to_string(i) + "() := " + take +
              " + " + fail_chan(pre[(size_t)(i - 1)]) + "?(" + z() + ")." +
              id("RET_T", t) + "_" + std::to_string(i - 1) + "()\n";
      if (i == m && n == 0 && !sched)
        commits_.insert(take);  // no produce to commit on, the last take is it
    }
    if (m > 0) {
      if (sched) {
        src_ += id("RET_T", t) + "_0() := failure!<eps>.rst" +
                std::to_string(t) + "?(" + z() + ")." + id("TRAN_T", t) +
                "()\n";
      } else {
        src_ += id("RET_T", t) + "_0() := " + id("TRAN_T", t) + "()\n";
      }
      for (int j = 1; j < m; ++j)
        src_ += id("RET_T", t) + "_" + std::to_string(j) + "() := " +
                chan(pre[(size_t)(j - 1)]) + "!<eps>." + id("RET_T", t) + "_" +
                std::to_string(j - 1) + "()\n";
    }
    std::string tail = id("TRAN_T", t) + "()";
    if (sched) {
      tail = "success!<eps>." + tail;
      commits_.insert(tail);
    }
    for (int j = n; j >= 1; --j)
      tail = chan(post[(size_t)(j - 1)]) + "!<eps>." + tail;
    if (!sched && n > 0)
      commits_.insert(chan(post[(size_t)(n - 1)]) + "!<eps>." +
                      id("TRAN_T", t) + "()");
    src_ += id("PROD_T", t) + "() := " + tail + "\n";
  }

  void scheduler_eq() {
    std::string resets = "SCHED()";
    for (int t = (int)net_.transitions.size() - 1; t >= 0; --t)
      resets = "rst" + std::to_string(t) + "!<eps>." + resets;
    src_ += "SCHED() := go!<eps>.(failure?(" + z() + ").SCHED() + success?(" +
            z() + ")." + resets + ")\n";
  }

  void main_term() {
    std::vector<std::string> threads;
    for (size_t p = 0; p < net_.places.size(); ++p)
      threads.push_back(
          (net_.initial.test((int)p) ? id("MARKED_P", (int)p)
                                     : id("EMPTY_P", (int)p)) +
          "()");
    for (size_t t = 0; t < net_.transitions.size(); ++t)
      threads.push_back(id("TRAN_T", (int)t) + "()");
    if (var_ == ReverseVariant::Scheduling) threads.push_back("SCHED()");
    if (threads.empty()) {
      src_ += "main = 0\n";
      return;
    }
    src_ += "main = ( ";
    for (size_t i = 0; i < threads.size(); ++i)
      src_ += (i ? " | " : "") + threads[i];
    src_ += " )\n";
  }
};

}  // namespace detail

inline ReverseTranslation translate_blocking(const PetriNet& net) {
  return detail::ReverseBuilder(net, ReverseVariant::Blocking).run();
}
inline ReverseTranslation translate_nonblocking(const PetriNet& net) {
  return detail::ReverseBuilder(net, ReverseVariant::NonBlocking).run();
}
inline ReverseTranslation translate_scheduling(const PetriNet& net) {
  return detail::ReverseBuilder(net, ReverseVariant::Scheduling).run();
}
inline ReverseTranslation translate_reverse(const PetriNet& net,
                                            ReverseVariant var) {
  return detail::ReverseBuilder(net, var).run();
}

// The FCP transition system with only the commit reactions marked visible.
struct ReverseLts {
  GenericLts lts;
  std::vector<StdForm> states;
};

inline ReverseLts build_reverse_lts(const PiSystem& sys,
                                    const std::set<std::string>& commits,
                                    size_t max_states) {
  ReverseLts out;
  out.states.push_back(sys.initial());
  std::map<StdForm, int> index{{out.states[0], 0}};
  std::set<std::tuple<int, bool, int>> eset;
  for (size_t i = 0; i < out.states.size(); ++i) {
    StdForm sf = out.states[i];
    for (const PiSystem::LabeledSucc& l : sys.reactions_labeled(sf)) {
      auto it = index.find(l.to);
      int to;
      if (it == index.end()) {
        to = (int)out.states.size();
        if ((size_t)to + 1 > max_states) throw StateLimitExceeded(max_states);
        out.states.push_back(l.to);
        index.emplace(l.to, to);
      } else {
        to = it->second;
      }
      bool obs = commits.count(l.send) || commits.count(l.recv);
      if (eset.insert({(int)i, obs, to}).second)
        out.lts.edges.push_back({(int)i, obs, to});
    }
  }
  out.lts.num_states = (int)out.states.size();
  out.lts.initial = 0;
  return out;
}

// Weak-bisimulation comparison of a reverse translation against the net's
// reachability graph (every firing visible).
inline BisimResult reverse_weak_check(const PetriNet& net,
                                      const ReverseTranslation& rt,
                                      size_t max_states) {
  PiSystem sys(validate_no_clash(rt.spec).spec);
  ReverseLts fl = build_reverse_lts(sys, rt.commits, max_states);
  ExploreResult er = explore(net, max_states);
  return weak_bisim(to_generic(er.lts), fl.lts);
}

// Structural check for the blocking variant: restrict the FCP transition
// system to states where every thread sits at a defining-equation head (a
// bare call), read the marking off the place threads, and require that
// this restriction, with one-commit paths as edges, is exactly the net's
// reachability graph.
inline bool blocking_matches_reachability(const PetriNet& net,
                                          size_t max_states) {
  ReverseTranslation rt = translate_blocking(net);
  PiSystem sys(validate_no_clash(rt.spec).spec);
  ReverseLts fl = build_reverse_lts(sys, rt.commits, max_states);

  int P = (int)net.places.size();
  auto at_head = [&](const StdForm& sf) {
    for (size_t th = 0; th < sf.threads.size(); ++th) {
      const Skeleton& sk = sys.skeletons()[th];
      if (sk.states[(size_t)sf.threads[th].state].node->kind != SeqTerm::Call)
        return false;
    }
    return true;
  };
  auto extract = [&](const StdForm& sf) {
    Marking m((size_t)P);
    for (int p = 0; p < P; ++p) {
      const Skeleton& sk = sys.skeletons()[(size_t)p];
      const SeqTerm* node = sk.states[(size_t)sf.threads[(size_t)p].state].node;
      if (node->callee.rfind("MARKED_", 0) == 0) m.set(p);
    }
    return m;
  };

  ExploreResult er = explore(net, max_states);
  if (!er.safe()) return false;

  // several head states may share a marking (pending receive binders are
  // drained lazily); everything below is keyed by the extracted marking
  std::map<int, Marking> head_marking;
  std::set<Marking> seen;
  for (size_t i = 0; i < fl.states.size(); ++i)
    if (at_head(fl.states[i])) {
      Marking m = extract(fl.states[i]);
      if (er.lts.index.find(m) == er.lts.index.end()) return false;
      seen.insert(m);
      head_marking.emplace((int)i, std::move(m));
    }
  if (seen.size() != er.lts.states.size()) return false;
  if (!head_marking.count(fl.lts.initial)) return false;
  if (!(head_marking.at(fl.lts.initial) == er.lts.states[(size_t)er.lts.initial]))
    return false;

  // edges: paths between head states that contain exactly one commit
  std::vector<std::vector<std::pair<bool, int>>> out(fl.states.size());
  for (const auto& e : fl.lts.edges)
    out[(size_t)e.src].push_back({e.observable, e.dst});
  std::set<std::pair<int, int>> fcp_edges;
  for (const auto& [start, sm] : head_marking) {
    std::set<std::pair<int, int>> visited;  // (state, commits so far)
    std::vector<std::pair<int, int>> stack{{start, 0}};
    visited.insert({start, 0});
    int from = er.lts.index.at(sm);
    while (!stack.empty()) {
      auto [s, nc] = stack.back();
      stack.pop_back();
      for (const auto& [obs, d] : out[(size_t)s]) {
        int nc2 = nc + (obs ? 1 : 0);
        if (nc2 > 1 || !visited.insert({d, nc2}).second) continue;
        auto hm = head_marking.find(d);
        if (hm != head_marking.end()) {
          if (nc2 == 1) fcp_edges.insert({from, er.lts.index.at(hm->second)});
          continue;  // do not chain across another head state
        }
        stack.push_back({d, nc2});
      }
    }
  }
  std::set<std::pair<int, int>> net_edges;
  for (const auto& e : er.lts.edges) net_edges.insert({e.from, e.to});
  return fcp_edges == net_edges;
}

// Seeded generator of small safe nets (resamples until exploration finds
// no one-boundedness violation).
inline PetriNet random_safe_net(std::mt19937& rng, int max_places = 6,
                                int max_transitions = 5,
                                size_t explore_cap = 20000) {
  for (;;) {
    PetriNet net;
    int P = 1 + (int)(rng() % (unsigned)max_places);
    int T = 1 + (int)(rng() % (unsigned)max_transitions);
    for (int p = 0; p < P; ++p) {
      Place pl;
      pl.name = "s" + std::to_string(p);
      net.add_place(pl);
    }
    Marking m0((size_t)P);
    for (int p = 0; p < P; ++p)
      if (rng() % 2) m0.set(p);
    net.initial = m0;
    for (int t = 0; t < T; ++t) {
      Transition tr;
      tr.name = "t" + std::to_string(t);
      tr.observable = true;
      int npre = (int)(rng() % 3), npost = (int)(rng() % 3);
      if (npre + npost == 0) npre = 1;
      for (int i = 0; i < npre; ++i) tr.pre.push_back((int)(rng() % (unsigned)P));
      for (int i = 0; i < npost; ++i)
        tr.post.push_back((int)(rng() % (unsigned)P));
      net.add_transition(tr);
    }
    ExploreResult er = explore(net, explore_cap);
    if (er.safe()) return net;
  }
}

}  // namespace fcp2pn

#endif
