// Reference interpreter. States are canonical standard forms
// new r~.(S1 s1 | ... | Sn sn): every thread sits at a stable point of its
// control skeleton (a choice or a call with the full parameter list) and
// carries a substitution over its nonpublic free names and pending queue.
// Restricted names live in a shared pool of indices, renumbered by first
// use in thread order so that structurally congruent processes get equal
// encodings. Reactions are computed directly from the skeleton: an
// observable move (tau prefix, communication, or call-body transfer)
// followed by the deterministic internal steps (restriction allocation,
// guard evaluation, parameter maps and unmaps) up to the next stable point.

#ifndef FCP2PN_SEMANTICS_HPP
#define FCP2PN_SEMANTICS_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fcp2pn/ast.hpp"
#include "fcp2pn/control.hpp"
#include "fcp2pn/petri.hpp"  // StateLimitExceeded

namespace fcp2pn {

// A value: a public name or an index into the restricted pool.
struct PiVal {
  bool restr = false;
  int id = -1;
  auto operator<=>(const PiVal&) const = default;
};

struct PiThread {
  int state = -1;                   // skeleton state (always stable)
  std::map<NameId, PiVal> sigma;    // nonpublic free names and queue entries
  auto operator<=>(const PiThread&) const = default;
};

struct StdForm {
  std::vector<PiThread> threads;
  int pool = 0;  // number of live restricted indices, 0..pool-1
  auto operator<=>(const StdForm&) const = default;
};

class PiSystem {
 public:
  explicit PiSystem(FcpSpec spec) : spec_(std::move(spec)) {
    for (const auto& th : spec_.threads)
      skeletons_.push_back(build_skeleton(spec_, th));
    // distinct but structurally equal subterms (e.g. two "0" leaves) must
    // not yield distinct states; canonize by printed term, position, queue
    for (const Skeleton& sk : skeletons_) {
      std::map<std::tuple<std::string, int, std::vector<NameId>>, int> seen;
      std::vector<int> canon(sk.states.size());
      for (size_t s = 0; s < sk.states.size(); ++s) {
        const SkelState& st = sk.states[s];
        TermPtr alias(std::shared_ptr<const SeqTerm>(), st.node);
        auto key = std::make_tuple(print_term(spec_, alias), st.pos,
                                   st.lambda);
        auto [it, fresh] = seen.emplace(std::move(key), (int)s);
        canon[s] = it->second;
      }
      canon_.push_back(std::move(canon));
    }
  }

  const FcpSpec& spec() const { return spec_; }
  const std::vector<Skeleton>& skeletons() const { return skeletons_; }

  StdForm initial() const {
    StdForm sf;
    std::map<NameId, PiVal> outer;
    for (size_t i = 0; i < spec_.outer_restrictions.size(); ++i)
      outer[spec_.outer_restrictions[i]] = PiVal{true, (int)i};
    sf.pool = (int)spec_.outer_restrictions.size();
    for (size_t th = 0; th < skeletons_.size(); ++th) {
      PiThread t;
      t.state = canon_[th][(size_t)skeletons_[th].entry];
      for (NameId n : skeletons_[th].mapped_at(spec_, t.state)) {
        auto it = outer.find(n);
        if (it == outer.end())
          throw std::runtime_error("initial thread holds unbound name " +
                                   spec_.text(n));
        t.sigma[n] = it->second;
      }
      sf.threads.push_back(std::move(t));
    }
    // settle threads whose entry point is not yet stable
    for (size_t th = 0; th < sf.threads.size(); ++th)
      if (!skeletons_[th].states[(size_t)sf.threads[th].state].stable) {
        if (!complete(sf, (int)th, false))
          throw std::runtime_error("initial state wedges before stability");
      }
    canonicalize(sf);
    return sf;
  }

  // A successor together with syntactic descriptors of the prefixes that
  // reacted (send side and receive side for a communication; only the
  // first slot for a tau or a constant unfolding). The descriptors let a
  // caller single out particular prefix occurrences, e.g. to designate
  // some of them as the visible ones.
  struct LabeledSucc {
    StdForm to;
    std::string send, recv;
    auto operator<=>(const LabeledSucc&) const = default;
  };

  std::vector<LabeledSucc> reactions_labeled(const StdForm& sf) const {
    std::set<LabeledSucc> out;
    struct Comm {
      int thread, edge;
      PiVal chan;
    };
    std::vector<Comm> sends, recvs;
    for (size_t th = 0; th < sf.threads.size(); ++th) {
      const Skeleton& sk = skeletons_[th];
      const SkelState& st = sk.states[(size_t)sf.threads[th].state];
      if (st.node->kind == SeqTerm::Choice) {
        for (int ei : st.out) {
          const SkelEdge& e = sk.edges[(size_t)ei];
          if (e.kind == SkelEdge::TauPre) {
            StdForm next = sf;
            next.threads[th].state = canon_[th][(size_t)e.to];
            restrict_sigma(next.threads[th], sk);
            if (complete(next, (int)th, false))
              keep(out, std::move(next), desc((int)th, e), "");
          } else if (e.kind == SkelEdge::SendPre) {
            sends.push_back(
                Comm{(int)th, ei, value(sf.threads[th], e.pre.chan)});
          } else if (e.kind == SkelEdge::RecvPre) {
            recvs.push_back(
                Comm{(int)th, ei, value(sf.threads[th], e.pre.chan)});
          }
        }
      } else if (st.node->kind == SeqTerm::Call) {
        // constant unfolding: the body transfer is the observable move
        StdForm next = sf;
        if (complete(next, (int)th, true)) {
          TermPtr alias(std::shared_ptr<const SeqTerm>(), st.node);
          keep(out, std::move(next), "unfold " + print_term(spec_, alias), "");
        }
      }
    }
    for (const Comm& s : sends)
      for (const Comm& r : recvs) {
        if (s.thread == r.thread || !(s.chan == r.chan)) continue;
        const SkelEdge& se = skeletons_[s.thread].edges[(size_t)s.edge];
        const SkelEdge& re = skeletons_[r.thread].edges[(size_t)r.edge];
        StdForm next = sf;
        PiVal payload = value(next.threads[s.thread], se.pre.names[0]);
        next.threads[s.thread].state = canon_[(size_t)s.thread][(size_t)se.to];
        restrict_sigma(next.threads[s.thread], skeletons_[s.thread]);
        next.threads[r.thread].state = canon_[(size_t)r.thread][(size_t)re.to];
        next.threads[r.thread].sigma[re.pre.names[0]] = payload;
        restrict_sigma(next.threads[r.thread], skeletons_[r.thread]);
        if (!complete(next, s.thread, false)) continue;
        if (!complete(next, r.thread, false)) continue;
        keep(out, std::move(next), desc(s.thread, se), desc(r.thread, re));
      }
    return std::vector<LabeledSucc>(out.begin(), out.end());
  }

  // All successors under one reaction, canonicalized and deduplicated.
  std::vector<StdForm> reactions(const StdForm& sf) const {
    std::set<StdForm> out;
    for (LabeledSucc& l : reactions_labeled(sf)) out.insert(std::move(l.to));
    return std::vector<StdForm>(out.begin(), out.end());
  }

  // dom(sigma) must equal the nonpublic mapped set of the control state
  bool check_dom(const StdForm& sf) const {
    for (size_t th = 0; th < sf.threads.size(); ++th) {
      std::set<NameId> need =
          skeletons_[th].mapped_at(spec_, sf.threads[th].state);
      if (sf.threads[th].sigma.size() != need.size()) return false;
      for (const auto& [n, v] : sf.threads[th].sigma)
        if (!need.count(n)) return false;
    }
    return true;
  }

  std::string text(const StdForm& sf) const {
    std::string s = "new " + std::to_string(sf.pool) + ".(";
    for (size_t th = 0; th < sf.threads.size(); ++th) {
      if (th) s += " | ";
      const SkelState& st = skeletons_[th].states[(size_t)sf.threads[th].state];
      TermPtr alias(std::shared_ptr<const SeqTerm>(), st.node);
      s += print_term(spec_, alias);
      s += "{";
      bool first = true;
      for (const auto& [n, v] : sf.threads[th].sigma) {
        if (!first) s += ",";
        first = false;
        s += spec_.text(n) + "=" +
             (v.restr ? "#" + std::to_string(v.id + 1) : spec_.text(v.id));
      }
      s += "}";
      if (!st.lambda.empty()) {
        s += "<";
        for (size_t i = 0; i < st.lambda.size(); ++i)
          s += (i ? "," : "") + spec_.text(st.lambda[i]);
        s += ">";
      }
    }
    return s + ")";
  }

 private:
  FcpSpec spec_;
  std::vector<Skeleton> skeletons_;
  std::vector<std::vector<int>> canon_;

  static void keep(std::set<LabeledSucc>& out, StdForm next, std::string a,
                   std::string b) {
    canonicalize(next);
    out.insert(LabeledSucc{std::move(next), std::move(a), std::move(b)});
  }

  // printable identity of the prefix occurrence behind an edge: the prefix
  // followed by its continuation term
  std::string desc(int th, const SkelEdge& e) const {
    const SkelState& d = skeletons_[(size_t)th].states[(size_t)e.to];
    TermPtr alias(std::shared_ptr<const SeqTerm>(), d.node);
    return print_prefix(spec_, e.pre) + "." + print_term(spec_, alias);
  }

  PiVal value(const PiThread& t, NameId n) const {
    if (spec_.kind(n) == NameKind::Public) return PiVal{false, n};
    return t.sigma.at(n);
  }

  void restrict_sigma(PiThread& t, const Skeleton& sk) const {
    std::set<NameId> need = sk.mapped_at(spec_, t.state);
    for (auto it = t.sigma.begin(); it != t.sigma.end();)
      it = need.count(it->first) ? std::next(it) : t.sigma.erase(it);
  }

  int alloc_index(const StdForm& sf) const {
    std::set<int> used;
    for (const PiThread& t : sf.threads)
      for (const auto& [n, v] : t.sigma)
        if (v.restr) used.insert(v.id);
    int i = 0;
    while (used.count(i)) ++i;
    return i;
  }

  // Runs thread th through its deterministic internal steps until a stable
  // state. With through_call the thread starts at a call point and the
  // body transfer on the way is this reaction's observable move. Returns
  // false when a failing guard wedges the thread mid-step.
  bool complete(StdForm& sf, int th, bool through_call) const {
    const Skeleton& sk = skeletons_[(size_t)th];
    PiThread& t = sf.threads[(size_t)th];
    bool first = through_call;
    for (;;) {
      const SkelState& st = sk.states[(size_t)t.state];
      if (st.stable && !first) return true;
      first = false;
      if (st.out.empty()) return true;  // empty choice, nothing to settle
      const SkelEdge& e = sk.edges[(size_t)st.out[0]];
      switch (e.kind) {
        case SkelEdge::Nu:
          t.state = canon_[(size_t)th][(size_t)e.to];
          t.sigma[e.a] = PiVal{true, alloc_index(sf)};
          break;
        case SkelEdge::GuardStep: {
          PiVal a = value(t, e.a), b = value(t, e.b);
          if ((a == b) != e.positive) return false;
          t.state = canon_[(size_t)th][(size_t)e.to];
          break;
        }
        case SkelEdge::CallMap: {
          PiVal v = value(t, e.a);
          t.state = canon_[(size_t)th][(size_t)e.to];
          t.sigma[e.b] = v;
          break;
        }
        case SkelEdge::CallUnmap:
        case SkelEdge::CallBody:
          t.state = canon_[(size_t)th][(size_t)e.to];
          break;
        default:
          return true;  // a prefix: stable choice reached
      }
      restrict_sigma(t, sk);
    }
  }

  // Renumber restricted indices by first use in thread order; unreferenced
  // indices disappear (garbage collection of dead restrictions).
  static void canonicalize(StdForm& sf) {
    std::map<int, int> ren;
    for (PiThread& t : sf.threads)
      for (const auto& [n, v] : t.sigma)
        if (v.restr && !ren.count(v.id)) ren[v.id] = (int)ren.size();
    for (PiThread& t : sf.threads)
      for (auto& [n, v] : t.sigma)
        if (v.restr) v.id = ren.at(v.id);
    sf.pool = (int)ren.size();
  }
};

struct PiLts {
  std::vector<StdForm> states;
  std::map<StdForm, int> index;
  std::vector<std::pair<int, int>> edges;
  int initial = 0;
};

inline PiLts build_pi_lts(const PiSystem& sys, size_t max_states) {
  PiLts lts;
  lts.states.push_back(sys.initial());
  lts.index.emplace(lts.states[0], 0);
  std::set<std::pair<int, int>> eset;
  for (size_t i = 0; i < lts.states.size(); ++i) {
    StdForm sf = lts.states[i];  // copy: vector grows
    for (const StdForm& next : sys.reactions(sf)) {
      auto it = lts.index.find(next);
      int to;
      if (it == lts.index.end()) {
        to = (int)lts.states.size();
        if ((size_t)to + 1 > max_states) throw StateLimitExceeded(max_states);
        lts.states.push_back(next);
        lts.index.emplace(next, to);
      } else {
        to = it->second;
      }
      if (eset.insert({(int)i, to}).second)
        lts.edges.push_back({(int)i, to});
    }
  }
  return lts;
}

inline PiLts build_pi_lts(const FcpSpec& spec, size_t max_states) {
  return build_pi_lts(PiSystem(spec), max_states);
}

// Line-oriented dump: "STATE id: <text>" then "EDGE from to".
inline std::string dump_lts(const PiSystem& sys, const PiLts& lts) {
  std::string out;
  for (size_t i = 0; i < lts.states.size(); ++i)
    out += "STATE " + std::to_string(i) + ": " + sys.text(lts.states[i]) +
           "\n";
  for (const auto& [a, b] : lts.edges)
    out += "EDGE " + std::to_string(a) + " " + std::to_string(b) + "\n";
  return out;
}

}  // namespace fcp2pn

#endif
