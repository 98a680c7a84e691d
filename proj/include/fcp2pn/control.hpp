// Per-thread control skeleton: a finite automaton over states
// (term node, remaining call arguments, pending-unmap queue) with symbolic
// edges for restriction initialisation, prefixes, guards, and the three call
// phases (map arguments last-to-first, unmap the pending queue front-first,
// expand the body). The same skeleton drives the static analyses, the net
// translator and the reference interpreter, so the three always agree on
// control flow.
//
// The pending queue (lambda) lists names that are still mapped in the
// substitution net but no longer free in the current term; they are unmapped
// one per step at the next call. A receive binder or restriction that never
// occurs in its continuation joins the queue immediately, and a formal
// parameter unused in its equation body joins it at the body transfer; both
// lift the usual normal form requirement that binders be used.

#ifndef FCP2PN_CONTROL_HPP
#define FCP2PN_CONTROL_HPP

#include <deque>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "fcp2pn/ast.hpp"

namespace fcp2pn {

struct SkelEdge {
  enum Kind {
    Nu,        // restriction initialisation, name a
    TauPre,    // tau prefix
    SendPre,   // send prefix
    RecvPre,   // receive prefix
    GuardStep, // match/mismatch on (a, b)
    CallMap,   // map formal b to argument a (last argument first)
    CallUnmap, // unmap pending name a
    CallBody,  // expand the callee body
  };
  Kind kind;
  int from, to;
  Prefix pre;            // prefix edges
  NameId a = -1, b = -1;
  bool positive = true;  // GuardStep
  std::string callee;    // CallMap/CallUnmap/CallBody
};

struct SkelState {
  const SeqTerm* node;
  int pos;                     // call states: arguments still to map
  std::vector<NameId> lambda;  // pending unmaps, front is next
  bool stable;                 // a reaction can end here
  std::vector<int> out;        // edge indices
};

class Skeleton {
 public:
  std::vector<SkelState> states;
  std::vector<SkelEdge> edges;
  int entry = -1;

  const std::set<NameId>& fn(const SeqTerm* node) const {
    auto it = fn_.find(node);
    if (it != fn_.end()) return it->second;
    TermPtr alias(std::shared_ptr<const SeqTerm>(), node);
    return fn_.emplace(node, free_names(alias)).first->second;
  }

  // Names mapped in the substitution net while control sits in state s: the
  // non-public free names of the term, the pending queue, and for a call in
  // progress the callee formals mapped so far (arguments are mapped
  // last-to-first, so formals pos..m-1 are live while arguments 0..pos-1
  // still await consumption).
  std::set<NameId> mapped_at(const FcpSpec& spec, int s) const {
    std::set<NameId> out;
    const SkelState& st = states[(size_t)s];
    if (st.node->kind == SeqTerm::Call) {
      const Equation& eq = spec.eq(st.node->callee);
      for (int i = 0; i < st.pos; ++i) {
        NameId n = st.node->args[(size_t)i];
        if (spec.kind(n) != NameKind::Public) out.insert(n);
      }
      for (size_t i = (size_t)st.pos; i < eq.formals.size(); ++i)
        out.insert(eq.formals[i]);
    } else {
      for (NameId n : fn(st.node))
        if (spec.kind(n) != NameKind::Public) out.insert(n);
    }
    for (NameId n : st.lambda) out.insert(n);
    return out;
  }

 private:
  mutable std::map<const SeqTerm*, std::set<NameId>> fn_;
};

namespace detail {

class SkeletonBuilder {
 public:
  SkeletonBuilder(const FcpSpec& spec, Skeleton& sk) : spec_(spec), sk_(sk) {}

  void build(const TermPtr& root) {
    sk_.entry = state_of(root.get(), initial_pos(root.get()), {});
    for (size_t i = 0; i < work_.size(); ++i) expand(work_[i]);
  }

 private:
  const FcpSpec& spec_;
  Skeleton& sk_;
  std::map<std::tuple<const SeqTerm*, int, std::vector<NameId>>, int> index_;
  std::vector<int> work_;

  static int initial_pos(const SeqTerm* t) {
    return t->kind == SeqTerm::Call ? (int)t->args.size() : 0;
  }

  int state_of(const SeqTerm* node, int pos, std::vector<NameId> lambda) {
    auto key = std::make_tuple(node, pos, lambda);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    int id = (int)sk_.states.size();
    bool stable = node->kind == SeqTerm::Choice ||
                  (node->kind == SeqTerm::Call && pos == (int)node->args.size());
    sk_.states.push_back(SkelState{node, pos, lambda, stable, {}});
    index_.emplace(std::move(key), id);
    work_.push_back(id);
    return id;
  }

  void add_edge(SkelEdge e) {
    int id = (int)sk_.edges.size();
    sk_.states[(size_t)e.from].out.push_back(id);
    sk_.edges.push_back(std::move(e));
  }

  // Queue extension when moving to continuation `next` from a state whose
  // term had free names fnHere: every non-public name that stops being free
  // joins the queue, smallest id first.
  std::vector<NameId> extend(const std::vector<NameId>& lambda,
                             const std::set<NameId>& fnHere,
                             const SeqTerm* next) {
    std::vector<NameId> out = lambda;
    const std::set<NameId>& fnNext = sk_.fn(next);
    for (NameId n : fnHere) {
      if (fnNext.count(n)) continue;
      if (spec_.kind(n) == NameKind::Public) continue;
      if (std::count(out.begin(), out.end(), n)) continue;
      out.push_back(n);
    }
    return out;
  }

  void expand(int sid) {
    // copy: states vector may grow while we add targets
    SkelState st = sk_.states[(size_t)sid];
    const SeqTerm* t = st.node;
    switch (t->kind) {
      case SeqTerm::Choice: {
        for (const auto& b : t->branches) {
          std::set<NameId> consumed = sk_.fn(t);
          if (b.pre.kind == Prefix::Recv)
            for (NameId y : b.pre.names) consumed.insert(y);
          std::vector<NameId> lam =
              extend(st.lambda, consumed, b.cont.get());
          int to = state_of(b.cont.get(), initial_pos(b.cont.get()), lam);
          SkelEdge::Kind k = b.pre.kind == Prefix::Tau ? SkelEdge::TauPre
                             : b.pre.kind == Prefix::Send ? SkelEdge::SendPre
                                                          : SkelEdge::RecvPre;
          SkelEdge e;
          e.kind = k;
          e.from = sid;
          e.to = to;
          e.pre = b.pre;
          add_edge(std::move(e));
        }
        break;
      }
      case SeqTerm::Restrict: {
        std::set<NameId> intro = sk_.fn(t);
        intro.insert(t->binder);
        std::vector<NameId> lam = extend(st.lambda, intro, t->body.get());
        int to = state_of(t->body.get(), initial_pos(t->body.get()), lam);
        SkelEdge e;
        e.kind = SkelEdge::Nu;
        e.from = sid;
        e.to = to;
        e.a = t->binder;
        add_edge(std::move(e));
        break;
      }
      case SeqTerm::Guard: {
        std::vector<NameId> lam = extend(st.lambda, sk_.fn(t), t->body.get());
        int to = state_of(t->body.get(), initial_pos(t->body.get()), lam);
        SkelEdge e;
        e.kind = SkelEdge::GuardStep;
        e.from = sid;
        e.to = to;
        e.a = t->gx;
        e.b = t->gy;
        e.positive = t->positive;
        add_edge(std::move(e));
        break;
      }
      case SeqTerm::Call: {
        const Equation& eq = spec_.eq(t->callee);
        if (st.pos > 0) {
          NameId arg = t->args[(size_t)st.pos - 1];
          NameId formal = eq.formals[(size_t)st.pos - 1];
          std::vector<NameId> lam = st.lambda;
          if (spec_.kind(arg) != NameKind::Public &&
              !std::count(lam.begin(), lam.end(), arg))
            lam.push_back(arg);
          int to = state_of(t, st.pos - 1, lam);
          SkelEdge e;
          e.kind = SkelEdge::CallMap;
          e.from = sid;
          e.to = to;
          e.a = arg;
          e.b = formal;
          e.callee = t->callee;
          add_edge(std::move(e));
        } else if (!st.lambda.empty()) {
          std::vector<NameId> lam(st.lambda.begin() + 1, st.lambda.end());
          int to = state_of(t, 0, lam);
          SkelEdge e;
          e.kind = SkelEdge::CallUnmap;
          e.from = sid;
          e.to = to;
          e.a = st.lambda.front();
          e.callee = t->callee;
          add_edge(std::move(e));
        } else {
          // a formal unused in the body stays mapped: queue it for unmapping
          // at the next call, like an unused receive binder
          std::vector<NameId> lam;
          {
            std::set<NameId> sorted(eq.formals.begin(), eq.formals.end());
            const std::set<NameId>& fnBody = sk_.fn(eq.body.get());
            for (NameId f : sorted)
              if (!fnBody.count(f)) lam.push_back(f);
          }
          int to = state_of(eq.body.get(), initial_pos(eq.body.get()),
                            std::move(lam));
          SkelEdge e;
          e.kind = SkelEdge::CallBody;
          e.from = sid;
          e.to = to;
          e.callee = t->callee;
          add_edge(std::move(e));
        }
        break;
      }
    }
  }
};

}  // namespace detail

// Build the control skeleton of one thread. The spec provides the equations
// the thread calls; the root is the thread's term.
inline Skeleton build_skeleton(const FcpSpec& spec, const TermPtr& root) {
  Skeleton sk;
  detail::SkeletonBuilder(spec, sk).build(root);
  return sk;
}

}  // namespace fcp2pn

#endif
