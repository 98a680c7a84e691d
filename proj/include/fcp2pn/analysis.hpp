// Static analyses that parameterize the translation: name domains, the
// bound on the number of fresh values, the name abstraction (row sharing in
// the substitution net), and call parameter reordering.

#ifndef FCP2PN_ANALYSIS_HPP
#define FCP2PN_ANALYSIS_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "fcp2pn/ast.hpp"
#include "fcp2pn/control.hpp"
#include "fcp2pn/normalize.hpp"

namespace fcp2pn {

// ---- thread attribution ----------------------------------------------------

// After replication every equation is reachable from at most one thread.
inline std::map<std::string, int> eq_thread(const FcpSpec& spec) {
  std::map<std::string, int> out;
  for (size_t i = 0; i < spec.threads.size(); ++i)
    for (const auto& id : detail::reachable_eqs(spec, spec.threads[i]))
      out.emplace(id, (int)i);
  return out;
}

// Thread where each bound name or formal parameter is defined. Outer
// restrictions are attributed to the first thread that uses them.
inline std::map<NameId, int> name_thread(const FcpSpec& spec) {
  std::map<NameId, int> out;
  auto walk = [&](const TermPtr& t, int th, auto&& self) -> void {
    switch (t->kind) {
      case SeqTerm::Choice:
        for (const auto& b : t->branches) {
          if (b.pre.kind == Prefix::Recv)
            for (NameId y : b.pre.names) out.emplace(y, th);
          self(b.cont, th, self);
        }
        break;
      case SeqTerm::Call:
        break;
      case SeqTerm::Restrict:
        out.emplace(t->binder, th);
        self(t->body, th, self);
        break;
      case SeqTerm::Guard:
        self(t->body, th, self);
        break;
    }
  };
  std::map<std::string, int> et = eq_thread(spec);
  for (const auto& id : spec.eq_order) {
    auto it = et.find(id);
    int th = it == et.end() ? 0 : it->second;
    for (NameId f : spec.equations.at(id).formals) out.emplace(f, th);
    walk(spec.equations.at(id).body, th, walk);
  }
  for (size_t i = 0; i < spec.threads.size(); ++i)
    walk(spec.threads[i], (int)i, walk);
  for (NameId r : spec.outer_restrictions) {
    for (size_t i = 0; i < spec.threads.size(); ++i)
      if (free_names(spec.threads[i]).count(r)) {
        out.emplace(r, (int)i);
        break;
      }
    out.emplace(r, 0);
  }
  return out;
}

// ---- name domains ----------------------------------------------------------

// A domain element: either a public name, or the token "values created on
// behalf of restriction r" (the analysis never looks at concrete fresh
// values).
struct DomValue {
  bool restr = false;
  NameId name = -1;
  auto operator<=>(const DomValue&) const = default;
};

struct DomainMap {
  std::map<NameId, std::set<DomValue>> dom;
  bool rough = false;

  const std::set<DomValue>& at(NameId n) const {
    static const std::set<DomValue> empty;
    auto it = dom.find(n);
    return it == dom.end() ? empty : it->second;
  }
  bool has_restricted(NameId n) const {
    for (const DomValue& v : at(n))
      if (v.restr) return true;
    return false;
  }
};

namespace detail {

struct CommAction {
  int thread;
  NameId chan;
  std::vector<NameId> payload;  // sent names or receive binders
};

inline void collect_actions(const FcpSpec& spec, const TermPtr& t, int th,
                            std::vector<CommAction>& sends,
                            std::vector<CommAction>& recvs,
                            std::vector<const SeqTerm*>& calls) {
  switch (t->kind) {
    case SeqTerm::Choice:
      for (const auto& b : t->branches) {
        if (b.pre.kind == Prefix::Send)
          sends.push_back({th, b.pre.chan, b.pre.names});
        if (b.pre.kind == Prefix::Recv)
          recvs.push_back({th, b.pre.chan, b.pre.names});
        collect_actions(spec, b.cont, th, sends, recvs, calls);
      }
      break;
    case SeqTerm::Call:
      calls.push_back(t.get());
      break;
    case SeqTerm::Restrict:
    case SeqTerm::Guard:
      collect_actions(spec, t->body, th, sends, recvs, calls);
      break;
  }
}

}  // namespace detail

inline DomainMap compute_domains(const FcpSpec& spec, bool rough = false) {
  DomainMap dm;
  dm.rough = rough;
  std::vector<NameId> pubs = spec.names_of_kind(NameKind::Public);
  std::vector<NameId> restr = spec.names_of_kind(NameKind::Restricted);
  for (NameId p : pubs) dm.dom[p] = {DomValue{false, p}};
  for (NameId r : restr) dm.dom[r] = {DomValue{true, r}};
  if (rough) {
    std::set<DomValue> full;
    for (NameId p : pubs) full.insert(DomValue{false, p});
    for (NameId r : restr) full.insert(DomValue{true, r});
    for (NameId x : spec.names_of_kind(NameKind::Input)) dm.dom[x] = full;
    for (NameId f : spec.names_of_kind(NameKind::Formal)) dm.dom[f] = full;
    return dm;
  }

  std::vector<detail::CommAction> sends, recvs;
  std::vector<const SeqTerm*> calls;
  std::map<std::string, int> et = eq_thread(spec);
  for (const auto& id : spec.eq_order) {
    auto it = et.find(id);
    int th = it == et.end() ? -1 : it->second;
    detail::collect_actions(spec, spec.equations.at(id).body, th, sends,
                            recvs, calls);
  }
  for (size_t i = 0; i < spec.threads.size(); ++i)
    detail::collect_actions(spec, spec.threads[i], (int)i, sends, recvs,
                            calls);

  auto overlap = [&](NameId a, NameId b) {
    for (const DomValue& v : dm.at(a))
      if (dm.at(b).count(v)) return true;
    return false;
  };
  auto absorb = [&](NameId into, NameId from) {
    bool grew = false;
    for (const DomValue& v : dm.at(from))
      if (dm.dom[into].insert(v).second) grew = true;
    return grew;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& snd : sends) {
      for (const auto& rcv : recvs) {
        if (snd.thread == rcv.thread) continue;
        if (snd.payload.size() != rcv.payload.size()) continue;
        if (!overlap(snd.chan, rcv.chan)) continue;
        for (size_t k = 0; k < snd.payload.size(); ++k)
          if (absorb(rcv.payload[k], snd.payload[k])) changed = true;
      }
    }
    for (const SeqTerm* c : calls) {
      const Equation& e = spec.eq(c->callee);
      for (size_t k = 0; k < c->args.size() && k < e.formals.size(); ++k)
        if (absorb(e.formals[k], c->args[k])) changed = true;
    }
  }
  return dm;
}

// ---- fresh-value budget ----------------------------------------------------

struct NewBudget {
  int total = 0;
  std::map<int, int> per_thread;
};

namespace detail {

// Names counted by the budget at a skeleton state: the free non-public
// names of the remaining term plus the pending queue. For calls in progress
// the remaining term keeps only the unconsumed arguments.
inline std::set<NameId> budget_names(const FcpSpec& spec, const Skeleton& sk,
                                     int s) {
  std::set<NameId> out;
  const SkelState& st = sk.states[(size_t)s];
  if (st.node->kind == SeqTerm::Call) {
    for (int i = 0; i < st.pos; ++i) {
      NameId n = st.node->args[(size_t)i];
      if (spec.kind(n) != NameKind::Public) out.insert(n);
    }
  } else {
    for (NameId n : sk.fn(st.node))
      if (spec.kind(n) != NameKind::Public) out.insert(n);
  }
  for (NameId n : st.lambda) out.insert(n);
  return out;
}

inline bool has_restriction(const FcpSpec& spec) {
  if (!spec.outer_restrictions.empty()) return true;
  auto walk = [&](const TermPtr& t, auto&& self) -> bool {
    switch (t->kind) {
      case SeqTerm::Choice:
        for (const auto& b : t->branches)
          if (self(b.cont, self)) return true;
        return false;
      case SeqTerm::Call:
        return false;
      case SeqTerm::Restrict:
        return true;
      case SeqTerm::Guard:
        return self(t->body, self);
    }
    return false;
  };
  for (const auto& id : spec.eq_order)
    if (walk(spec.equations.at(id).body, walk)) return true;
  for (const auto& th : spec.threads)
    if (walk(th, walk)) return true;
  return false;
}

}  // namespace detail

inline NewBudget compute_new_budget(const FcpSpec& spec,
                                    const DomainMap& domains,
                                    const std::vector<Skeleton>& skeletons,
                                    bool rough = false) {
  NewBudget nb;
  if (!detail::has_restriction(spec)) return nb;
  if (rough) {
    nb.total = (int)(spec.names_of_kind(NameKind::Restricted).size() +
                     spec.names_of_kind(NameKind::Input).size() +
                     spec.names_of_kind(NameKind::Formal).size());
    return nb;
  }
  for (size_t i = 0; i < skeletons.size(); ++i) {
    int best = 0;
    for (size_t s = 0; s < skeletons[i].states.size(); ++s) {
      int live = 0;
      for (NameId n : detail::budget_names(spec, skeletons[i], (int)s))
        if (domains.has_restricted(n)) ++live;
      if (live > best) best = live;
    }
    nb.per_thread[(int)i] = best;
    nb.total += best;
  }
  return nb;
}

// ---- name abstraction ------------------------------------------------------

struct AbsTuple {
  int thread = 0;
  int type = 1;  // 0 restricted, 1 input/formal
  int depth = 0;
  auto operator<=>(const AbsTuple&) const = default;
};

struct Abstraction {
  bool enabled = true;
  std::map<NameId, AbsTuple> tuple;
  std::map<NameId, int> row;  // dense row ids, refined for soundness
  int num_rows = 0;
};

namespace detail {

inline void abs_depths(const TermPtr& t, int d0, int d1,
                       std::map<NameId, std::pair<int, int>>& out) {
  // out[name] = (type, depth)
  switch (t->kind) {
    case SeqTerm::Choice:
      for (const auto& b : t->branches) {
        int d1b = d1;
        if (b.pre.kind == Prefix::Recv)
          for (NameId y : b.pre.names) {
            out.emplace(y, std::make_pair(1, d1b));
            ++d1b;
          }
        abs_depths(b.cont, d0, d1b, out);
      }
      break;
    case SeqTerm::Call:
      break;
    case SeqTerm::Restrict:
      out.emplace(t->binder, std::make_pair(0, d0));
      abs_depths(t->body, d0 + 1, d1, out);
      break;
    case SeqTerm::Guard:
      abs_depths(t->body, d0, d1, out);
      break;
  }
}

}  // namespace detail

// The paper-style abstraction tuple (thread, type, depth). Rows initially
// coincide with tuple classes; refine_abstraction splits them wherever
// sharing would let two names be mapped at the same time.
inline Abstraction compute_abstraction(const FcpSpec& spec,
                                       bool enabled = true) {
  Abstraction ab;
  ab.enabled = enabled;
  std::map<NameId, int> nth = name_thread(spec);
  std::map<NameId, std::pair<int, int>> td;
  int oi = 0;
  for (NameId r : spec.outer_restrictions)
    td.emplace(r, std::make_pair(0, oi++));
  for (const auto& id : spec.eq_order) {
    const Equation& e = spec.equations.at(id);
    int fi = 0;
    for (NameId f : e.formals) td.emplace(f, std::make_pair(1, fi++));
    detail::abs_depths(e.body, 0, fi, td);
  }
  for (const auto& th : spec.threads) detail::abs_depths(th, (int)spec.outer_restrictions.size(), 0, td);
  for (const auto& [n, p] : td) {
    AbsTuple t;
    auto it = nth.find(n);
    t.thread = it == nth.end() ? 0 : it->second;
    t.type = p.first;
    t.depth = p.second;
    ab.tuple[n] = t;
  }
  // provisional rows
  if (!enabled) {
    for (const auto& [n, t] : ab.tuple) ab.row[n] = ab.num_rows++;
  } else {
    std::map<AbsTuple, int> cls;
    for (const auto& [n, t] : ab.tuple) {
      auto it = cls.find(t);
      if (it == cls.end()) it = cls.emplace(t, ab.num_rows++).first;
      ab.row[n] = it->second;
    }
  }
  return ab;
}

// Split rows so that two names sharing a row are never mapped at the same
// time, including transiently while a call passes parameters. Conflicts are
// collected from the reachable skeleton states of every thread; rows are
// then re-colored greedily within each tuple class.
inline void refine_abstraction(Abstraction& ab, const FcpSpec& spec,
                               const std::vector<Skeleton>& skeletons) {
  if (!ab.enabled) return;
  std::set<std::pair<NameId, NameId>> conflict;
  for (const auto& sk : skeletons) {
    for (size_t s = 0; s < sk.states.size(); ++s) {
      std::set<NameId> live = sk.mapped_at(spec, (int)s);
      for (auto i = live.begin(); i != live.end(); ++i)
        for (auto j = std::next(i); j != live.end(); ++j)
          conflict.emplace(*i, *j);
    }
  }
  // outer restrictions are all mapped from the start
  for (size_t i = 0; i < spec.outer_restrictions.size(); ++i)
    for (size_t j = i + 1; j < spec.outer_restrictions.size(); ++j)
      conflict.emplace(std::min(spec.outer_restrictions[i],
                                spec.outer_restrictions[j]),
                       std::max(spec.outer_restrictions[i],
                                spec.outer_restrictions[j]));
  auto clash = [&](NameId a, NameId b) {
    return conflict.count({std::min(a, b), std::max(a, b)}) != 0;
  };

  std::map<AbsTuple, std::vector<NameId>> groups;
  for (const auto& [n, t] : ab.tuple) groups[t].push_back(n);
  ab.row.clear();
  ab.num_rows = 0;
  for (auto& [t, names] : groups) {
    // names are in ascending id order (map iteration)
    std::vector<std::vector<NameId>> colors;
    for (NameId n : names) {
      size_t c = 0;
      for (; c < colors.size(); ++c) {
        bool ok = true;
        for (NameId m : colors[c])
          if (clash(n, m)) {
            ok = false;
            break;
          }
        if (ok) break;
      }
      if (c == colors.size()) colors.emplace_back();
      colors[c].push_back(n);
    }
    for (const auto& col : colors) {
      int id = ab.num_rows++;
      for (NameId n : col) ab.row[n] = id;
    }
  }
}

// ---- parameter reordering --------------------------------------------------

// Permute formal lists (and the matching factual lists) so that, at as many
// call sites as possible, the argument's abstraction tuple coincides with
// the formal's position-derived tuple. Greedy per position; deterministic.
inline FcpSpec reorder_parameters(const FcpSpec& in,
                                  const Abstraction& abs0) {
  FcpSpec s = in;
  Abstraction ab = abs0;
  std::map<std::string, int> et = eq_thread(s);
  for (const auto& id : s.eq_order) {
    Equation& e = s.equations.at(id);
    size_t m = e.formals.size();
    if (m < 2) continue;
    int th = et.count(id) ? et.at(id) : 0;
    // args seen at each position over all call sites
    std::vector<std::vector<NameId>> seen(m);
    auto scan = [&](const TermPtr& t, auto&& self) -> void {
      switch (t->kind) {
        case SeqTerm::Choice:
          for (const auto& b : t->branches) self(b.cont, self);
          break;
        case SeqTerm::Call:
          if (t->callee == id)
            for (size_t k = 0; k < t->args.size() && k < m; ++k)
              seen[k].push_back(t->args[k]);
          break;
        case SeqTerm::Restrict:
        case SeqTerm::Guard:
          self(t->body, self);
          break;
      }
    };
    for (const auto& eid : s.eq_order) scan(s.equations.at(eid).body, scan);
    for (const auto& t : s.threads) scan(t, scan);

    // benefit of placing original position k at new position pos
    auto benefit = [&](size_t k, size_t pos) {
      int b = 0;
      for (NameId a : seen[k]) {
        auto it = ab.tuple.find(a);
        if (it == ab.tuple.end()) continue;
        if (it->second.thread == th && it->second.type == 1 &&
            it->second.depth == (int)pos)
          ++b;
      }
      return b;
    };
    std::vector<size_t> perm;  // perm[pos] = original index
    std::vector<bool> used(m, false);
    for (size_t pos = 0; pos < m; ++pos) {
      size_t best = m;
      int bestv = -1;
      for (size_t k = 0; k < m; ++k) {
        if (used[k]) continue;
        int v = benefit(k, pos);
        if (v > bestv) {
          bestv = v;
          best = k;
        }
      }
      used[best] = true;
      perm.push_back(best);
    }
    bool identity = true;
    for (size_t pos = 0; pos < m; ++pos)
      if (perm[pos] != pos) identity = false;
    if (identity) continue;

    std::vector<NameId> nf(m);
    for (size_t pos = 0; pos < m; ++pos) nf[pos] = e.formals[perm[pos]];
    e.formals = nf;
    auto apply = [&](const TermPtr& t, auto&& self) -> TermPtr {
      switch (t->kind) {
        case SeqTerm::Choice: {
          if (t->branches.empty()) return t;
          std::vector<Branch> bs;
          for (const auto& b : t->branches)
            bs.push_back(Branch{b.pre, self(b.cont, self)});
          return SeqTerm::choice(std::move(bs));
        }
        case SeqTerm::Call: {
          if (t->callee != id) return t;
          std::vector<NameId> na(t->args.size());
          for (size_t pos = 0; pos < t->args.size(); ++pos)
            na[pos] = t->args[perm[pos]];
          return SeqTerm::call(t->callee, std::move(na));
        }
        case SeqTerm::Restrict:
          return SeqTerm::restrict(t->binder, self(t->body, self));
        case SeqTerm::Guard:
          return SeqTerm::guard(t->gx, t->gy, t->positive,
                                self(t->body, self));
      }
      return t;
    };
    for (const auto& eid : s.eq_order) {
      Equation& other = s.equations.at(eid);
      other.body = apply(other.body, apply);
    }
    for (auto& th2 : s.threads) th2 = apply(th2, apply);
    // formal depths changed; recompute tuples for subsequent equations
    ab = compute_abstraction(s, ab.enabled);
  }
  return s;
}

}  // namespace fcp2pn

#endif
