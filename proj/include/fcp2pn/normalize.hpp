// Normal form passes that prepare a validated FCP for translation:
//   replicate_equations      - threads call disjoint identifier sets
//   eliminate_self_calls     - no equation calls itself directly
//   drop_main_restrictions   - outer "new" binders become public names
//   introduce_init_equations - per-thread entry equations Init_i plus the
//                              initial substitutions sigma_i; equation bodies
//                              mention exactly their formals, every receive
//                              binder occurs in its continuation, and unused
//                              restrictions are dropped

#ifndef FCP2PN_NORMALIZE_HPP
#define FCP2PN_NORMALIZE_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "fcp2pn/ast.hpp"
#include "fcp2pn/validate.hpp"

namespace fcp2pn {

namespace detail {

inline void callees_into(const TermPtr& t, std::set<std::string>& out) {
  switch (t->kind) {
    case SeqTerm::Choice:
      for (const auto& b : t->branches) callees_into(b.cont, out);
      break;
    case SeqTerm::Call:
      out.insert(t->callee);
      break;
    case SeqTerm::Restrict:
    case SeqTerm::Guard:
      callees_into(t->body, out);
      break;
  }
}

inline std::set<std::string> reachable_eqs(const FcpSpec& spec,
                                           const TermPtr& root) {
  std::set<std::string> seen;
  std::vector<std::string> work;
  callees_into(root, seen);
  work.assign(seen.begin(), seen.end());
  while (!work.empty()) {
    std::string id = work.back();
    work.pop_back();
    std::set<std::string> next;
    callees_into(spec.eq(id).body, next);
    for (const auto& n : next)
      if (seen.insert(n).second) work.push_back(n);
  }
  return seen;
}

inline TermPtr rename_callees(const TermPtr& t,
                              const std::map<std::string, std::string>& m) {
  switch (t->kind) {
    case SeqTerm::Choice: {
      if (t->branches.empty()) return t;
      std::vector<Branch> bs;
      for (const auto& b : t->branches)
        bs.push_back(Branch{b.pre, rename_callees(b.cont, m)});
      return SeqTerm::choice(std::move(bs));
    }
    case SeqTerm::Call: {
      auto it = m.find(t->callee);
      if (it == m.end()) return t;
      return SeqTerm::call(it->second, t->args);
    }
    case SeqTerm::Restrict:
      return SeqTerm::restrict(t->binder, rename_callees(t->body, m));
    case SeqTerm::Guard:
      return SeqTerm::guard(t->gx, t->gy, t->positive,
                            rename_callees(t->body, m));
  }
  return t;
}

inline std::string fresh_eq_name(const FcpSpec& spec, const std::string& base) {
  if (!spec.equations.count(base)) return base;
  for (int k = 1;; ++k) {
    std::string cand = base + "_" + std::to_string(k);
    if (!spec.equations.count(cand)) return cand;
  }
}

// Fresh name id with a text derived from `base` (same scheme as no-clash).
inline NameId fresh_name(FcpSpec& spec, NameId base) {
  std::string b = spec.text(base);
  size_t h = b.rfind('#');
  if (h != std::string::npos && h + 1 < b.size() &&
      b.find_first_not_of("0123456789", h + 1) == std::string::npos)
    b = b.substr(0, h);
  for (int k = 1;; ++k) {
    std::string cand = b + "#" + std::to_string(k);
    if (spec.find(cand) == -1) return spec.intern(cand);
  }
}

}  // namespace detail

// ---- replicate_equations ---------------------------------------------------

// Give each thread its own copies of the equations it (transitively) calls,
// so that the per-thread identifier sets are pairwise disjoint. Equations
// reachable from a single thread keep their name; shared ones are copied as
// Id_1, Id_2, ... per thread. Unreachable equations are removed.
inline FcpSpec replicate_equations(const FcpSpec& in) {
  std::vector<std::set<std::string>> reach;
  std::map<std::string, int> refcount;
  for (const auto& th : in.threads) {
    reach.push_back(detail::reachable_eqs(in, th));
    for (const auto& id : reach.back()) refcount[id]++;
  }
  bool shared = false, dead = false;
  for (const auto& id : in.eq_order) {
    int c = refcount.count(id) ? refcount.at(id) : 0;
    if (c > 1) shared = true;
    if (c == 0) dead = true;
  }
  if (!shared && !dead) return in;

  FcpSpec out = in;
  out.eq_order.clear();
  out.equations.clear();
  out.threads.clear();
  for (size_t i = 0; i < in.threads.size(); ++i) {
    std::map<std::string, std::string> ren;
    for (const auto& id : in.eq_order) {
      if (!reach[i].count(id)) continue;
      std::string nid = id;
      if (refcount.at(id) > 1)
        nid = detail::fresh_eq_name(out, id + "_" + std::to_string(i + 1));
      ren[id] = nid;
    }
    for (const auto& id : in.eq_order) {
      if (!reach[i].count(id)) continue;
      Equation copy = in.equations.at(id);
      copy.body = detail::rename_callees(copy.body, ren);
      out.eq_order.push_back(ren.at(id));
      out.equations[ren.at(id)] = std::move(copy);
    }
    out.threads.push_back(detail::rename_callees(in.threads[i], ren));
  }
  // copies still share binder and formal name ids; repair and reclassify
  return validate_no_clash(std::move(out)).spec;
}

// ---- eliminate_self_calls --------------------------------------------------

// Replace direct self-calls K<a~> inside the body of K by a call to a fresh
// relay equation K_s(f~') := K<f~'>.
inline FcpSpec eliminate_self_calls(const FcpSpec& in) {
  FcpSpec out = in;
  std::vector<std::string> order = out.eq_order;
  std::vector<std::string> new_order;
  for (const auto& id : order) {
    Equation& e = out.equations.at(id);
    std::set<std::string> cs;
    detail::callees_into(e.body, cs);
    new_order.push_back(id);
    if (!cs.count(id)) continue;
    std::string hid = detail::fresh_eq_name(out, id + "_s");
    Equation helper;
    for (NameId f : e.formals) {
      NameId nf = detail::fresh_name(out, f);
      helper.formals.push_back(nf);
    }
    helper.body = SeqTerm::call(id, helper.formals);
    e.body = detail::rename_callees(e.body, {{id, hid}});
    out.equations[hid] = std::move(helper);
    new_order.push_back(hid);
  }
  out.eq_order = std::move(new_order);
  return validate_no_clash(std::move(out)).spec;
}

// ---- drop_main_restrictions ------------------------------------------------

// Hoist thread-leading restrictions to the main level, then remove all outer
// restrictions; their names become public. The transition system is preserved
// because restricted names are never compared in the base calculus.
inline FcpSpec drop_main_restrictions(const FcpSpec& in) {
  FcpSpec out = in;
  for (auto& th : out.threads) {
    while (th->kind == SeqTerm::Restrict) {
      out.outer_restrictions.push_back(th->binder);
      th = th->body;
    }
  }
  out.outer_restrictions.clear();
  return validate_no_clash(std::move(out)).spec;
}

// ---- introduce_init_equations ----------------------------------------------

struct InitResult {
  FcpSpec spec;
  // sigma[i] maps the formals of the thread's entry equation to the public
  // or restricted names the thread starts with; thread i itself becomes the
  // call Init_i<sigma_i(f~)>.
  std::vector<std::map<NameId, NameId>> sigmas;
  std::vector<std::string> init_ids;
};

namespace detail {

// Drop restrictions whose binder is unused in the body.
inline TermPtr drop_dead_restrictions(const TermPtr& t) {
  switch (t->kind) {
    case SeqTerm::Choice: {
      if (t->branches.empty()) return t;
      std::vector<Branch> bs;
      for (const auto& b : t->branches)
        bs.push_back(Branch{b.pre, drop_dead_restrictions(b.cont)});
      return SeqTerm::choice(std::move(bs));
    }
    case SeqTerm::Call:
      return t;
    case SeqTerm::Restrict: {
      TermPtr body = drop_dead_restrictions(t->body);
      if (!free_names(body).count(t->binder)) return body;
      return SeqTerm::restrict(t->binder, body);
    }
    case SeqTerm::Guard:
      return SeqTerm::guard(t->gx, t->gy, t->positive,
                            drop_dead_restrictions(t->body));
  }
  return t;
}

// A path into a term: branch index at a Choice node, -1 to descend into the
// body of a Restrict or Guard. A path addresses a subterm; replace_sub
// rebuilds the spine above it.
using TermPath = std::vector<int>;

inline TermPtr get_sub(TermPtr t, const TermPath& p) {
  for (int step : p) {
    if (step < 0)
      t = t->body;
    else
      t = t->branches.at((size_t)step).cont;
  }
  return t;
}

inline TermPtr replace_sub(const TermPtr& t, const TermPath& p, size_t at,
                           const TermPtr& nu) {
  if (at == p.size()) return nu;
  int step = p[at];
  if (step < 0) {
    TermPtr body = replace_sub(t->body, p, at + 1, nu);
    if (t->kind == SeqTerm::Restrict) return SeqTerm::restrict(t->binder, body);
    return SeqTerm::guard(t->gx, t->gy, t->positive, body);
  }
  std::vector<Branch> bs = t->branches;
  bs[(size_t)step].cont = replace_sub(bs[(size_t)step].cont, p, at + 1, nu);
  return SeqTerm::choice(std::move(bs));
}

inline TermPtr replace_sub(const TermPtr& t, const TermPath& p,
                           const TermPtr& nu) {
  return replace_sub(t, p, 0, nu);
}

// Machinery for making every receive binder occur in its continuation. A
// binder whose continuation reaches a Stop leaf is fed into a one-shot
// Sink_k(g) := 0 call replacing that leaf (that leaf ends the thread, so the
// sink fires at most once). Otherwise the binder is threaded into the first
// call of the continuation through a relay formal of the callee; relay
// positions a site does not need carry a public dummy name. All rewriting is
// done in place on the spec, addressed by paths, so padding of sibling call
// sites is never lost.
class BinderFixer {
 public:
  explicit BinderFixer(FcpSpec& s) : s_(s) {}

  void run() {
    for (;;) {
      TermPtr* slot = nullptr;
      TermPath p;
      int branch = -1;
      NameId y = -1;
      for (const auto& id : s_.eq_order) {
        Equation& e = s_.equations.at(id);
        p.clear();
        if (find_binder(e.body, p, branch, y)) {
          slot = &e.body;
          break;
        }
      }
      if (!slot) {
        for (auto& th : s_.threads) {
          p.clear();
          if (find_binder(th, p, branch, y)) {
            slot = &th;
            break;
          }
        }
      }
      if (!slot) return;
      // path to the continuation of the offending branch
      TermPath cp = p;
      cp.push_back(branch);
      use_name(*slot, cp, y);
    }
  }

 private:
  FcpSpec& s_;
  std::map<std::string, std::vector<size_t>> relays_;
  NameId dummy_ = -1;

  NameId dummy() {
    if (dummy_ != -1) return dummy_;
    NameId d = s_.find("eps");
    if (d != -1 && (s_.kind(d) == NameKind::Public ||
                    s_.kind(d) == NameKind::Unused)) {
      dummy_ = d;
    } else {
      for (int k = 0;; ++k) {
        std::string cand = k ? "eps#" + std::to_string(k) : "eps";
        if (s_.find(cand) == -1) {
          dummy_ = s_.intern(cand);
          break;
        }
      }
    }
    s_.name_kind[dummy_] = NameKind::Public;
    return dummy_;
  }

  // First receive branch whose binder does not occur in its continuation.
  // On success p addresses the Choice node, branch/y identify the offender.
  bool find_binder(const TermPtr& t, TermPath& p, int& branch, NameId& y) {
    switch (t->kind) {
      case SeqTerm::Choice:
        for (size_t i = 0; i < t->branches.size(); ++i) {
          const Branch& b = t->branches[i];
          if (b.pre.kind == Prefix::Recv) {
            std::set<NameId> fn = free_names(b.cont);
            for (NameId n : b.pre.names) {
              if (!fn.count(n)) {
                branch = (int)i;
                y = n;
                return true;
              }
            }
          }
          p.push_back((int)i);
          if (find_binder(b.cont, p, branch, y)) return true;
          p.pop_back();
        }
        return false;
      case SeqTerm::Call:
        return false;
      case SeqTerm::Restrict:
      case SeqTerm::Guard:
        p.push_back(-1);
        if (find_binder(t->body, p, branch, y)) return true;
        p.pop_back();
        return false;
    }
    return false;
  }

  // First Stop leaf in t not below a rebinding of y.
  bool find_stop(const TermPtr& t, NameId y, TermPath& p) {
    switch (t->kind) {
      case SeqTerm::Choice:
        if (t->branches.empty()) return true;
        for (size_t i = 0; i < t->branches.size(); ++i) {
          const Branch& b = t->branches[i];
          if (b.pre.kind == Prefix::Recv &&
              std::count(b.pre.names.begin(), b.pre.names.end(), y))
            continue;
          p.push_back((int)i);
          if (find_stop(b.cont, y, p)) return true;
          p.pop_back();
        }
        return false;
      case SeqTerm::Call:
        return false;
      case SeqTerm::Restrict:
        if (t->binder == y) return false;
        p.push_back(-1);
        if (find_stop(t->body, y, p)) return true;
        p.pop_back();
        return false;
      case SeqTerm::Guard:
        p.push_back(-1);
        if (find_stop(t->body, y, p)) return true;
        p.pop_back();
        return false;
    }
    return false;
  }

  bool find_call(const TermPtr& t, NameId y, TermPath& p) {
    switch (t->kind) {
      case SeqTerm::Choice:
        for (size_t i = 0; i < t->branches.size(); ++i) {
          const Branch& b = t->branches[i];
          if (b.pre.kind == Prefix::Recv &&
              std::count(b.pre.names.begin(), b.pre.names.end(), y))
            continue;
          p.push_back((int)i);
          if (find_call(b.cont, y, p)) return true;
          p.pop_back();
        }
        return false;
      case SeqTerm::Call:
        return true;
      case SeqTerm::Restrict:
        if (t->binder == y) return false;
        p.push_back(-1);
        if (find_call(t->body, y, p)) return true;
        p.pop_back();
        return false;
      case SeqTerm::Guard:
        p.push_back(-1);
        if (find_call(t->body, y, p)) return true;
        p.pop_back();
        return false;
    }
    return false;
  }

  // Rewrite *slot so that y occurs free in the subterm at `base`.
  // *slot must be a live body/thread inside s_; mutations re-fetch through it.
  void use_name(TermPtr& slot, const TermPath& base, NameId y) {
    TermPtr sub = get_sub(slot, base);
    TermPath p;
    if (find_stop(sub, y, p)) {
      std::string sid = fresh_eq_name(s_, "Sink");
      Equation sink;
      NameId g = fresh_name(s_, y);
      s_.name_kind[g] = NameKind::Formal;
      sink.formals = {g};
      sink.body = SeqTerm::stop();
      s_.equations[sid] = std::move(sink);
      s_.eq_order.push_back(sid);
      TermPath full = base;
      full.insert(full.end(), p.begin(), p.end());
      slot = replace_sub(slot, full, SeqTerm::call(sid, {y}));
      return;
    }
    p.clear();
    bool found = find_call(sub, y, p);
    assert(found && "finite term must end in Stop or a call");
    (void)found;
    TermPath full = base;
    full.insert(full.end(), p.begin(), p.end());
    std::string id = get_sub(slot, full)->callee;

    size_t pos = (size_t)-1;
    for (size_t cand : relays_[id]) {
      const auto& args = get_sub(slot, full)->args;
      if (cand < args.size() && args[cand] == dummy()) {
        pos = cand;
        break;
      }
    }
    if (pos == (size_t)-1) {
      // new relay formal on the callee; pad every existing call site
      NameId g = fresh_name(s_, y);
      s_.name_kind[g] = NameKind::Formal;
      pos = s_.equations.at(id).formals.size();
      s_.equations.at(id).formals.push_back(g);
      add_dummy_arg(id, pos);
      relays_[id].push_back(pos);
      // the relay formal must itself occur in the callee body
      TermPath root;
      use_name(s_.equations.at(id).body, root, g);
    }
    TermPtr site = get_sub(slot, full);
    std::vector<NameId> args = site->args;
    while (args.size() <= pos) args.push_back(dummy());
    args[pos] = y;
    slot = replace_sub(slot, full, SeqTerm::call(id, std::move(args)));
  }

  // Give every existing call of `id` a dummy argument at the new position.
  void add_dummy_arg(const std::string& id, size_t pos) {
    auto patch = [&](const TermPtr& t, auto&& self) -> TermPtr {
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
          std::vector<NameId> args = t->args;
          while (args.size() <= pos) args.push_back(dummy());
          return SeqTerm::call(t->callee, std::move(args));
        }
        case SeqTerm::Restrict:
          return SeqTerm::restrict(t->binder, self(t->body, self));
        case SeqTerm::Guard:
          return SeqTerm::guard(t->gx, t->gy, t->positive,
                                self(t->body, self));
      }
      return t;
    };
    for (const auto& eid : s_.eq_order) {
      Equation& e = s_.equations.at(eid);
      e.body = patch(e.body, patch);
    }
    for (auto& th : s_.threads) th = patch(th, patch);
  }
};

}  // namespace detail

// Make equation bodies mention exactly their formals, ensure receive binders
// occur in their continuations, drop unused restrictions, and wrap each
// thread in an entry equation Init_i with its initial substitution sigma_i.
inline InitResult introduce_init_equations(const FcpSpec& in) {
  FcpSpec s = in;

  // thread-leading restrictions join the outer list so entry bodies are
  // choices or calls
  for (auto& th : s.threads) {
    while (th->kind == SeqTerm::Restrict) {
      s.outer_restrictions.push_back(th->binder);
      th = th->body;
    }
  }

  for (const auto& id : s.eq_order)
    s.equations.at(id).body =
        detail::drop_dead_restrictions(s.equations.at(id).body);
  for (auto& th : s.threads) th = detail::drop_dead_restrictions(th);
  {
    std::set<NameId> used;
    for (const auto& th : s.threads) {
      std::set<NameId> fn = free_names(th);
      used.insert(fn.begin(), fn.end());
    }
    std::vector<NameId> keep;
    for (NameId r : s.outer_restrictions)
      if (used.count(r)) keep.push_back(r);
    s.outer_restrictions = std::move(keep);
  }

  detail::BinderFixer(s).run();

  // Thread public names through equations until fn(body) = formals. Each
  // equation remembers which formal carries which public name, so a call
  // site inside an equation that already has a carrier passes the carrier
  // instead of reintroducing the public name.
  std::map<std::string, std::map<NameId, NameId>> carrier;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& id : s.eq_order) {
      Equation& e = s.equations.at(id);
      std::set<NameId> fn = free_names(e.body);
      for (NameId f : e.formals) fn.erase(f);
      if (fn.empty()) continue;
      changed = true;
      for (NameId p : fn) {
        NameId fp = detail::fresh_name(s, p);
        s.name_kind[fp] = NameKind::Formal;
        carrier[id][p] = fp;
        e.body = detail::subst_name(e.body, p, fp);
        size_t pos = e.formals.size();
        e.formals.push_back(fp);
        auto patch = [&](const TermPtr& t, NameId arg,
                         auto&& self) -> TermPtr {
          switch (t->kind) {
            case SeqTerm::Choice: {
              if (t->branches.empty()) return t;
              std::vector<Branch> bs;
              for (const auto& b : t->branches)
                bs.push_back(Branch{b.pre, self(b.cont, arg, self)});
              return SeqTerm::choice(std::move(bs));
            }
            case SeqTerm::Call: {
              if (t->callee != id) return t;
              std::vector<NameId> args = t->args;
              while (args.size() <= pos) args.push_back(arg);
              return SeqTerm::call(t->callee, std::move(args));
            }
            case SeqTerm::Restrict:
              return SeqTerm::restrict(t->binder, self(t->body, arg, self));
            case SeqTerm::Guard:
              return SeqTerm::guard(t->gx, t->gy, t->positive,
                                    self(t->body, arg, self));
          }
          return t;
        };
        for (const auto& eid : s.eq_order) {
          Equation& other = s.equations.at(eid);
          NameId arg = p;
          auto cit = carrier.find(eid);
          if (cit != carrier.end()) {
            auto nit = cit->second.find(p);
            if (nit != cit->second.end()) arg = nit->second;
          }
          other.body = patch(other.body, arg, patch);
        }
        for (auto& th : s.threads) th = patch(th, p, patch);
      }
    }
  }

  // entry equations
  InitResult res;
  for (size_t i = 0; i < s.threads.size(); ++i) {
    TermPtr t = s.threads[i];
    std::set<NameId> fn = free_names(t);
    std::string iid =
        detail::fresh_eq_name(s, "Init_" + std::to_string(i + 1));
    Equation init;
    std::map<NameId, NameId> sigma;
    std::vector<NameId> actuals;
    TermPtr body = t;
    for (NameId n : fn) {
      NameId f = detail::fresh_name(s, n);
      s.name_kind[f] = NameKind::Formal;
      body = detail::subst_name(body, n, f);
      init.formals.push_back(f);
      sigma[f] = n;
      actuals.push_back(n);
    }
    init.body = body;
    s.equations[iid] = std::move(init);
    s.eq_order.push_back(iid);
    s.threads[i] = SeqTerm::call(iid, actuals);
    res.sigmas.push_back(std::move(sigma));
    res.init_ids.push_back(iid);
  }

  res.spec = validate_no_clash(std::move(s)).spec;
  return res;
}

// Full pipeline used by the translator front end.
struct NormalizeOptions {
  bool drop_main_restrictions = true;
};

inline FcpSpec normalize_base(const FcpSpec& validated,
                              const NormalizeOptions& opts = {}) {
  FcpSpec s = replicate_equations(validated);
  s = eliminate_self_calls(s);
  if (opts.drop_main_restrictions) s = drop_main_restrictions(s);
  return s;
}

}  // namespace fcp2pn

#endif
