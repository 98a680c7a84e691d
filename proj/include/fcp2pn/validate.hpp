// No-clash validation: every name is bound at most once across the whole
// specification, bound names are disjoint from free names and formals, and
// formal lists have no repeats. Violations are repaired deterministically by
// renaming the offending binder to base#k with the smallest unused k, in
// source order (equations first, then the main term).

#ifndef FCP2PN_VALIDATE_HPP
#define FCP2PN_VALIDATE_HPP

#include <string>
#include <vector>

#include "fcp2pn/ast.hpp"

namespace fcp2pn {

struct Rename {
  NameId from, to;
};

struct ValidationResult {
  FcpSpec spec;
  std::vector<Rename> renames;
};

namespace detail {

// Substitute free occurrences of `from` by `to`; stops below a rebinding.
inline TermPtr subst_name(const TermPtr& t, NameId from, NameId to) {
  auto sub1 = [&](NameId n) { return n == from ? to : n; };
  switch (t->kind) {
    case SeqTerm::Choice: {
      if (t->branches.empty()) return t;
      std::vector<Branch> bs;
      for (const auto& b : t->branches) {
        Prefix p = b.pre;
        if (p.kind != Prefix::Tau) p.chan = sub1(p.chan);
        bool shadowed = false;
        if (p.kind == Prefix::Send)
          for (auto& n : p.names) n = sub1(n);
        if (p.kind == Prefix::Recv)
          for (auto n : p.names)
            if (n == from) shadowed = true;
        TermPtr cont = shadowed ? b.cont : subst_name(b.cont, from, to);
        bs.push_back(Branch{std::move(p), std::move(cont)});
      }
      return SeqTerm::choice(std::move(bs));
    }
    case SeqTerm::Call: {
      std::vector<NameId> args = t->args;
      for (auto& n : args) n = sub1(n);
      return SeqTerm::call(t->callee, std::move(args));
    }
    case SeqTerm::Restrict: {
      if (t->binder == from) return t;
      return SeqTerm::restrict(t->binder, subst_name(t->body, from, to));
    }
    case SeqTerm::Guard:
      return SeqTerm::guard(sub1(t->gx), sub1(t->gy), t->positive,
                            subst_name(t->body, from, to));
  }
  return t;
}

inline bool term_has_guard(const TermPtr& t) {
  switch (t->kind) {
    case SeqTerm::Choice:
      for (const auto& b : t->branches)
        if (term_has_guard(b.cont)) return true;
      return false;
    case SeqTerm::Call:
      return false;
    case SeqTerm::Restrict:
      return term_has_guard(t->body);
    case SeqTerm::Guard:
      return true;
  }
  return false;
}

class NoClash {
 public:
  NoClash(FcpSpec& spec, std::vector<Rename>& renames)
      : spec_(spec), renames_(renames) {
    for (const auto& id : spec_.eq_order) {
      const Equation& e = spec_.equations.at(id);
      std::set<NameId> fn = free_names(e.body);
      for (NameId f : e.formals) fn.erase(f);
      free_.insert(fn.begin(), fn.end());
    }
    std::set<NameId> mainFree;
    for (const auto& th : spec_.threads) {
      std::set<NameId> fn = free_names(th);
      mainFree.insert(fn.begin(), fn.end());
    }
    for (NameId r : spec_.outer_restrictions) mainFree.erase(r);
    free_.insert(mainFree.begin(), mainFree.end());
    used_ = free_;
  }

  void run() {
    for (const auto& id : spec_.eq_order) {
      Equation& e = spec_.equations.at(id);
      for (size_t i = 0; i < e.formals.size(); ++i) {
        NameId f = e.formals[i];
        if (used_.count(f)) {
          bool dupInList = false;
          for (size_t j = 0; j < i; ++j)
            if (e.formals[j] == f) dupInList = true;
          NameId nf = fresh(f);
          // A repeated formal is dead (occurrences bind to the first copy),
          // so only rewrite the body when the clash came from elsewhere.
          if (!dupInList) e.body = subst_name(e.body, f, nf);
          e.formals[i] = nf;
          renames_.push_back({f, nf});
          used_.insert(nf);
        } else {
          used_.insert(f);
        }
      }
      e.body = walk(e.body);
    }
    for (size_t i = 0; i < spec_.outer_restrictions.size(); ++i) {
      NameId r = spec_.outer_restrictions[i];
      if (used_.count(r)) {
        NameId nr = fresh(r);
        for (auto& th : spec_.threads) th = subst_name(th, r, nr);
        // an inner duplicate outer restriction shadows; leave it for its turn
        spec_.outer_restrictions[i] = nr;
        renames_.push_back({r, nr});
        used_.insert(nr);
      } else {
        used_.insert(r);
      }
    }
    for (auto& th : spec_.threads) th = walk(th);
    classify();
  }

 private:
  NameId fresh(NameId base) {
    std::string b = spec_.text(base);
    size_t h = b.rfind('#');
    if (h != std::string::npos &&
        b.find_first_not_of("0123456789", h + 1) == std::string::npos &&
        h + 1 < b.size())
      b = b.substr(0, h);
    for (int k = 1;; ++k) {
      std::string cand = b + "#" + std::to_string(k);
      if (spec_.find(cand) == -1) return spec_.intern(cand);
    }
  }

  TermPtr walk(const TermPtr& t) {
    switch (t->kind) {
      case SeqTerm::Choice: {
        if (t->branches.empty()) return t;
        std::vector<Branch> bs;
        for (const auto& b : t->branches) {
          Prefix p = b.pre;
          TermPtr cont = b.cont;
          if (p.kind == Prefix::Recv) {
            for (auto& y : p.names) {
              if (used_.count(y)) {
                NameId ny = fresh(y);
                cont = subst_name(cont, y, ny);
                renames_.push_back({y, ny});
                y = ny;
              }
              used_.insert(y);
              inputs_.insert(y);
            }
          }
          bs.push_back(Branch{std::move(p), walk(cont)});
        }
        return SeqTerm::choice(std::move(bs));
      }
      case SeqTerm::Call:
        return t;
      case SeqTerm::Restrict: {
        NameId r = t->binder;
        TermPtr body = t->body;
        if (used_.count(r)) {
          NameId nr = fresh(r);
          body = subst_name(body, r, nr);
          renames_.push_back({r, nr});
          r = nr;
        }
        used_.insert(r);
        restricted_.insert(r);
        return SeqTerm::restrict(r, walk(body));
      }
      case SeqTerm::Guard:
        return SeqTerm::guard(t->gx, t->gy, t->positive, walk(t->body));
    }
    return t;
  }

  void classify() {
    for (auto& k : spec_.name_kind) k = NameKind::Unused;
    for (NameId n : free_) spec_.name_kind[n] = NameKind::Public;
    for (NameId n : inputs_) spec_.name_kind[n] = NameKind::Input;
    for (NameId n : restricted_) spec_.name_kind[n] = NameKind::Restricted;
    for (NameId r : spec_.outer_restrictions)
      spec_.name_kind[r] = NameKind::Restricted;
    for (const auto& id : spec_.eq_order)
      for (NameId f : spec_.equations.at(id).formals)
        spec_.name_kind[f] = NameKind::Formal;
  }

  FcpSpec& spec_;
  std::vector<Rename>& renames_;
  std::set<NameId> free_, used_, inputs_, restricted_;
};

}  // namespace detail

inline ValidationResult validate_no_clash(FcpSpec spec) {
  if (!spec.extensions) {
    for (const auto& th : spec.threads)
      if (detail::term_has_guard(th))
        throw std::runtime_error("match/mismatch requires the extensions flag");
    for (const auto& id : spec.eq_order)
      if (detail::term_has_guard(spec.equations.at(id).body))
        throw std::runtime_error("match/mismatch requires the extensions flag");
  }
  ValidationResult res{std::move(spec), {}};
  detail::NoClash(res.spec, res.renames).run();
  return res;
}

}  // namespace fcp2pn

#endif
