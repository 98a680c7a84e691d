// Verified marking symmetries for translated nets.
//
// The fresh-value pool makes a translated net symmetric: the pool values
// are interchangeable, so permuting them permutes substitution places
// without changing behaviour. The helpers here first derive candidate
// value groups from place names, then VERIFY that every transposition
// inside a group really is an automorphism: the transition set maps onto
// itself, the initial marking is fixed, and the substitution-marking
// constraints map onto themselves. Sweeps that canonicalize markings
// before duplicate detection then visit one representative per orbit,
// and the verified automorphisms guarantee that safety, invariant and
// deadlock verdicts carry over to the whole net.
//
// Two symmetry shapes are supported. SymmetrySpec covers independent
// blocks (pool values): a permutation moves whole blocks and nothing
// ties one block's places to another's. LinkedSymmetry covers linked
// units (interchangeable threads together with the values they own):
// some places carry TWO unit indices, e.g. a row of unit i holding the
// value of unit j, and a permutation acts on both indices at once.
// Sorting block signatures is canonical for the first shape; for linked
// units the representative is computed by signature refinement, which
// is deterministic and maps a marking into its own orbit, so duplicate
// detection on representatives is sound even where refinement fails to
// merge an orbit completely.

#ifndef FCP2PN_SYMMETRY_HPP
#define FCP2PN_SYMMETRY_HPP

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fcp2pn/petri.hpp"

namespace fcp2pn {

struct SymmetrySpec {
  // groups[g][b] = the places of one interchangeable unit (block), in
  // matching order across the blocks of a group
  std::vector<std::vector<std::vector<int>>> groups;

  bool empty() const { return groups.empty(); }
};

// Candidate groups from the "_n<k>" suffix the translator gives every
// pool-indexed place. Values are grouped only when they touch exactly
// the same row prefixes, so partially pruned domains split into separate
// groups instead of producing a bogus permutation. The result is only a
// candidate: callers must run verify_symmetry before relying on it.
inline SymmetrySpec pool_symmetry_candidate(const PetriNet& net) {
  std::map<int, std::map<std::string, int>> by_value;
  for (int i = 0; i < (int)net.places.size(); ++i) {
    const std::string& name = net.places[(size_t)i].name;
    size_t pos = name.rfind("_n");
    if (pos == std::string::npos || pos + 2 >= name.size()) continue;
    bool digits = true;
    for (size_t j = pos + 2; j < name.size(); ++j)
      digits = digits && name[j] >= '0' && name[j] <= '9';
    if (!digits) continue;
    int v = std::stoi(name.substr(pos + 2));
    by_value[v][name.substr(0, pos)] = i;
  }
  std::map<std::vector<std::string>, std::vector<int>> partition;
  for (const auto& [v, rows] : by_value) {
    std::vector<std::string> keys;
    for (const auto& [prefix, p] : rows) keys.push_back(prefix);
    partition[keys].push_back(v);
  }
  SymmetrySpec sym;
  for (const auto& [keys, values] : partition) {
    if (values.size() < 2) continue;
    std::vector<std::vector<int>> blocks;
    for (int v : values) {
      std::vector<int> block;
      for (const std::string& prefix : keys)
        block.push_back(by_value[v][prefix]);
      blocks.push_back(std::move(block));
    }
    sym.groups.push_back(std::move(blocks));
  }
  return sym;
}

namespace detail {

inline bool is_automorphism(const PetriNet& net, const std::vector<int>& perm,
                            const SmConstraints* sm) {
  auto apply = [&](const std::vector<int>& ps) {
    std::vector<int> out;
    out.reserve(ps.size());
    for (int p : ps) out.push_back(perm[(size_t)p]);
    std::sort(out.begin(), out.end());
    return out;
  };
  // the transition set maps onto itself (as a multiset of arc pairs)
  std::map<std::pair<std::vector<int>, std::vector<int>>, int> count;
  for (const Transition& t : net.transitions) ++count[{t.pre, t.post}];
  for (const Transition& t : net.transitions)
    if (--count[{apply(t.pre), apply(t.post)}] < 0) return false;
  // the initial marking is fixed
  for (int p = 0; p < (int)net.places.size(); ++p)
    if (net.initial.test(p) != net.initial.test(perm[(size_t)p]))
      return false;
  if (sm) {
    std::map<std::pair<std::vector<int>, int>, int> rest;
    for (const auto& g : sm->rest) ++rest[{g.eq_places, g.star_place}];
    for (const auto& g : sm->rest)
      if (--rest[{apply(g.eq_places), perm[(size_t)g.star_place]}] < 0)
        return false;
    std::map<std::vector<int>, int> bind;
    for (const auto& g : sm->bind) ++bind[g];
    for (const auto& g : sm->bind)
      if (--bind[apply(g)] < 0) return false;
    std::map<std::pair<int, int>, int> compl_pairs;
    for (const auto& c : sm->complement) ++compl_pairs[{c.eq, c.neq}];
    for (const auto& c : sm->complement)
      if (--compl_pairs[{perm[(size_t)c.eq], perm[(size_t)c.neq]}] < 0)
        return false;
  }
  return true;
}

}  // namespace detail

// Checks that swapping any two adjacent blocks of any group is an
// automorphism; adjacent transpositions generate the full symmetric
// group per group, so this certifies the whole candidate.
inline bool verify_symmetry(const PetriNet& net, const SymmetrySpec& sym,
                            const SmConstraints* sm = nullptr) {
  std::vector<int> perm((size_t)net.places.size());
  for (const auto& blocks : sym.groups) {
    for (size_t b = 0; b + 1 < blocks.size(); ++b) {
      if (blocks[b].size() != blocks[b + 1].size()) return false;
      for (size_t p = 0; p < perm.size(); ++p) perm[p] = (int)p;
      for (size_t j = 0; j < blocks[b].size(); ++j) {
        perm[(size_t)blocks[b][j]] = blocks[b + 1][j];
        perm[(size_t)blocks[b + 1][j]] = blocks[b][j];
      }
      if (!detail::is_automorphism(net, perm, sm)) return false;
    }
  }
  return true;
}

// Orbit representative: per group, the blocks' bit signatures are read
// off, sorted, and written back, which is canonical because the verified
// group acts as the full symmetric group on each group's blocks.
class Canonicalizer {
 public:
  explicit Canonicalizer(const SymmetrySpec& sym) : sym_(sym) {
    for (const auto& blocks : sym_.groups)
      sigs_.emplace_back(blocks.size(), std::string());
  }

  void apply(Marking& m) {
    for (size_t g = 0; g < sym_.groups.size(); ++g) {
      const auto& blocks = sym_.groups[g];
      auto& sigs = sigs_[g];
      for (size_t b = 0; b < blocks.size(); ++b) {
        sigs[b].assign(blocks[b].size(), '0');
        for (size_t j = 0; j < blocks[b].size(); ++j)
          if (m.test(blocks[b][j])) sigs[b][j] = '1';
      }
      std::sort(sigs.begin(), sigs.end());
      for (size_t b = 0; b < blocks.size(); ++b)
        for (size_t j = 0; j < blocks[b].size(); ++j) {
          if (sigs[b][j] == '1')
            m.set(blocks[b][j]);
          else
            m.reset(blocks[b][j]);
        }
    }
  }

 private:
  SymmetrySpec sym_;
  std::vector<std::vector<std::string>> sigs_;
};

// Linked units: permuting the units permutes each unit's own places
// elementwise and acts on pair-indexed places in both coordinates.
struct LinkedSymmetry {
  // units[i] = the places owned by unit i alone, in matching order
  std::vector<std::vector<int>> units;
  // matrices[f][i][j] = the place indexed by the ordered pair (i, j),
  // or -1 where no such place exists (the hole pattern must itself be
  // permutation invariant, which verification checks implicitly)
  std::vector<std::vector<std::vector<int>>> matrices;

  bool empty() const { return units.size() < 2; }
};

namespace detail {

// Full place permutation induced by the unit permutation pi. perm must
// come in as the identity; returns false on a shape mismatch.
inline bool linked_perm(const LinkedSymmetry& ls, const std::vector<size_t>& pi,
                        std::vector<int>& perm) {
  for (size_t i = 0; i < ls.units.size(); ++i) {
    if (ls.units[i].size() != ls.units[pi[i]].size()) return false;
    for (size_t j = 0; j < ls.units[i].size(); ++j)
      perm[(size_t)ls.units[i][j]] = ls.units[pi[i]][j];
  }
  for (const auto& mat : ls.matrices)
    for (size_t i = 0; i < mat.size(); ++i)
      for (size_t j = 0; j < mat[i].size(); ++j) {
        int src = mat[i][j], dst = mat[pi[i]][pi[j]];
        if ((src < 0) != (dst < 0)) return false;
        if (src >= 0) perm[(size_t)src] = dst;
      }
  return true;
}

}  // namespace detail

// Extends a linked candidate to the communication middle places, which
// carry no index in their names: a middle place inherits the units of
// the non-auxiliary places around its producing transition and around
// the transitions that consume it, and middles with the same arc shape
// line up into one family across units (or unit pairs). The producer
// alone can be ambiguous (both directions of a symmetric exchange share
// one input set), so the consumers take part in the shape, and for pair
// middles the two slot orders are rendered and the lexicographically
// smaller one is kept, which names the slots by role rather than by
// index. Returns false when some middle cannot be placed; the caller
// should then discard the candidate.
inline bool complete_linked_with_aux(const PetriNet& net, LinkedSymmetry& ls) {
  const size_t k = ls.units.size();
  const size_t np = net.places.size();
  std::vector<int> unit_of(np, -1), pos_of(np, -1);
  std::vector<char> assigned(np, 0);
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < ls.units[i].size(); ++j) {
      unit_of[(size_t)ls.units[i][j]] = (int)i;
      pos_of[(size_t)ls.units[i][j]] = (int)j;
      assigned[(size_t)ls.units[i][j]] = 1;
    }
  struct Cell {
    int f = -1, i = -1, j = -1;
  };
  std::vector<Cell> cell_of(np);
  for (size_t f = 0; f < ls.matrices.size(); ++f)
    for (size_t i = 0; i < ls.matrices[f].size(); ++i)
      for (size_t j = 0; j < ls.matrices[f][i].size(); ++j) {
        int p = ls.matrices[f][i][j];
        if (p < 0) continue;
        cell_of[(size_t)p] = {(int)f, (int)i, (int)j};
        assigned[(size_t)p] = 1;
      }

  std::vector<int> producer(np, -1);
  std::vector<std::vector<int>> consumers(np);
  for (int t = 0; t < (int)net.transitions.size(); ++t) {
    for (int p : net.transitions[(size_t)t].post)
      if (net.places[(size_t)p].role == Place::Aux && !assigned[(size_t)p])
        producer[(size_t)p] = producer[(size_t)p] == -1 ? t : -2;
    for (int p : net.transitions[(size_t)t].pre)
      if (net.places[(size_t)p].role == Place::Aux && !assigned[(size_t)p])
        consumers[(size_t)p].push_back(t);
  }

  // shape string -> (aux place, unit indices in slot order)
  std::map<std::string, std::vector<std::pair<int, std::vector<int>>>> fam;
  for (int p = 0; p < (int)np; ++p) {
    if (net.places[(size_t)p].role != Place::Aux || assigned[(size_t)p])
      continue;
    if (producer[(size_t)p] < 0) return false;
    const Transition& prod = net.transitions[(size_t)producer[(size_t)p]];

    // the middle's own units are those around the producer
    std::vector<int> vars;
    for (int q : prod.pre)
      for (int u : {unit_of[(size_t)q], cell_of[(size_t)q].i,
                    cell_of[(size_t)q].j})
        if (u >= 0 && std::find(vars.begin(), vars.end(), u) == vars.end())
          vars.push_back(u);
    if (vars.empty() || vars.size() > 2) return false;

    // atoms mention slots, not unit indices; foreign units render as *
    auto render = [&](const std::vector<int>& order) {
      auto slot = [&](int u) {
        for (size_t v = 0; v < order.size(); ++v)
          if (order[v] == u) return "#" + std::to_string(v);
        return std::string("#*");
      };
      auto atom = [&](int q, char side) {
        std::string a(1, side);
        if (q == p) return a + "self";
        if (net.places[(size_t)q].role == Place::Aux) return a + "aux";
        if (unit_of[(size_t)q] >= 0)
          return a + "u" + std::to_string(pos_of[(size_t)q]) +
                 slot(unit_of[(size_t)q]);
        if (cell_of[(size_t)q].f >= 0)
          return a + "m" + std::to_string(cell_of[(size_t)q].f) +
                 slot(cell_of[(size_t)q].i) + slot(cell_of[(size_t)q].j);
        return a + "f" + std::to_string(q);
      };
      auto trans = [&](const Transition& t) {
        std::vector<std::string> atoms;
        for (int q : t.pre) atoms.push_back(atom(q, '<'));
        for (int q : t.post) atoms.push_back(atom(q, '>'));
        std::sort(atoms.begin(), atoms.end());
        std::string s;
        for (const auto& a : atoms) s += a + ".";
        return s;
      };
      std::string shape = trans(prod);
      std::vector<std::string> cons;
      for (int t : consumers[(size_t)p]) {
        cons.push_back(trans(net.transitions[(size_t)t]));
      }
      std::sort(cons.begin(), cons.end());
      for (const auto& c : cons) shape += "|" + c;
      return shape;
    };

    std::string shape = render(vars);
    if (vars.size() == 2) {
      std::vector<int> rev{vars[1], vars[0]};
      std::string alt = render(rev);
      if (alt < shape) {
        shape = std::move(alt);
        vars = std::move(rev);
      }
    }
    fam[shape].push_back({p, std::move(vars)});
  }

  for (auto& [shape, members] : fam) {
    const size_t arity = members[0].second.size();
    if (arity == 1) {
      if (members.size() != k) return false;
      std::vector<int> per_unit(k, -1);
      for (auto& [p, v] : members) {
        if (v.size() != 1 || per_unit[(size_t)v[0]] != -1) return false;
        per_unit[(size_t)v[0]] = p;
      }
      for (size_t i = 0; i < k; ++i) ls.units[i].push_back(per_unit[i]);
    } else if (arity == 2) {
      std::vector<std::vector<int>> mat(k, std::vector<int>(k, -1));
      for (auto& [p, v] : members) {
        if (v.size() != 2 || v[0] == v[1]) return false;
        if (mat[(size_t)v[0]][(size_t)v[1]] != -1) return false;
        mat[(size_t)v[0]][(size_t)v[1]] = p;
      }
      ls.matrices.push_back(std::move(mat));
    } else {
      return false;
    }
  }
  return true;
}

// Adjacent unit transpositions generate the full symmetric group, and
// the pair action composes, so checking them certifies the candidate.
inline bool verify_linked_symmetry(const PetriNet& net,
                                   const LinkedSymmetry& ls,
                                   const SmConstraints* sm = nullptr) {
  const size_t k = ls.units.size();
  if (k < 2) return false;
  for (const auto& mat : ls.matrices) {
    if (mat.size() != k) return false;
    for (const auto& row : mat)
      if (row.size() != k) return false;
  }
  std::vector<int> perm(net.places.size());
  std::vector<size_t> pi(k);
  for (size_t a = 0; a + 1 < k; ++a) {
    for (size_t i = 0; i < k; ++i) pi[i] = i;
    std::swap(pi[a], pi[a + 1]);
    for (size_t p = 0; p < perm.size(); ++p) perm[p] = (int)p;
    if (!detail::linked_perm(ls, pi, perm)) return false;
    if (!detail::is_automorphism(net, perm, sm)) return false;
  }
  return true;
}

// Orbit-contracting representative for linked units. Units are ordered
// by a signature that starts from each unit's own bits plus matrix row
// and column counts, then is refined against the emerging order (counts
// per signature class, so the refinement itself is order independent);
// remaining ties keep their current order. The result is obtained from
// the input by a group element and is deterministic, which is all a
// sweep needs; where refinement cannot separate symmetric units the
// sweep merely visits a few extra representatives of the same orbit.
class LinkedCanonicalizer {
 public:
  explicit LinkedCanonicalizer(const LinkedSymmetry& ls)
      : ls_(ls), k_(ls.units.size()) {
    keys_.resize(k_);
    order_.resize(k_);
    cls_.resize(k_);
    ubits_.resize(k_);
    for (size_t i = 0; i < k_; ++i) ubits_[i].resize(ls_.units[i].size());
    mbits_.resize(ls_.matrices.size());
    for (auto& mb : mbits_) mb.assign(k_ * k_, 0);
  }

  void apply(Marking& m) {
    for (size_t i = 0; i < k_; ++i) {
      std::string& key = keys_[i];
      key.clear();
      for (int p : ls_.units[i]) key += m.test(p) ? '1' : '0';
      for (const auto& mat : ls_.matrices) {
        int row = 0, col = 0;
        for (size_t j = 0; j < k_; ++j) {
          if (mat[i][j] >= 0 && m.test(mat[i][j])) ++row;
          if (mat[j][i] >= 0 && m.test(mat[j][i])) ++col;
        }
        key += (char)('A' + row);
        key += (char)('A' + col);
        key += mat[i][i] >= 0 && m.test(mat[i][i]) ? '1' : '0';
      }
    }
    sort_order();
    for (int round = 0; round < 3 && !ls_.matrices.empty(); ++round) {
      int classes = 1;
      cls_[order_[0]] = 0;
      for (size_t r = 1; r < k_; ++r) {
        if (keys_[order_[r]] != keys_[order_[r - 1]]) ++classes;
        cls_[order_[r]] = classes - 1;
      }
      if (classes == (int)k_) break;
      for (size_t i = 0; i < k_; ++i)
        for (const auto& mat : ls_.matrices)
          for (int c = 0; c < classes; ++c) {
            int row = 0, col = 0;
            for (size_t j = 0; j < k_; ++j) {
              if (cls_[j] != c) continue;
              if (mat[i][j] >= 0 && m.test(mat[i][j])) ++row;
              if (mat[j][i] >= 0 && m.test(mat[j][i])) ++col;
            }
            keys_[i] += (char)('A' + row);
            keys_[i] += (char)('A' + col);
          }
      sort_order();
    }
    // gather, then scatter: rank r receives the content of unit order[r]
    for (size_t r = 0; r < k_; ++r)
      for (size_t j = 0; j < ls_.units[r].size(); ++j)
        ubits_[r][j] = m.test(ls_.units[order_[r]][j]) ? 1 : 0;
    for (size_t f = 0; f < ls_.matrices.size(); ++f)
      for (size_t r = 0; r < k_; ++r)
        for (size_t s = 0; s < k_; ++s) {
          int src = ls_.matrices[f][order_[r]][order_[s]];
          mbits_[f][r * k_ + s] = src >= 0 && m.test(src) ? 1 : 0;
        }
    for (size_t r = 0; r < k_; ++r)
      for (size_t j = 0; j < ls_.units[r].size(); ++j) {
        if (ubits_[r][j])
          m.set(ls_.units[r][j]);
        else
          m.reset(ls_.units[r][j]);
      }
    for (size_t f = 0; f < ls_.matrices.size(); ++f)
      for (size_t r = 0; r < k_; ++r)
        for (size_t s = 0; s < k_; ++s) {
          int dst = ls_.matrices[f][r][s];
          if (dst < 0) continue;
          if (mbits_[f][r * k_ + s])
            m.set(dst);
          else
            m.reset(dst);
        }
  }

 private:
  void sort_order() {
    for (size_t i = 0; i < k_; ++i) order_[i] = i;
    std::sort(order_.begin(), order_.end(), [&](size_t a, size_t b) {
      if (keys_[a] != keys_[b]) return keys_[a] < keys_[b];
      return a < b;
    });
  }

  LinkedSymmetry ls_;
  size_t k_;
  std::vector<std::string> keys_;
  std::vector<size_t> order_;
  std::vector<int> cls_;
  std::vector<std::vector<char>> ubits_;
  std::vector<std::vector<char>> mbits_;
};

}  // namespace fcp2pn

#endif
