// Translation of a finite-control process specification into a safe
// low-level Petri net.
//
// The net is the composition of a substitution layer (places recording the
// current value of every nonpublic name, plus complement and
// reference-counter places) with one control-flow automaton per thread,
// synchronised on matching send/receive prefixes and restricted to internal
// transitions. Values are the public names plus a bounded pool of fresh
// indices; domain analysis prunes the enumeration per name, and the
// name-abstraction rows let distinct names share substitution places.

#ifndef FCP2PN_TRANSLATOR_HPP
#define FCP2PN_TRANSLATOR_HPP

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fcp2pn/analysis.hpp"
#include "fcp2pn/ast.hpp"
#include "fcp2pn/control.hpp"
#include "fcp2pn/normalize.hpp"
#include "fcp2pn/petri.hpp"
#include "fcp2pn/validate.hpp"

namespace fcp2pn {

struct BudgetExhausted : std::runtime_error {
  BudgetExhausted(size_t need, size_t have)
      : std::runtime_error("initial substitution needs " +
                           std::to_string(need) + " fresh values, pool has " +
                           std::to_string(have)) {}
};

struct MissingPlace : std::runtime_error {
  explicit MissingPlace(const std::string& what)
      : std::runtime_error("substitution place missing: " + what) {}
};

struct NotSupported : std::runtime_error {
  explicit NotSupported(const std::string& what)
      : std::runtime_error("not supported: " + what) {}
};

struct CommandClash : std::runtime_error {
  explicit CommandClash(const std::string& t)
      : std::runtime_error("two commands on one row in transition " + t) {}
};

struct TranslateOptions {
  bool split = true;            // two-stage communication
  bool abstraction = true;      // share substitution rows across names
  bool reorder = true;          // align call parameters before abstracting
  bool unmap_sharing = true;    // share unmap chains across call sites
  bool rough_domains = false;   // skip the flow analysis
  bool rough_new_bound = false; // skip the per-state pool analysis
  int new_bound = -1;           // fixed pool size (-1: computed)
  bool drop_main_restrictions = true;
  bool extensions = false;      // allow guards
};

// A value is either a public name or an index into the fresh pool.
struct Value {
  bool fresh = false;
  int id = -1;  // NameId when public, pool index when fresh
  auto operator<=>(const Value&) const = default;
};

struct Command {
  enum Kind { Map, Unmap, Test, TestNeq } kind;
  int row;
  Value v;
};

// The substitution layer: one row per abstraction class.
struct SubstLayer {
  int num_rows = 0;
  std::vector<bool> row_restricted;       // row holds restriction tokens
  std::vector<std::string> row_label;
  std::map<std::pair<int, Value>, int> eq;   // (row, value) -> place
  std::map<std::pair<int, int>, int> neq;    // (row, pool idx) -> place
  std::vector<int> star;                     // per pool idx: [r* != n]
  SmConstraints sm;
};

struct TranslationReport {
  size_t control_places = 0, subst_places = 0, middle_places = 0;
  size_t nu = 0, tau = 0, sync = 0, split_first = 0, split_second = 0;
  size_t call_map = 0, call_unmap = 0, call_body = 0, guard = 0;
  size_t pool = 0, rows = 0;
  size_t net_size = 0;
};

struct Translation {
  PetriNet net;
  FcpSpec spec;  // the normalized specification the net was built from
  DomainMap domains;
  NewBudget budget;
  int pool = 0;
  Abstraction abstraction;
  std::vector<Skeleton> skeletons;
  SubstLayer subst;
  std::vector<std::vector<int>> control_place;  // [thread][state] -> place
  std::vector<std::vector<int>> stop_places;    // per thread, terminal places
  TranslationReport report;
};

namespace detail {

class Translator {
 public:
  Translator(FcpSpec spec, const TranslateOptions& opt) : opt_(opt) {
    tr_.spec = std::move(spec);
  }

  Translation run() {
    analyze();
    build_rows();
    build_subst();
    build_control_places();
    build_transitions();
    finish();
    return std::move(tr_);
  }

 private:
  TranslateOptions opt_;
  Translation tr_;

  // ---- analyses -------------------------------------------------------

  void analyze() {
    FcpSpec& s = tr_.spec;
    for (const auto& th : s.threads)
      tr_.skeletons.push_back(build_skeleton(s, th));
    tr_.domains = compute_domains(s, opt_.rough_domains);
    tr_.budget =
        compute_new_budget(s, tr_.domains, tr_.skeletons, opt_.rough_new_bound);
    tr_.pool = opt_.new_bound >= 0 ? opt_.new_bound : (int)tr_.budget.total;
    size_t need = s.outer_restrictions.size();
    if (need > (size_t)tr_.pool) throw BudgetExhausted(need, (size_t)tr_.pool);
  }

  void build_rows() {
    FcpSpec& s = tr_.spec;
    if (opt_.abstraction) {
      tr_.abstraction = compute_abstraction(s, true);
      refine_abstraction(tr_.abstraction, s, tr_.skeletons);
    } else {
      tr_.abstraction = compute_abstraction(s, false);
    }
    SubstLayer& sl = tr_.subst;
    sl.num_rows = tr_.abstraction.num_rows;
    sl.row_restricted.assign((size_t)sl.num_rows, false);
    sl.row_label.assign((size_t)sl.num_rows, "");
    for (const auto& [n, r] : tr_.abstraction.row) {
      if (s.kind(n) == NameKind::Restricted) sl.row_restricted[(size_t)r] = true;
      std::string& lbl = sl.row_label[(size_t)r];
      if (lbl.empty() || s.text(n) < lbl) lbl = s.text(n);
    }
  }

  int row(NameId n) const { return tr_.abstraction.row.at(n); }

  // Values a name may take, in a fixed order: publics ascending, then the
  // whole fresh pool when the name's domain contains a restriction token.
  std::vector<Value> values_of(NameId n) const {
    std::vector<Value> out;
    if (tr_.spec.kind(n) == NameKind::Public) {
      out.push_back(Value{false, n});
      return out;
    }
    const std::set<DomValue>& d = tr_.domains.at(n);
    for (const DomValue& v : d)
      if (!v.restr) out.push_back(Value{false, v.name});
    bool restr = false;
    for (const DomValue& v : d) restr |= v.restr;
    if (restr)
      for (int i = 0; i < tr_.pool; ++i) out.push_back(Value{true, i});
    return out;
  }

  static std::vector<Value> intersect(const std::vector<Value>& a,
                                      const std::vector<Value>& b) {
    std::set<Value> bs(b.begin(), b.end());
    std::vector<Value> out;
    for (const Value& v : a)
      if (bs.count(v)) out.push_back(v);
    return out;
  }

  std::string value_text(const Value& v) const {
    return v.fresh ? "n" + std::to_string(v.id + 1) : tr_.spec.text(v.id);
  }

  // ---- substitution layer ---------------------------------------------

  void build_subst() {
    FcpSpec& s = tr_.spec;
    SubstLayer& sl = tr_.subst;
    // per-row value sets: union over member names
    std::vector<std::set<Value>> rowvals((size_t)sl.num_rows);
    for (const auto& [n, r] : tr_.abstraction.row)
      for (const Value& v : values_of(n)) rowvals[(size_t)r].insert(v);

    for (int r = 0; r < sl.num_rows; ++r) {
      for (const Value& v : rowvals[(size_t)r]) {
        if (sl.row_restricted[(size_t)r] && !v.fresh)
          continue;  // restriction tokens never take public values
        Place p;
        p.role = Place::Subst;
        p.name = "eq_" + sl.row_label[(size_t)r] + "_" + value_text(v);
        sl.eq[{r, v}] = tr_.net.add_place(std::move(p));
      }
      if (!sl.row_restricted[(size_t)r]) {
        for (const Value& v : rowvals[(size_t)r]) {
          if (!v.fresh) continue;
          Place p;
          p.role = Place::Subst;
          p.name = "neq_" + sl.row_label[(size_t)r] + "_" + value_text(v);
          sl.neq[{r, v.id}] = tr_.net.add_place(std::move(p));
        }
      }
    }
    for (int i = 0; i < tr_.pool; ++i) {
      Place p;
      p.role = Place::Subst;
      p.name = "star_n" + std::to_string(i + 1);
      sl.star.push_back(tr_.net.add_place(std::move(p)));
    }

    // invariant bookkeeping
    for (int i = 0; i < tr_.pool; ++i) {
      SmConstraints::RestGroup g;
      g.star_place = sl.star[(size_t)i];
      for (int r = 0; r < sl.num_rows; ++r) {
        auto it = sl.eq.find({r, Value{true, i}});
        if (it != sl.eq.end() && sl.row_restricted[(size_t)r])
          g.eq_places.push_back(it->second);
      }
      sl.sm.rest.push_back(std::move(g));
    }
    for (int r = 0; r < sl.num_rows; ++r) {
      std::vector<int> binds;
      for (const auto& [key, pl] : sl.eq)
        if (key.first == r) binds.push_back(pl);
      if (!binds.empty()) sl.sm.bind.push_back(std::move(binds));
    }
    for (const auto& [key, pl] : sl.neq)
      sl.sm.complement.push_back(
          {sl.eq.at({key.first, Value{true, key.second}}), pl});

    // initial marking: outer restrictions take fresh indices in order of
    // appearance; every other complement/counter place starts marked
    Marking m0(0);
    init_marking_ = [this, &s]() {
      SubstLayer& sl2 = tr_.subst;
      Marking m(tr_.net.places.size());
      std::set<int> taken;
      std::map<int, int> bound;  // row -> pool idx (outer restrictions)
      for (size_t i = 0; i < s.outer_restrictions.size(); ++i) {
        int r = row(s.outer_restrictions[i]);
        auto it = sl2.eq.find({r, Value{true, (int)i}});
        if (it == sl2.eq.end())
          throw MissingPlace("initial binding of " +
                             s.text(s.outer_restrictions[i]));
        m.set(it->second);
        taken.insert((int)i);
        bound[r] = (int)i;
      }
      for (int i = 0; i < tr_.pool; ++i)
        if (!taken.count(i)) m.set(sl2.star[(size_t)i]);
      for (const auto& [key, pl] : sl2.neq) m.set(pl);
      return m;
    };
  }

  std::function<Marking()> init_marking_;

  // ---- control places --------------------------------------------------

  void build_control_places() {
    FcpSpec& s = tr_.spec;
    for (size_t th = 0; th < tr_.skeletons.size(); ++th) {
      const Skeleton& sk = tr_.skeletons[th];
      std::vector<int> map((size_t)sk.states.size(), -1);
      // unmap-chain sharing: call states with all arguments consumed behave
      // identically across call sites, keyed by (callee, pending queue)
      std::map<std::pair<std::string, std::vector<NameId>>, int> shared;
      std::vector<int> stops;
      for (size_t st = 0; st < sk.states.size(); ++st) {
        const SkelState& ss = sk.states[st];
        if (opt_.unmap_sharing && ss.node->kind == SeqTerm::Call &&
            ss.pos == 0) {
          auto key = std::make_pair(ss.node->callee, ss.lambda);
          auto it = shared.find(key);
          if (it != shared.end()) {
            map[st] = it->second;
            continue;
          }
        }
        Place p;
        p.role = Place::Control;
        p.thread = (int)th;
        p.stable = ss.stable;
        p.name = "ctl_" + std::to_string(th) + "_" + std::to_string(st);
        int id = tr_.net.add_place(std::move(p));
        map[st] = id;
        if (opt_.unmap_sharing && ss.node->kind == SeqTerm::Call &&
            ss.pos == 0)
          shared[{ss.node->callee, ss.lambda}] = id;
        if (ss.node->kind == SeqTerm::Choice && ss.node->branches.empty())
          stops.push_back(id);
      }
      tr_.control_place.push_back(std::move(map));
      tr_.stop_places.push_back(std::move(stops));
    }
    (void)s;
  }

  // ---- transitions -----------------------------------------------------

  struct Stub {
    int thread;
    int src, dst;          // control places
    NameId chan, payload;  // payload is the binder on the receive side
  };

  void apply_command(Transition& t, const Command& c) {
    SubstLayer& sl = tr_.subst;
    auto eq_place = [&](int r, const Value& v) {
      auto it = sl.eq.find({r, v});
      if (it == sl.eq.end())
        throw MissingPlace("eq " + sl.row_label[(size_t)r] + " " +
                           value_text(v));
      return it->second;
    };
    auto neq_place = [&](int r, int n) {
      auto it = sl.neq.find({r, n});
      if (it == sl.neq.end())
        throw MissingPlace("neq " + sl.row_label[(size_t)r] + " n" +
                           std::to_string(n + 1));
      return it->second;
    };
    switch (c.kind) {
      case Command::Test: {
        int p = eq_place(c.row, c.v);
        t.pre.push_back(p);
        t.post.push_back(p);
        break;
      }
      case Command::TestNeq: {
        int p = neq_place(c.row, c.v.id);
        t.pre.push_back(p);
        t.post.push_back(p);
        break;
      }
      case Command::Map: {
        if (!c.v.fresh) {
          t.post.push_back(eq_place(c.row, c.v));
          break;
        }
        t.post.push_back(eq_place(c.row, c.v));
        if (sl.row_restricted[(size_t)c.row]) {
          // fresh allocation: take the counter and check no input/formal
          // row currently holds this index
          t.pre.push_back(sl.star[(size_t)c.v.id]);
          for (const auto& [key, pl] : sl.neq) {
            if (key.second != c.v.id) continue;
            t.pre.push_back(pl);
            t.post.push_back(pl);
          }
        } else {
          t.pre.push_back(neq_place(c.row, c.v.id));
        }
        break;
      }
      case Command::Unmap: {
        t.pre.push_back(eq_place(c.row, c.v));
        if (c.v.fresh) {
          if (sl.row_restricted[(size_t)c.row])
            t.post.push_back(sl.star[(size_t)c.v.id]);
          else
            t.post.push_back(neq_place(c.row, c.v.id));
        }
        break;
      }
    }
  }

  void emit(int src, int dst, const std::vector<Command>& commands,
            bool observable, const std::string& name, int src2 = -1,
            int dst2 = -1) {
    // identical reads of one row are shared arcs, anything else interferes
    std::map<int, const Command*> rows;
    for (const Command& c : commands) {
      auto [it, fresh_row] = rows.emplace(c.row, &c);
      if (fresh_row) continue;
      const Command& prev = *it->second;
      bool both_reads = (c.kind == Command::Test || c.kind == Command::TestNeq);
      if (!both_reads || prev.kind != c.kind || !(prev.v == c.v))
        throw CommandClash(name);
    }
    Transition t;
    t.name = name;
    t.observable = observable;
    t.pre.push_back(src);
    t.post.push_back(dst);
    if (src2 >= 0) t.pre.push_back(src2);
    if (dst2 >= 0) t.post.push_back(dst2);
    for (const Command& c : commands) apply_command(t, c);
    tr_.net.add_transition(std::move(t));
  }

  // Test command unless the syntactic name is a public literal.
  void maybe_test(std::vector<Command>& cs, NameId n, const Value& v) {
    if (tr_.spec.kind(n) == NameKind::Public) return;
    cs.push_back(Command{Command::Test, row(n), v});
  }

  void build_transitions() {
    FcpSpec& s = tr_.spec;
    std::vector<Stub> sends, recvs;
    std::set<std::string> emitted;  // dedupe under place sharing
    int serial = 0;
    auto fresh_name = [&](const std::string& base) {
      return base + "_" + std::to_string(serial++);
    };

    for (size_t th = 0; th < tr_.skeletons.size(); ++th) {
      const Skeleton& sk = tr_.skeletons[th];
      const std::vector<int>& cp = tr_.control_place[th];
      std::set<std::pair<int, int>> seen_shared;  // (src place, edge sig)
      for (size_t ei = 0; ei < sk.edges.size(); ++ei) {
        const SkelEdge& e = sk.edges[ei];
        int src = cp[(size_t)e.from], dst = cp[(size_t)e.to];
        // under unmap sharing two skeleton edges may collapse onto the same
        // place pair with the same meaning; emit once
        if (sk.states[(size_t)e.from].node->kind == SeqTerm::Call &&
            sk.states[(size_t)e.from].pos == 0) {
          if (!seen_shared.insert({src, (int)e.kind * 1000000 +
                                            (e.a >= 0 ? e.a : 999)})
                   .second)
            continue;
        }
        switch (e.kind) {
          case SkelEdge::Nu:
            for (int n = 0; n < tr_.pool; ++n) {
              emit(src, dst, {Command{Command::Map, row(e.a), Value{true, n}}},
                   false, fresh_name("nu"));
              ++tr_.report.nu;
            }
            break;
          case SkelEdge::TauPre:
            emit(src, dst, {}, true, fresh_name("tau"));
            ++tr_.report.tau;
            break;
          case SkelEdge::SendPre: {
            if (e.pre.names.size() != 1)
              throw NotSupported("polyadic send");
            sends.push_back(
                Stub{(int)th, src, dst, e.pre.chan, e.pre.names[0]});
            break;
          }
          case SkelEdge::RecvPre: {
            if (e.pre.names.size() != 1)
              throw NotSupported("polyadic receive");
            recvs.push_back(
                Stub{(int)th, src, dst, e.pre.chan, e.pre.names[0]});
            break;
          }
          case SkelEdge::GuardStep: {
            if (!opt_.extensions) throw NotSupported("guards");
            if (e.positive) {
              for (const Value& v :
                   intersect(values_of(e.a), values_of(e.b))) {
                std::vector<Command> cs;
                maybe_test(cs, e.a, v);
                maybe_test(cs, e.b, v);
                emit(src, dst, cs, false, fresh_name("match"));
                ++tr_.report.guard;
              }
            } else {
              // inequality via complement places; public-vs-public pairs on
              // two variables are not expressible and are skipped
              bool bpub = s.kind(e.b) == NameKind::Public;
              for (const Value& v : values_of(e.a)) {
                std::vector<Command> cs;
                if (bpub) {
                  if (!v.fresh && v.id == e.b) continue;
                  maybe_test(cs, e.a, v);
                } else {
                  if (!v.fresh) continue;
                  if (!tr_.subst.neq.count({row(e.b), v.id})) continue;
                  maybe_test(cs, e.a, v);
                  cs.push_back(Command{Command::TestNeq, row(e.b), v});
                }
                if (cs.empty()) continue;
                emit(src, dst, cs, false, fresh_name("mismatch"));
                ++tr_.report.guard;
              }
            }
            break;
          }
          case SkelEdge::CallMap: {
            for (const Value& v : values_of(e.a)) {
              std::vector<Command> cs;
              maybe_test(cs, e.a, v);
              cs.push_back(Command{Command::Map, row(e.b), v});
              emit(src, dst, cs, false, fresh_name("map"));
              ++tr_.report.call_map;
            }
            break;
          }
          case SkelEdge::CallUnmap: {
            for (const Value& v : values_of(e.a)) {
              emit(src, dst, {Command{Command::Unmap, row(e.a), v}}, false,
                   fresh_name("unmap"));
              ++tr_.report.call_unmap;
            }
            break;
          }
          case SkelEdge::CallBody:
            emit(src, dst, {}, true, fresh_name("body"));
            ++tr_.report.call_body;
            break;
        }
      }
    }

    // cross-thread synchronisation; stubs themselves are hidden (deleted)
    for (const Stub& sn : sends) {
      for (const Stub& rc : recvs) {
        if (sn.thread == rc.thread) continue;
        std::vector<Value> chans =
            intersect(values_of(sn.chan), values_of(rc.chan));
        std::vector<Value> pays =
            intersect(values_of(sn.payload), values_of(rc.payload));
        if (chans.empty() || pays.empty()) continue;
        if (!opt_.split) {
          for (const Value& a : chans)
            for (const Value& b : pays) {
              std::vector<Command> cs;
              maybe_test(cs, sn.chan, a);
              maybe_test(cs, rc.chan, a);
              maybe_test(cs, sn.payload, b);
              cs.push_back(Command{Command::Map, row(rc.payload), b});
              emit(sn.src, sn.dst, cs, true, fresh_name("sync"), rc.src,
                   rc.dst);
              ++tr_.report.sync;
            }
        } else {
          Place mp;
          mp.role = Place::Aux;
          mp.stable = false;
          mp.name = "mid_" + std::to_string(serial++);
          int mid = tr_.net.add_place(std::move(mp));
          ++tr_.report.middle_places;
          for (const Value& a : chans) {
            std::vector<Command> cs;
            maybe_test(cs, sn.chan, a);
            maybe_test(cs, rc.chan, a);
            emit(sn.src, mid, cs, true, fresh_name("sync1"), rc.src);
            ++tr_.report.split_first;
          }
          for (const Value& b : pays) {
            std::vector<Command> cs;
            maybe_test(cs, sn.payload, b);
            cs.push_back(Command{Command::Map, row(rc.payload), b});
            emit(mid, sn.dst, cs, false, fresh_name("sync2"), -1, rc.dst);
            ++tr_.report.split_second;
          }
        }
      }
    }
  }

  void finish() {
    Marking m = init_marking_();
    for (size_t th = 0; th < tr_.skeletons.size(); ++th)
      m.set(tr_.control_place[th][(size_t)tr_.skeletons[th].entry]);
    tr_.net.initial = std::move(m);
    TranslationReport& r = tr_.report;
    r.pool = (size_t)tr_.pool;
    r.rows = (size_t)tr_.subst.num_rows;
    for (const auto& p : tr_.net.places) {
      if (p.role == Place::Control) ++r.control_places;
      else if (p.role == Place::Subst) ++r.subst_places;
    }
    r.net_size = tr_.net.size();
  }
};

}  // namespace detail

// Full pipeline from a validated specification.
inline Translation translate(const FcpSpec& input,
                             const TranslateOptions& opt = {}) {
  FcpSpec pre(input);
  if (opt.extensions) pre.extensions = true;
  FcpSpec spec = validate_no_clash(std::move(pre)).spec;
  NormalizeOptions nopt;
  nopt.drop_main_restrictions = opt.drop_main_restrictions;
  spec = normalize_base(std::move(spec), nopt);
  if (opt.reorder && opt.abstraction) {
    Abstraction ab0 = compute_abstraction(spec, true);
    spec = reorder_parameters(spec, ab0);
  }
  return detail::Translator(std::move(spec), opt).run();
}

// Deadlock-analysis gadget: a transition from every terminal control place
// to a per-thread done place, plus one global loop over all done places.
// Returns the loop transitions (to be passed to find_deadlocks).
inline std::set<int> add_success_gadget(Translation& tr) {
  std::set<int> loops;
  std::vector<int> done;
  for (size_t th = 0; th < tr.stop_places.size(); ++th) {
    if (tr.stop_places[th].empty()) return loops;  // thread never terminates
    Place p;
    p.role = Place::Aux;
    p.name = "done_" + std::to_string(th);
    done.push_back(tr.net.add_place(p));
  }
  for (size_t th = 0; th < tr.stop_places.size(); ++th)
    for (int stop : tr.stop_places[th]) {
      Transition t;
      t.name = "finish_" + std::to_string(th) + "_" + std::to_string(stop);
      t.pre = {stop};
      t.post = {done[th]};
      tr.net.add_transition(std::move(t));
    }
  Transition loop;
  loop.name = "success";
  loop.pre = done;
  loop.post = done;
  loops.insert(tr.net.add_transition(std::move(loop)));
  return loops;
}

// The gadget's success condition as a plain marking predicate: every
// thread rests on one of its terminal places. Lets deadlock sweeps tell
// proper termination apart from a stuck marking without growing the net.
inline std::function<bool(const Marking&)> terminal_predicate(
    const Translation& tr) {
  std::vector<std::vector<int>> stops = tr.stop_places;
  return [stops](const Marking& m) {
    if (stops.empty()) return false;
    for (const auto& th : stops) {
      bool done = false;
      for (int p : th)
        if (m.test(p)) {
          done = true;
          break;
        }
      if (!done) return false;
    }
    return true;
  };
}

}  // namespace fcp2pn

#endif
