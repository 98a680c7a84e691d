// Command-line driver.
//
// Exit codes: 0 success, 2 usage or input error, 3 checked property
// violated (deadlock found, safety or invariant broken, systems not
// equivalent), 4 state limit exceeded.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fcp2pn/bisim.hpp"
#include "fcp2pn/exporters.hpp"
#include "fcp2pn/generators.hpp"
#include "fcp2pn/normalize.hpp"
#include "fcp2pn/parser.hpp"
#include "fcp2pn/pn2fcp.hpp"
#include "fcp2pn/semantics.hpp"
#include "fcp2pn/translator.hpp"
#include "fcp2pn/validate.hpp"

using nlohmann::json;
using namespace fcp2pn;

namespace {

constexpr int kOk = 0, kUsage = 2, kViolated = 3, kLimit = 4;

size_t max_states() {
  if (const char* env = std::getenv("FCP2PN_MAX_STATES")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && v > 0) return (size_t)v;
  }
  return 1000000;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

bool has_suffix(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() &&
         s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

struct TranslateFlags {
  TranslateOptions opt;
  void attach(CLI::App* cmd) {
    cmd->add_flag("--no-split", [this](size_t) { opt.split = false; },
                  "do not split communications into two phases");
    cmd->add_flag("--no-abstraction",
                  [this](size_t) { opt.abstraction = false; },
                  "one substitution row per name");
    cmd->add_flag("--no-reorder", [this](size_t) { opt.reorder = false; },
                  "keep declared parameter order");
    cmd->add_flag("--no-unmap-sharing",
                  [this](size_t) { opt.unmap_sharing = false; },
                  "do not merge call epilogues");
    cmd->add_flag("--rough-domains",
                  [this](size_t) { opt.rough_domains = true; },
                  "coarse value domains (whole name classes)");
    cmd->add_flag("--rough-new-bound",
                  [this](size_t) { opt.rough_new_bound = true; },
                  "coarse bound on simultaneously live restrictions");
    cmd->add_flag("--no-drop-main-restrictions",
                  [this](size_t) { opt.drop_main_restrictions = false; },
                  "translate top-level restrictions explicitly");
    cmd->add_flag("--extensions", [this](size_t) { opt.extensions = true; },
                  "allow match/mismatch guards");
    cmd->add_option("--new-bound", opt.new_bound,
                    "override the fresh-value pool size");
  }
};

PetriNet load_net(const std::string& path, const TranslateOptions& opt) {
  if (has_suffix(path, ".lola")) return parse_lola(read_file(path));
  return translate(parse_fcp(read_file(path)), opt).net;
}

std::string marking_text(const PetriNet& net, const Marking& m) {
  std::string s;
  for (int p : m.marked()) {
    if (!s.empty()) s += " ";
    s += net.places[(size_t)p].name;
  }
  return s;
}

int run_translate(const std::string& input, const std::string& output,
                  const std::string& format, bool emit_nf,
                  const TranslateOptions& opt, bool want_json) {
  FcpSpec spec = parse_fcp(read_file(input));
  long fcp_size = spec_size(spec);
  if (emit_nf || format == "fcp") {
    NormalizeOptions nopt;
    nopt.drop_main_restrictions = opt.drop_main_restrictions;
    FcpSpec nf = normalize_base(validate_no_clash(spec).spec, nopt);
    write_out(output, print_spec(nf));
    if (want_json) {
      json j{{"input", input},
             {"fcp_size", fcp_size},
             {"nf_fcp_size", spec_size(nf)}};
      std::cout << j.dump(2) << "\n";
    }
    return kOk;
  }
  Translation tr = translate(spec, opt);
  std::string text;
  if (format == "lola") text = export_lola(tr.net);
  else if (format == "pnml") text = export_pnml(tr.net);
  else if (format == "dot") text = export_dot(tr.net);
  else throw CLI::ValidationError("unknown format " + format);
  write_out(output, text);
  if (want_json) {
    json j{{"input", input},
           {"fcp_size", fcp_size},
           {"places", tr.net.places.size()},
           {"transitions", tr.net.transitions.size()},
           {"arcs", tr.net.arc_count()},
           {"net_size", tr.net.size()},
           {"pool", tr.pool}};
    std::cout << j.dump(2) << "\n";
  }
  return kOk;
}

int run_check(const std::string& input, bool deadlock, bool safety,
              bool invariants, const TranslateOptions& opt, bool want_json) {
  json j{{"input", input}};
  bool violated = false;
  if (has_suffix(input, ".lola")) {
    PetriNet net = parse_lola(read_file(input));
    ExploreResult er = explore(net, max_states());
    j["states"] = er.lts.states.size();
    if (safety) {
      j["safety_violations"] = er.violations.size();
      violated |= !er.violations.empty();
    }
    if (deadlock) {
      std::vector<Marking> dead = find_deadlocks(net, max_states());
      j["deadlocks"] = dead.size();
      if (!dead.empty()) {
        j["deadlock_witness"] = marking_text(net, dead[0]);
        violated = true;
      }
    }
  } else {
    Translation tr = translate(parse_fcp(read_file(input)), opt);
    // safety and invariants are judged on the plain net; the termination
    // marker is only added for the deadlock search below
    ExploreResult er = explore(tr.net, max_states());
    j["states"] = er.lts.states.size();
    if (safety) {
      j["safety_violations"] = er.violations.size();
      violated |= !er.violations.empty();
    }
    if (invariants) {
      size_t bad = 0;
      for (const Marking& m : er.lts.states) {
        std::string why;
        if (!check_sm(m, tr.subst.sm, &why)) {
          ++bad;
          continue;
        }
        // mid-step markings of a split communication hold both threads on
        // a shared middle place; per-thread control counting only applies
        // once no such place is marked
        bool mid = false;
        for (int p : m.marked())
          mid |= tr.net.places[(size_t)p].role == Place::Aux;
        if (!mid && !check_one_control_per_thread(tr.net, m)) ++bad;
      }
      j["invariant_violations"] = bad;
      violated |= bad > 0;
    }
    if (deadlock) {
      std::set<int> loops = add_success_gadget(tr);
      std::vector<Marking> dead =
          find_deadlocks(tr.net, max_states(), loops);
      j["deadlocks"] = dead.size();
      if (!dead.empty()) {
        j["deadlock_witness"] = marking_text(tr.net, dead[0]);
        violated = true;
      }
    }
  }
  j["violated"] = violated;
  if (want_json) std::cout << j.dump(2) << "\n";
  else
    std::cout << (violated ? "violated" : "ok") << "\n";
  return violated ? kViolated : kOk;
}

int run_bisim(const std::string& input, bool weak,
              const TranslateOptions& opt, bool want_json) {
  FcpSpec spec = parse_fcp(read_file(input));
  Translation tr = translate(spec, opt);
  PiSystem sys(tr.spec);
  PiLts pi = build_pi_lts(sys, max_states());
  BisimResult r;
  if (weak) {
    ExploreResult er = explore(tr.net, max_states());
    r = weak_bisim(to_generic(pi), to_generic(er.lts, &tr.net));
  } else {
    NetLts st = stable_lts(tr.net, max_states());
    r = strong_bisim(to_generic(pi), to_generic(st));
  }
  if (want_json) {
    json j{{"input", input},
           {"mode", weak ? "weak" : "strong"},
           {"equivalent", r.equivalent},
           {"pi_states", pi.states.size()}};
    if (!r.equivalent) j["distinguishing_depth"] = r.depth;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << (r.equivalent ? "equivalent" : "not equivalent") << "\n";
  }
  return r.equivalent ? kOk : kViolated;
}

int run_pn2fcp(const std::string& input, const std::string& output,
               const std::string& variant, bool check, bool want_json) {
  PetriNet net = parse_lola(read_file(input));
  ReverseVariant var;
  if (variant == "blocking") var = ReverseVariant::Blocking;
  else if (variant == "nonblocking") var = ReverseVariant::NonBlocking;
  else if (variant == "scheduling") var = ReverseVariant::Scheduling;
  else throw CLI::ValidationError("unknown variant " + variant);
  ReverseTranslation rt = translate_reverse(net, var);
  write_out(output, rt.source);
  bool ok = true;
  if (check) {
    if (var == ReverseVariant::Blocking)
      ok = blocking_matches_reachability(net, max_states());
    else
      ok = reverse_weak_check(net, rt, max_states()).equivalent;
  }
  if (want_json) {
    json j{{"input", input},
           {"variant", variant},
           {"fcp_size", spec_size(rt.spec)}};
    if (check) j["faithful"] = ok;
    std::cout << j.dump(2) << "\n";
  }
  return ok ? kOk : kViolated;
}

int run_dump_lts(const std::string& input, const std::string& output) {
  PiSystem sys(validate_no_clash(parse_fcp(read_file(input))).spec);
  PiLts lts = build_pi_lts(sys, max_states());
  write_out(output, dump_lts(sys, lts));
  return kOk;
}

int run_bench(const std::string& family, int lo, int hi, bool with_nets,
              bool with_deadlock, bool want_json) {
  json rows = json::array();
  auto add = [&](const std::string& name, const FcpSpec& spec) {
    json row{{"model", name}, {"fcp_size", spec_size(spec)}};
    row["nf_fcp_size"] = spec_size(replicate_equations(spec));
    if (with_nets || with_deadlock) {
      Translation tr = translate(spec);
      row["places"] = tr.net.places.size();
      row["transitions"] = tr.net.transitions.size();
      row["net_size"] = tr.net.size();
      if (with_deadlock) {
        std::set<int> loops = add_success_gadget(tr);
        row["deadlock"] =
            !find_deadlocks(tr.net, max_states(), loops).empty();
      }
    }
    rows.push_back(std::move(row));
  };
  if (family == "ness" || family == "all")
    for (int k = lo; k <= hi; ++k)
      add("NESS(" + std::to_string(k) + ")", gen_ness(k));
  if (family == "dness" || family == "all")
    for (int k = lo + (lo % 2); k <= hi; k += 2)
      add("DNESS(" + std::to_string(k) + ")", gen_dness(k));
  if (family == "cs" || family == "all")
    for (int m = lo; m <= hi; ++m)
      add("CS(" + std::to_string(m) + "," + std::to_string(m) + ")",
          gen_cs(m, m));
  if (family == "all") {
    rows.push_back({{"model", "GSM"}, {"fcp_size", nullptr},
                    {"note", "N/A: model not publicly available"}});
    rows.push_back({{"model", "PHONES"}, {"fcp_size", nullptr},
                    {"note", "N/A: model not publicly available"}});
  }
  if (want_json) {
    std::cout << json{{"benchmarks", rows}}.dump(2) << "\n";
  } else {
    for (const json& r : rows) {
      std::cout << r["model"].get<std::string>();
      if (r.contains("note")) {
        std::cout << "\t" << r["note"].get<std::string>() << "\n";
        continue;
      }
      std::cout << "\tfcp=" << r["fcp_size"] << "\tnf=" << r["nf_fcp_size"];
      if (r.contains("places"))
        std::cout << "\t|P|=" << r["places"] << "\t|T|=" << r["transitions"];
      if (r.contains("deadlock"))
        std::cout << "\tdeadlock=" << (r["deadlock"].get<bool>() ? "yes" : "no");
      std::cout << "\n";
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-control pi-calculus / safe Petri net toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  bool want_json = false;
  app.add_flag("--json", want_json, "machine-readable report on stdout");

  std::string input, output, format = "lola", variant = "blocking";
  std::string family = "all";
  bool emit_nf = false, weak = false, strong = false;
  bool deadlock = false, safety = false, invariants = false, rcheck = false;
  bool with_nets = false, with_deadlock = false;
  int lo = 2, hi = 5;
  TranslateFlags tf;

  CLI::App* t = app.add_subcommand("translate", "compile an FCP to a net");
  t->add_option("input", input)->required();
  t->add_option("-o,--output", output, "output file (default stdout)");
  t->add_option("--format", format, "lola | pnml | dot | fcp");
  t->add_flag("--emit-normal-form", emit_nf, "print the normalized FCP");
  tf.attach(t);

  CLI::App* c = app.add_subcommand("check", "explore and check properties");
  c->add_option("input", input)->required();
  c->add_flag("--deadlock", deadlock, "search for deadlocked markings");
  c->add_flag("--safety", safety, "check one-boundedness");
  c->add_flag("--invariants", invariants,
              "check substitution and control invariants");
  tf.attach(c);

  CLI::App* b = app.add_subcommand(
      "bisim", "compare the process semantics with its net");
  b->add_option("input", input)->required();
  b->add_flag("--strong", strong, "stable steps, strong equivalence");
  b->add_flag("--weak", weak, "full net behaviour, weak equivalence");
  tf.attach(b);

  CLI::App* r = app.add_subcommand("pn2fcp", "translate a net to an FCP");
  r->add_option("input", input)->required();
  r->add_option("-o,--output", output, "output file (default stdout)");
  r->add_option("--variant", variant, "blocking | nonblocking | scheduling");
  r->add_flag("--check", rcheck, "verify faithfulness of the output");

  CLI::App* d = app.add_subcommand("dump-lts", "print the reaction system");
  d->add_option("input", input)->required();
  d->add_option("-o,--output", output, "output file (default stdout)");

  CLI::App* bn = app.add_subcommand("bench", "benchmark model table");
  bn->add_option("--family", family, "ness | dness | cs | all");
  bn->add_option("--min", lo, "smallest parameter");
  bn->add_option("--max", hi, "largest parameter");
  bn->add_flag("--translate", with_nets, "include translated net sizes");
  bn->add_flag("--deadlock", with_deadlock, "include deadlock verdicts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*t)
      return run_translate(input, output, format, emit_nf, tf.opt, want_json);
    if (*c) {
      if (!deadlock && !safety && !invariants)
        deadlock = safety = invariants = true;
      return run_check(input, deadlock, safety, invariants, tf.opt,
                       want_json);
    }
    if (*b) return run_bisim(input, weak && !strong, tf.opt, want_json);
    if (*r) return run_pn2fcp(input, output, variant, rcheck, want_json);
    if (*d) return run_dump_lts(input, output);
    if (*bn) return run_bench(family, lo, hi, with_nets, with_deadlock,
                              want_json);
  } catch (const StateLimitExceeded& e) {
    std::cerr << "fcp2pn: " << e.what() << "\n";
    return kLimit;
  } catch (const std::exception& e) {
    std::cerr << "fcp2pn: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
