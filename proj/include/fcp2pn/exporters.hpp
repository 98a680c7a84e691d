// Net exporters and the LoLA re-ingestion parser.
//
// LoLA files use multiplicity-1 arcs only; a read arc shows up as the same
// place in both CONSUME and PRODUCE. Names are sanitized to identifier
// characters, with a numeric suffix if that introduces a collision, so the
// output is deterministic for a deterministic input net.

#ifndef FCP2PN_EXPORTERS_HPP
#define FCP2PN_EXPORTERS_HPP

#include <cctype>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fcp2pn/petri.hpp"

namespace fcp2pn {

enum class ExportFormat { Lola, Pnml, Dot, FcpText, LtsDump };

struct ExportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string sanitize_id(const std::string& s) {
  std::string out;
  for (char c : s)
    out += (std::isalnum((unsigned char)c) || c == '_') ? c : '_';
  if (out.empty() || std::isdigit((unsigned char)out[0])) out = "n" + out;
  return out;
}

// stable unique identifiers for every place and transition
inline std::pair<std::vector<std::string>, std::vector<std::string>>
net_identifiers(const PetriNet& net) {
  std::set<std::string> taken;
  auto claim = [&](const std::string& base) {
    std::string id = sanitize_id(base);
    if (!taken.insert(id).second) {
      int k = 2;
      while (!taken.insert(id + "__" + std::to_string(k)).second) ++k;
      id += "__" + std::to_string(k);
    }
    return id;
  };
  std::vector<std::string> ps, ts;
  for (const Place& p : net.places) ps.push_back(claim(p.name));
  for (const Transition& t : net.transitions) ts.push_back(claim(t.name));
  return {ps, ts};
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

}  // namespace detail

inline std::string export_lola(const PetriNet& net) {
  auto [ps, ts] = detail::net_identifiers(net);
  std::string out = "PLACE";
  if (net.places.empty()) {
    out += " ;\n";
  } else {
    out += "\n  ";
    for (size_t i = 0; i < ps.size(); ++i) out += (i ? ", " : "") + ps[i];
    out += ";\n";
  }
  out += "\nMARKING";
  std::vector<int> m0 = net.initial.marked();
  if (m0.empty()) {
    out += " ;\n";
  } else {
    out += "\n  ";
    for (size_t i = 0; i < m0.size(); ++i)
      out += (i ? ", " : "") + ps[(size_t)m0[i]] + ": 1";
    out += ";\n";
  }
  for (size_t t = 0; t < net.transitions.size(); ++t) {
    const Transition& tr = net.transitions[t];
    out += "\nTRANSITION " + ts[t] + "\n  CONSUME";
    for (size_t i = 0; i < tr.pre.size(); ++i)
      out += (i ? ", " : " ") + ps[(size_t)tr.pre[i]] + ": 1";
    out += ";\n  PRODUCE";
    for (size_t i = 0; i < tr.post.size(); ++i)
      out += (i ? ", " : " ") + ps[(size_t)tr.post[i]] + ": 1";
    out += ";\n";
  }
  return out;
}

// Minimal reader for the subset emitted above (multiplicities other than 1
// are rejected). Every parsed transition is treated as observable.
inline PetriNet parse_lola(const std::string& text) {
  std::vector<std::string> tok;
  std::string cur;
  for (char c : text) {
    if (std::isspace((unsigned char)c) || c == ',' || c == ':' || c == ';') {
      if (!cur.empty()) tok.push_back(cur), cur.clear();
      if (c == ';') tok.push_back(";");
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) tok.push_back(cur);

  PetriNet net;
  std::map<std::string, int> place_of;
  size_t i = 0;
  auto expect = [&](const std::string& w) {
    if (i >= tok.size() || tok[i] != w)
      throw ExportError("lola parse: expected " + w);
    ++i;
  };
  expect("PLACE");
  while (i < tok.size() && tok[i] != ";") {
    Place p;
    p.name = tok[i++];
    if (place_of.count(p.name)) throw ExportError("lola parse: duplicate place");
    place_of[p.name] = net.add_place(p);
  }
  expect(";");
  expect("MARKING");
  std::vector<int> marked;
  while (i < tok.size() && tok[i] != ";") {
    auto it = place_of.find(tok[i++]);
    if (it == place_of.end()) throw ExportError("lola parse: unknown place");
    if (i >= tok.size() || tok[i] != "1")
      throw ExportError("lola parse: only multiplicity 1 supported");
    ++i;
    marked.push_back(it->second);
  }
  expect(";");
  while (i < tok.size()) {
    expect("TRANSITION");
    if (i >= tok.size()) throw ExportError("lola parse: transition name missing");
    Transition t;
    t.name = tok[i++];
    t.observable = true;
    auto arcs = [&](std::vector<int>& side) {
      while (i < tok.size() && tok[i] != ";") {
        auto it = place_of.find(tok[i++]);
        if (it == place_of.end()) throw ExportError("lola parse: unknown place");
        if (i >= tok.size() || tok[i] != "1")
          throw ExportError("lola parse: only multiplicity 1 supported");
        ++i;
        side.push_back(it->second);
      }
      expect(";");
    };
    expect("CONSUME");
    arcs(t.pre);
    expect("PRODUCE");
    arcs(t.post);
    net.add_transition(t);
  }
  Marking m0(net.places.size());
  for (int p : marked) m0.set(p);
  net.initial = m0;
  return net;
}

inline std::string export_pnml(const PetriNet& net) {
  auto [ps, ts] = detail::net_identifiers(net);
  std::string out =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<pnml xmlns=\"http://www.pnml.org/version-2009/grammar/pnml\">\n"
      " <net id=\"net1\" type=\"http://www.pnml.org/version-2009/grammar/"
      "ptnet\">\n  <page id=\"page1\">\n";
  for (size_t p = 0; p < net.places.size(); ++p) {
    const Place& pl = net.places[p];
    const char* role = pl.role == Place::Control ? "control"
                       : pl.role == Place::Subst ? "subst"
                                                 : "aux";
    out += "   <place id=\"" + ps[p] + "\">\n    <name><text>" +
           detail::xml_escape(pl.name) + " [" + role + "]</text></name>\n";
    if (net.initial.test((int)p))
      out += "    <initialMarking><text>1</text></initialMarking>\n";
    out += "   </place>\n";
  }
  for (size_t t = 0; t < net.transitions.size(); ++t) {
    const Transition& tr = net.transitions[t];
    out += "   <transition id=\"" + ts[t] + "\">\n    <name><text>" +
           detail::xml_escape(tr.name) +
           (tr.observable ? " [observable]" : " [internal]") +
           "</text></name>\n   </transition>\n";
  }
  int arc = 0;
  for (size_t t = 0; t < net.transitions.size(); ++t) {
    for (int p : net.transitions[t].pre)
      out += "   <arc id=\"a" + std::to_string(arc++) + "\" source=\"" +
             ps[(size_t)p] + "\" target=\"" + ts[t] + "\"/>\n";
    for (int p : net.transitions[t].post)
      out += "   <arc id=\"a" + std::to_string(arc++) + "\" source=\"" +
             ts[t] + "\" target=\"" + ps[(size_t)p] + "\"/>\n";
  }
  out += "  </page>\n </net>\n</pnml>\n";
  return out;
}

inline std::string export_dot(const PetriNet& net) {
  auto [ps, ts] = detail::net_identifiers(net);
  std::string out = "digraph net {\n  rankdir=LR;\n";
  for (size_t p = 0; p < net.places.size(); ++p) {
    const Place& pl = net.places[p];
    const char* fill = pl.role == Place::Control ? "lightblue"
                       : pl.role == Place::Subst ? "lightyellow"
                                                 : "lightgray";
    out += "  " + ps[p] + " [shape=circle, style=filled, fillcolor=" + fill +
           ", label=\"" + pl.name + (net.initial.test((int)p) ? "\\n*" : "") +
           "\"];\n";
  }
  for (size_t t = 0; t < net.transitions.size(); ++t) {
    const Transition& tr = net.transitions[t];
    out += "  " + ts[t] + " [shape=box, style=filled, fillcolor=" +
           (tr.observable ? "black, fontcolor=white" : "gray") +
           ", label=\"" + tr.name + "\"];\n";
  }
  for (size_t t = 0; t < net.transitions.size(); ++t) {
    for (int p : net.transitions[t].pre)
      out += "  " + ps[(size_t)p] + " -> " + ts[t] + ";\n";
    for (int p : net.transitions[t].post)
      out += "  " + ts[t] + " -> " + ps[(size_t)p] + ";\n";
  }
  out += "}\n";
  return out;
}

// Structural comparison used by the round-trip tests: same shape index by
// index (names aside, parse_lola preserves declaration order).
inline bool same_shape(const PetriNet& a, const PetriNet& b) {
  if (a.places.size() != b.places.size()) return false;
  if (a.transitions.size() != b.transitions.size()) return false;
  if (!(a.initial == b.initial)) return false;
  for (size_t t = 0; t < a.transitions.size(); ++t) {
    std::multiset<int> ap(a.transitions[t].pre.begin(),
                          a.transitions[t].pre.end()),
        bp(b.transitions[t].pre.begin(), b.transitions[t].pre.end());
    if (ap != bp) return false;
    std::multiset<int> aq(a.transitions[t].post.begin(),
                          a.transitions[t].post.end()),
        bq(b.transitions[t].post.begin(), b.transitions[t].post.end());
    if (aq != bq) return false;
  }
  return true;
}

}  // namespace fcp2pn

#endif
