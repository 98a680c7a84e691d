#include <catch2/catch_amalgamated.hpp>

#include "fcp2pn/exporters.hpp"
#include "fcp2pn/parser.hpp"
#include "fcp2pn/translator.hpp"

using namespace fcp2pn;

namespace {

PetriNet tiny_loop_net() {
  PetriNet net;
  Place p;
  p.name = "p";
  int pi = net.add_place(p);
  p.name = "q";
  int qi = net.add_place(p);
  Transition t;
  t.name = "t";
  t.pre = {pi, qi};
  t.post = {qi};  // q is read, p is consumed
  net.add_transition(t);
  Marking m0(2);
  m0.set(pi);
  m0.set(qi);
  net.initial = m0;
  return net;
}

Translation restricted_sender() {
  TranslateOptions o;
  o.split = false;
  o.drop_main_restrictions = false;
  o.rough_domains = true;
  o.new_bound = 2;
  return translate(parse_fcp("main = ( new r.p!<r>.0 | p?(x).0 )"), o);
}

}  // namespace

TEST_CASE("empty net exports the bare skeleton") {
  PetriNet net;
  std::string s = export_lola(net);
  CHECK(s.find("PLACE ;") != std::string::npos);
  CHECK(s.find("MARKING ;") != std::string::npos);
  CHECK(s.find("TRANSITION") == std::string::npos);
}

TEST_CASE("read arcs appear on both sides of the transition") {
  std::string s = export_lola(tiny_loop_net());
  CHECK(s.find("CONSUME p: 1, q: 1;") != std::string::npos);
  CHECK(s.find("PRODUCE q: 1;") != std::string::npos);
  CHECK(s.find("MARKING\n  p: 1, q: 1;") != std::string::npos);
}

TEST_CASE("restricted sender exports four transition blocks") {
  Translation tr = restricted_sender();
  std::string s = export_lola(tr.net);
  size_t count = 0;
  for (size_t at = s.find("TRANSITION"); at != std::string::npos;
       at = s.find("TRANSITION", at + 1))
    ++count;
  CHECK(count == 4);
}

TEST_CASE("lola round-trips to the same shape") {
  for (const PetriNet& net :
       {tiny_loop_net(), restricted_sender().net}) {
    std::string s = export_lola(net);
    PetriNet back = parse_lola(s);
    CHECK(same_shape(net, back));
    // and re-export is byte-identical
    CHECK(export_lola(back) == s);
  }
}

TEST_CASE("lola parser rejects junk") {
  CHECK_THROWS_AS(parse_lola("MARKING ;"), ExportError);
  CHECK_THROWS_AS(parse_lola("PLACE p; MARKING q: 1;"), ExportError);
  CHECK_THROWS_AS(parse_lola("PLACE p; MARKING p: 2;"), ExportError);
  CHECK_THROWS_AS(parse_lola("PLACE p, p; MARKING ;"), ExportError);
}

TEST_CASE("identifier sanitization keeps names unique") {
  PetriNet net;
  Place p;
  p.name = "a#1";
  net.add_place(p);
  p.name = "a_1";
  net.add_place(p);
  p.name = "a 1";
  net.add_place(p);
  net.initial = Marking(3);
  PetriNet back = parse_lola(export_lola(net));
  CHECK(back.places.size() == 3);
}

TEST_CASE("pnml carries markings and role labels") {
  std::string s = export_pnml(tiny_loop_net());
  CHECK(s.find("<pnml") != std::string::npos);
  size_t marks = 0;
  for (size_t at = s.find("<initialMarking>"); at != std::string::npos;
       at = s.find("<initialMarking>", at + 1))
    ++marks;
  CHECK(marks == 2);
  CHECK(s.find("[control]") == std::string::npos);  // tiny net is all aux
  std::string tr = export_pnml(restricted_sender().net);
  CHECK(tr.find("[control]") != std::string::npos);
  CHECK(tr.find("[subst]") != std::string::npos);
}

TEST_CASE("dot output draws places as circles and transitions as boxes") {
  std::string s = export_dot(tiny_loop_net());
  CHECK(s.find("shape=circle") != std::string::npos);
  CHECK(s.find("shape=box") != std::string::npos);
  CHECK(s.find("p -> t;") != std::string::npos);
  CHECK(s.find("t -> q;") != std::string::npos);
}

TEST_CASE("exports are deterministic across repeated translation") {
  TranslateOptions o;
  FcpSpec a = parse_fcp("main = ( new r.p!<r>.0 | p?(x).0 )");
  FcpSpec b = parse_fcp("main = ( new r.p!<r>.0 | p?(x).0 )");
  Translation t1 = translate(a, o), t2 = translate(b, o);
  CHECK(export_lola(t1.net) == export_lola(t2.net));
  CHECK(export_pnml(t1.net) == export_pnml(t2.net));
  CHECK(export_dot(t1.net) == export_dot(t2.net));
}
