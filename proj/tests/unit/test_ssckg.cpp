#include <set>
#include <tuple>

#include "core/cpg.hpp"
#include "core/errors.hpp"
#include "core/lifting.hpp"
#include "core/ssckg.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace scaa;
using namespace scaa::ssckg;
using cpg::EdgeKind;
using cpg::NodeKind;
using testing::edge;
using testing::node;

namespace {

const lattice::Lattice& lat() { return lattice::Lattice::default_lattice(); }

using Triple = std::tuple<EntityId, std::string, EntityId>;

std::multiset<Triple> triples(const SsckgGraph& kg) {
  std::multiset<Triple> out;
  for (const auto& r : kg.relations) {
    if (r.targets_entity()) out.emplace(r.src, std::string(to_string(r.type)), r.dst_entity());
  }
  return out;
}

SsckgGraph toy_kg(const embedding::EmbeddingProvider& provider) {
  auto g = cpg::load_cpg(testing::fixture("toy_modbus.cpg.json"));
  auto rules = lifting::rule_annotator(lat(), testing::fixture("rules_ics.json"));
  auto corpus = lifting::build_corpus(g, *rules);
  return build_ssckg(g, corpus, provider, {}, BuildConfig{});
}

}  // namespace

TEST_CASE("structural collapse partitions nodes") {
  std::vector<cpg::CpgNode> nodes;
  for (int i = 0; i < 12; ++i) nodes.push_back(node(i, 0, i % 3));
  cpg::CpgGraph g("b", nodes, {});
  auto fn = structural_collapse(g, Granularity::kFunction);
  REQUIRE(fn.size() == 1);
  CHECK(fn[0].members.size() == 12);
  CHECK(fn[0].label.is_top());
  auto blocks = structural_collapse(g, Granularity::kBlock);
  CHECK(blocks.size() == 3);
  std::size_t total = 0;
  for (const auto& e : blocks) total += e.members.size();
  CHECK(total == 12);
}

TEST_CASE("toy fixture: entities and the hand-enumerated relations") {
  embedding::HashEmbedder provider(384, 7);
  auto g = cpg::load_cpg(testing::fixture("toy_modbus.cpg.json"));
  auto rules = lifting::rule_annotator(lat(), testing::fixture("rules_ics.json"));
  auto corpus = lifting::build_corpus(g, *rules);
  auto collapsed = structural_collapse(g, Granularity::kFunction, index_annotations(corpus));
  CHECK(collapsed.size() == 6);

  auto kg = toy_kg(provider);
  REQUIRE(kg.entities.size() == 5);
  CHECK(kg.entities[1].name == "read_modbus_register~c0");
  CHECK(kg.entities[1].members.size() == 6);
  CHECK(kg.entities[1].label.str() == "Hardware/Register_Read");
  CHECK(kg.clustering_candidates == 2);
  CHECK(kg.semantic_clusters == 1);
  CHECK(kg.noise_points == 0);

  std::multiset<Triple> want{{0, "calls", 1},      {0, "calls", 2},  {0, "calls", 3},  {0, "reads_from", 1},
                             {0, "writes_to", 2}, {0, "taints", 2}, {0, "reaches", 2}};
  CHECK(triples(kg) == want);

  auto stats = construction_stats(g, kg);
  CHECK(stats.compression_ratio == doctest::Approx(4.0));
  CHECK(stats.vuln_relation_fraction == doctest::Approx(2.0 / 7.0));
}

TEST_CASE("intra-entity edges produce no relation") {
  auto call = node(2, 0, 0, NodeKind::kCall, "bl");
  cpg::CpgGraph g("b", {node(1, 0), call}, {edge(1, 2, EdgeKind::kAst, "call"), edge(1, 2, EdgeKind::kPdg)});
  auto entities = structural_collapse(g, Granularity::kFunction);
  CHECK(extract_relations(g, entities, {}, RelationConfig::defaults()).empty());
}

TEST_CASE("taint from an input entity to a sink entity") {
  cpg::CpgGraph g("b", {node(1, 0), node(2, 1)}, {edge(1, 2, EdgeKind::kPdg)},
                  {{0, "parse", false}, {1, "sink", false}});
  AnnotationIndex ann{{"parse", {"parse", lat().label("Network/Protocol_Parse"), "parses", {}}},
                      {"sink", {"sink", lat().label("Hardware/Coil_Write/Unauthenticated_Coil_Write"), "writes", {}}}};
  auto entities = structural_collapse(g, Granularity::kFunction, ann);
  auto rels = extract_relations(g, entities, {}, RelationConfig::defaults());
  std::set<std::string> types;
  for (const auto& r : rels) {
    CHECK(r.src == 0);
    CHECK(r.dst_entity() == 1);
    types.insert(std::string(to_string(r.type)));
  }
  CHECK(types == std::set<std::string>{"taints", "reaches", "writes_to"});
}

TEST_CASE("vulnerable_to relations use the CVE threshold") {
  embedding::HashEmbedder provider(64, 0);
  cpg::CpgGraph g("b", {node(1, 0), node(2, 1)}, {}, {{0, "a", false}, {1, "b", false}});
  AnnotationIndex ann{{"a", {"a", lat().label("Memory"), "heap overflow in packet copy", {}}},
                      {"b", {"b", lat().label("Memory"), "prints banner", {}}}};
  auto entities = structural_collapse(g, Granularity::kFunction, ann);
  embed_entities(entities, provider);
  std::vector<CveRecord> cves{{"CVE-1", "heap overflow in packet copy", provider.embed("heap overflow in packet copy")}};
  auto rels = extract_relations(g, entities, cves, RelationConfig::defaults());
  REQUIRE(rels.size() == 1);
  CHECK(rels[0].type == RelationType::kVulnerableTo);
  CHECK(rels[0].src == 0);
  CHECK(std::get<CveId>(rels[0].dst).value == "CVE-1");
}

TEST_CASE("semantic clustering") {
  embedding::HashEmbedder provider(128, 3);
  std::vector<Entity> ents(3);
  ents[0] = {0, "s7_read_req", lat().label("Hardware/Register_Read"), {1}, "reads PLC holding registers", {}, true};
  ents[1] = {1, "local", lat().label("Memory"), {2}, "reads PLC holding registers", {}, false};
  ents[2] = {2, "read_modbus_register", lat().label("Hardware/Register_Read"), {3},
             "reads PLC holding registers", {}, true};
  auto merged = semantic_clustering(ents, provider, 0.3, 2);
  REQUIRE(merged.entities.size() == 2);
  CHECK(merged.entities[0].members == std::vector<cpg::NodeId>{1, 3});
  CHECK(merged.entities[0].name == "read_modbus_register~c0");
  CHECK(merged.entities[1].id == 1);
  CHECK(merged.clusters == 1);

  ents[2].summary = "blinks status led";
  ents[2].label = lat().label("Network/Socket_Init");
  auto apart = semantic_clustering(ents, provider, 0.3, 2);
  CHECK(apart.entities.size() == 3);
  CHECK(apart.noise == 2);

  ents[2].summary = ents[0].summary;
  auto joined = semantic_clustering(ents, provider, 0.3, 2);
  CHECK(joined.entities[0].label == lattice::Label::top());
}

TEST_CASE("statistics") {
  SsckgGraph kg;
  kg.entities.resize(1280);
  CHECK(construction_stats(324000, kg).compression_ratio == doctest::Approx(253.125));
  SsckgGraph one;
  one.entities.resize(5);
  auto s = construction_stats(5, one);
  CHECK(s.compression_ratio == 1.0);
  CHECK(s.vuln_relation_fraction == 0.0);
  CHECK(s.noise_fraction == 0.0);
}

TEST_CASE("graph JSON round trip and DOT export") {
  embedding::HashEmbedder provider(384, 7);
  auto kg = toy_kg(provider);
  auto back = ssckg_from_json(to_json(kg));
  CHECK(io::dump(to_json(back)) == io::dump(to_json(kg)));
  auto dot = to_dot(kg);
  CHECK(dot.find("digraph") == 0);
  CHECK(dot.find("taints") != std::string::npos);
  std::vector<double> risk{0.9, 0.5, 0.1, 0.0, 0.0};
  CHECK(to_dot(kg, &risk).find("#e34a33") != std::string::npos);
}
