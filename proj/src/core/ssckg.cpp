#include "core/ssckg.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "core/dbscan.hpp"
#include "core/errors.hpp"

namespace scaa::ssckg {
namespace {

constexpr std::string_view kRelationNames[kRelationTypeCount] = {
    "calls", "depends_on", "imports", "reads_from", "writes_to", "taints", "reaches", "vulnerable_to"};

bool below_any(const lattice::Lattice& lat, const lattice::Label& l, std::span<const lattice::Label> set) {
  return std::any_of(set.begin(), set.end(), [&](const lattice::Label& s) { return lat.leq(l, s); });
}

std::string join_distinct(const std::vector<std::string>& parts) {
  std::string out;
  std::set<std::string> seen;
  for (const auto& p : parts) {
    if (p.empty() || !seen.insert(p).second) continue;
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

}  // namespace

std::string_view to_string(RelationType t) { return kRelationNames[static_cast<std::size_t>(t)]; }

RelationType parse_relation_type(std::string_view s) {
  for (std::size_t i = 0; i < kRelationTypeCount; ++i) {
    if (s == kRelationNames[i]) return static_cast<RelationType>(i);
  }
  raise(Errc::kSchema, "unknown relation type '" + std::string(s) + "'");
}

bool is_vulnerability_relation(RelationType t) {
  return t == RelationType::kTaints || t == RelationType::kReaches || t == RelationType::kVulnerableTo;
}

WeightTable::WeightTable() {
  set(RelationType::kTaints, 1.0);
  set(RelationType::kReaches, 0.8);
  set(RelationType::kVulnerableTo, 1.0);
  set(RelationType::kWritesTo, 0.6);
  set(RelationType::kReadsFrom, 0.4);
  set(RelationType::kCalls, 0.3);
  set(RelationType::kDependsOn, 0.2);
  set(RelationType::kImports, 0.2);
}

void WeightTable::set(RelationType t, double w) {
  if (!(w > 0.0)) raise(Errc::kConfig, "relation weight for " + std::string(to_string(t)) + " must be > 0");
  w_[static_cast<std::size_t>(t)] = w;
}

RelationConfig RelationConfig::defaults() {
  RelationConfig c;
  c.ast_labels = {{"call", RelationType::kCalls},
                  {"calls", RelationType::kCalls},
                  {"import", RelationType::kImports},
                  {"imports", RelationType::kImports},
                  {"depends_on", RelationType::kDependsOn},
                  {"link", RelationType::kDependsOn}};
  using L = lattice::Label;
  c.read_labels = {L({"Hardware", "Register_Read"})};
  c.write_labels = {L({"Hardware", "Register_Write"}), L({"Hardware", "Coil_Write"})};
  c.taint_sources = {L({"Network", "Protocol_Parse"})};
  c.taint_sinks = {L({"Hardware", "Register_Write"}), L({"Hardware", "Coil_Write"}),
                   L({"Hardware", "Firmware_Update"})};
  return c;
}

AnnotationIndex index_annotations(const lifting::VerifiedCorpus& corpus) {
  AnnotationIndex idx;
  for (const auto& a : corpus.accepted) idx.insert_or_assign(a.function_id, a);
  return idx;
}

std::vector<Entity> structural_collapse(const cpg::CpgGraph& g, Granularity granularity,
                                        const AnnotationIndex& annotations, const lattice::Lattice& lat) {
  // Group node indices by collapse key; std::map keeps keys ascending.
  std::map<std::pair<cpg::FunctionId, std::int64_t>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const auto& n = g.nodes()[i];
    groups[{n.function_id, granularity == Granularity::kFunction ? 0 : n.block_id}].push_back(i);
  }

  std::vector<Entity> out;
  out.reserve(groups.size());
  for (auto& [key, idx] : groups) {
    Entity e;
    e.id = static_cast<EntityId>(out.size());
    std::vector<cpg::FunctionId> fids;
    e.members.reserve(idx.size());
    for (std::size_t i : idx) {
      const auto& n = g.nodes()[i];
      e.members.push_back(n.id);
      if (fids.empty() || fids.back() != n.function_id) fids.push_back(n.function_id);
      if (auto it = n.attrs.find("external"); it != n.attrs.end() && it->second == "true") e.external = true;
    }
    std::sort(e.members.begin(), e.members.end());
    std::sort(fids.begin(), fids.end());
    fids.erase(std::unique(fids.begin(), fids.end()), fids.end());

    std::vector<std::string> summaries;
    bool labelled = false;
    for (std::size_t k = 0; k < fids.size(); ++k) {
      const auto* f = g.find_function(fids[k]);
      e.external = e.external || f->external;
      if (k == 0) e.name = f->name;
      auto a = annotations.find(f->name);
      if (a == annotations.end()) {
        e.label = lattice::Label::top();
        labelled = true;
        continue;
      }
      e.label = labelled ? lat.join(e.label, a->second.label) : a->second.label;
      labelled = true;
      summaries.push_back(a->second.summary);
    }
    if (granularity == Granularity::kBlock) e.name += "#" + std::to_string(key.second);
    e.summary = join_distinct(summaries);
    out.push_back(std::move(e));
  }
  return out;
}

void embed_entities(std::vector<Entity>& entities, const embedding::EmbeddingProvider& provider) {
  for (auto& e : entities) {
    if (e.embedding.dimension() == 0) e.embedding = provider.embed(e.summary);
  }
}

ClusteringResult semantic_clustering(std::vector<Entity> entities, const embedding::EmbeddingProvider& provider,
                                     double eps, std::size_t min_samples, const lattice::Lattice& lat) {
  embed_entities(entities, provider);
  ClusteringResult res;

  std::vector<std::size_t> candidates;
  std::vector<embedding::EmbeddingVector> points;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    if (!entities[i].external) continue;
    candidates.push_back(i);
    points.push_back(entities[i].embedding);
  }
  res.candidates = candidates.size();
  const auto assignment = clustering::dbscan(points, eps, min_samples);

  // group[i] = cluster of entity i, or -1 when it passes through.
  std::vector<int> group(entities.size(), clustering::kNoise);
  int clusters = 0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    group[candidates[k]] = assignment[k];
    clusters = std::max(clusters, assignment[k] + 1);
    if (assignment[k] == clustering::kNoise) ++res.noise;
  }
  res.clusters = static_cast<std::size_t>(clusters);

  std::vector<std::vector<std::size_t>> cluster_members(res.clusters);
  for (std::size_t i = 0; i < entities.size(); ++i) {
    if (group[i] != clustering::kNoise) cluster_members[group[i]].push_back(i);
  }

  std::vector<bool> emitted(res.clusters, false);
  for (std::size_t i = 0; i < entities.size(); ++i) {
    if (group[i] == clustering::kNoise) {
      res.entities.push_back(std::move(entities[i]));
      continue;
    }
    const int c = group[i];
    if (emitted[c]) continue;
    emitted[c] = true;
    const auto& ms = cluster_members[c];
    if (ms.size() == 1) {
      res.entities.push_back(std::move(entities[ms[0]]));
      continue;
    }
    Entity merged;
    merged.external = true;
    merged.label = entities[ms[0]].label;
    std::string smallest = entities[ms[0]].name;
    std::vector<std::string> summaries;
    std::vector<double> mean(entities[ms[0]].embedding.dimension(), 0.0);
    for (std::size_t m : ms) {
      const auto& e = entities[m];
      merged.members.insert(merged.members.end(), e.members.begin(), e.members.end());
      merged.label = lat.join(merged.label, e.label);
      smallest = std::min(smallest, e.name);
      summaries.push_back(e.summary);
      for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += e.embedding[d];
    }
    std::sort(merged.members.begin(), merged.members.end());
    merged.name = smallest + "~c" + std::to_string(c);
    merged.summary = join_distinct(summaries);
    embedding::EmbeddingVector centroid(std::move(mean));
    merged.embedding = centroid.norm() > 0.0 ? centroid.normalized() : entities[ms[0]].embedding;
    res.entities.push_back(std::move(merged));
  }
  for (std::size_t i = 0; i < res.entities.size(); ++i) res.entities[i].id = static_cast<EntityId>(i);
  return res;
}

std::vector<Relation> extract_relations(const cpg::CpgGraph& g, std::span<const Entity> entities,
                                        std::span<const CveRecord> cves, const RelationConfig& cfg,
                                        const lattice::Lattice& lat) {
  const std::size_t n = entities.size();
  std::vector<std::size_t> owner(g.node_count(), SIZE_MAX);
  for (std::size_t e = 0; e < n; ++e) {
    for (cpg::NodeId id : entities[e].members) {
      const std::size_t idx = g.index_of(id);
      if (owner[idx] != SIZE_MAX) raise(Errc::kInvalidArgument, "node " + std::to_string(id) + " is in two entities");
      owner[idx] = e;
    }
  }
  for (std::size_t i = 0; i < owner.size(); ++i) {
    if (owner[i] == SIZE_MAX) {
      raise(Errc::kInvalidArgument, "node " + std::to_string(g.nodes()[i].id) + " belongs to no entity");
    }
  }

  std::vector<bool> is_read(n), is_write(n), is_source(n), is_sink(n);
  for (std::size_t e = 0; e < n; ++e) {
    const auto& l = entities[e].label;
    is_read[e] = below_any(lat, l, cfg.read_labels);
    is_write[e] = below_any(lat, l, cfg.write_labels);
    is_source[e] = below_any(lat, l, cfg.taint_sources);
    is_sink[e] = below_any(lat, l, cfg.taint_sinks);
  }

  std::set<std::tuple<EntityId, RelationType, std::variant<EntityId, CveId>>> triples;
  auto add = [&](std::size_t s, RelationType t, std::size_t d) {
    triples.emplace(static_cast<EntityId>(s), t, static_cast<EntityId>(d));
  };

  std::vector<std::set<std::size_t>> entity_succ(n);
  for (const auto& edge : g.edges()) {
    const std::size_t si = g.index_of(edge.src);
    const std::size_t s = owner[si];
    const std::size_t d = owner[g.index_of(edge.dst)];
    if (s == d) continue;
    switch (edge.kind) {
      case cpg::EdgeKind::kAst: {
        entity_succ[s].insert(d);
        if (auto it = cfg.ast_labels.find(edge.label); it != cfg.ast_labels.end()) {
          add(s, it->second, d);
        } else if (g.nodes()[si].kind == cpg::NodeKind::kCall) {
          add(s, RelationType::kCalls, d);
        }
        break;
      }
      case cpg::EdgeKind::kPdg:
        entity_succ[s].insert(d);
        if (is_write[d]) add(s, RelationType::kWritesTo, d);
        if (is_read[s]) add(d, RelationType::kReadsFrom, s);
        break;
      case cpg::EdgeKind::kCfg:
        break;
    }
  }

  // Node-level PDG reachability from every source entity.
  const auto& pdg = g.pdg_successors();
  std::vector<bool> tainted(n, false);
  std::vector<std::uint32_t> stamp(g.node_count(), 0);
  std::uint32_t epoch = 0;
  std::vector<std::size_t> queue;
  for (std::size_t e = 0; e < n; ++e) {
    if (!is_source[e]) continue;
    tainted[e] = true;
    ++epoch;
    queue.clear();
    for (cpg::NodeId id : entities[e].members) {
      const std::size_t idx = g.index_of(id);
      stamp[idx] = epoch;
      queue.push_back(idx);
    }
    std::set<std::size_t> reached;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (std::size_t next : pdg[queue[head]]) {
        if (stamp[next] == epoch) continue;
        stamp[next] = epoch;
        queue.push_back(next);
        reached.insert(owner[next]);
      }
    }
    for (std::size_t r : reached) {
      tainted[r] = true;
      if (r != e && is_sink[r]) add(e, RelationType::kTaints, r);
    }
  }

  // Entity-level reachability over structural and data-flow edges.
  std::vector<std::uint32_t> seen(n, 0);
  std::uint32_t round = 0;
  std::deque<std::size_t> frontier;
  for (std::size_t t = 0; t < n; ++t) {
    if (!tainted[t]) continue;
    ++round;
    seen[t] = round;
    frontier.assign(1, t);
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop_front();
      for (std::size_t v : entity_succ[u]) {
        if (seen[v] == round) continue;
        seen[v] = round;
        frontier.push_back(v);
        if (is_sink[v] && v != t) add(t, RelationType::kReaches, v);
      }
    }
  }

  for (std::size_t e = 0; e < n; ++e) {
    if (entities[e].summary.empty()) continue;
    for (const auto& c : cves) {
      if (embedding::cosine(entities[e].embedding, c.embedding) >= cfg.cve_match_threshold) {
        triples.emplace(static_cast<EntityId>(e), RelationType::kVulnerableTo, CveId{c.cve_id});
      }
    }
  }

  std::vector<Relation> out;
  out.reserve(triples.size());
  for (const auto& [s, t, d] : triples) out.push_back({s, t, d, cfg.weights[t]});
  return out;
}

SsckgGraph build_ssckg(const cpg::CpgGraph& g, const lifting::VerifiedCorpus& corpus,
                       const embedding::EmbeddingProvider& provider, std::span<const CveRecord> cves,
                       const BuildConfig& cfg, const lattice::Lattice& lat) {
  SsckgGraph kg;
  kg.source_binary = g.binary_id();
  auto entities = structural_collapse(g, cfg.granularity, index_annotations(corpus), lat);
  if (cfg.semantic_clustering) {
    auto res = semantic_clustering(std::move(entities), provider, cfg.eps, cfg.min_samples, lat);
    kg.entities = std::move(res.entities);
    kg.clustering_candidates = res.candidates;
    kg.semantic_clusters = res.clusters;
    kg.noise_points = res.noise;
  } else {
    embed_entities(entities, provider);
    kg.entities = std::move(entities);
  }
  kg.relations = extract_relations(g, kg.entities, cves, cfg.relations, lat);
  return kg;
}

ConstructionStats construction_stats(std::size_t cpg_nodes, const SsckgGraph& kg) {
  ConstructionStats s;
  s.cpg_nodes = cpg_nodes;
  s.entities = kg.entities.size();
  s.compression_ratio = s.entities == 0 ? 0.0 : static_cast<double>(cpg_nodes) / static_cast<double>(s.entities);
  s.semantic_clusters = kg.semantic_clusters;
  s.noise_points = kg.noise_points;
  s.noise_fraction = kg.clustering_candidates == 0
                         ? 0.0
                         : static_cast<double>(kg.noise_points) / static_cast<double>(kg.clustering_candidates);
  s.relation_count = kg.relations.size();
  const auto vuln = std::count_if(kg.relations.begin(), kg.relations.end(),
                                  [](const Relation& r) { return is_vulnerability_relation(r.type); });
  s.vuln_relation_fraction =
      s.relation_count == 0 ? 0.0 : static_cast<double>(vuln) / static_cast<double>(s.relation_count);
  return s;
}

ConstructionStats construction_stats(const cpg::CpgGraph& g, const SsckgGraph& kg) {
  return construction_stats(g.node_count(), kg);
}

io::Json to_json(const ConstructionStats& s) {
  return {{"cpg_nodes", s.cpg_nodes},
          {"entities", s.entities},
          {"compression_ratio", s.compression_ratio},
          {"semantic_clusters", s.semantic_clusters},
          {"noise_points", s.noise_points},
          {"noise_fraction", s.noise_fraction},
          {"relation_count", s.relation_count},
          {"vuln_relation_fraction", s.vuln_relation_fraction}};
}

std::vector<CveRecord> parse_cves(const io::Json& j, const embedding::EmbeddingProvider& provider) {
  if (!j.is_array()) raise(Errc::kSchema, "CVE corpus must be a JSON list");
  std::vector<CveRecord> out;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& o = j[i];
    const std::string where = "cves[" + std::to_string(i) + "]";
    if (!o.is_object() || !o.contains("cve_id") || !o.contains("description") || !o["cve_id"].is_string() ||
        !o["description"].is_string()) {
      raise(Errc::kSchema, where + ": expected {cve_id, description}");
    }
    CveRecord c{o["cve_id"].get<std::string>(), o["description"].get<std::string>(), {}};
    if (!ids.insert(c.cve_id).second) raise(Errc::kSchema, where + ": duplicate cve_id " + c.cve_id);
    c.embedding = provider.embed(c.description);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<CveRecord> load_cves(const std::filesystem::path& path, const embedding::EmbeddingProvider& provider) {
  return parse_cves(io::read_json(path), provider);
}

io::Json to_json(const SsckgGraph& kg) {
  io::Json ents = io::Json::array();
  for (const auto& e : kg.entities) {
    ents.push_back({{"id", e.id},
                    {"name", e.name},
                    {"label", e.label.str()},
                    {"external", e.external},
                    {"summary", e.summary},
                    {"members", e.members},
                    {"embedding", std::vector<double>(e.embedding.values().begin(), e.embedding.values().end())}});
  }
  io::Json rels = io::Json::array();
  for (const auto& r : kg.relations) {
    io::Json o = {{"src", r.src}, {"type", to_string(r.type)}};
    if (r.targets_entity()) {
      o["dst"] = r.dst_entity();
    } else {
      o["dst_cve"] = std::get<CveId>(r.dst).value;
    }
    o["weight"] = r.weight;
    rels.push_back(std::move(o));
  }
  return {{"source_binary", kg.source_binary},
          {"clustering",
           {{"candidates", kg.clustering_candidates},
            {"clusters", kg.semantic_clusters},
            {"noise", kg.noise_points}}},
          {"entities", std::move(ents)},
          {"relations", std::move(rels)}};
}

SsckgGraph ssckg_from_json(const io::Json& j, const lattice::Lattice& lat) {
  if (!j.is_object() || !j.contains("entities") || !j.contains("relations")) {
    raise(Errc::kSchema, "SSCKG must be an object with 'entities' and 'relations'");
  }
  SsckgGraph kg;
  kg.source_binary = j.value("source_binary", std::string{});
  if (auto c = j.find("clustering"); c != j.end() && c->is_object()) {
    kg.clustering_candidates = c->value("candidates", std::size_t{0});
    kg.semantic_clusters = c->value("clusters", std::size_t{0});
    kg.noise_points = c->value("noise", std::size_t{0});
  }
  try {
    for (std::size_t i = 0; i < j["entities"].size(); ++i) {
      const auto& o = j["entities"][i];
      Entity e;
      e.id = o.at("id").get<EntityId>();
      if (e.id != static_cast<EntityId>(i)) {
        raise(Errc::kSchema, "entities[" + std::to_string(i) + "]: ids must be dense and ordered");
      }
      e.name = o.at("name").get<std::string>();
      e.label = lat.label(o.at("label").get<std::string>());
      e.external = o.value("external", false);
      e.summary = o.value("summary", std::string{});
      e.members = o.at("members").get<std::vector<cpg::NodeId>>();
      if (e.members.empty()) raise(Errc::kSchema, "entities[" + std::to_string(i) + "]: no members");
      e.embedding = embedding::EmbeddingVector(o.value("embedding", std::vector<double>{}));
      kg.entities.push_back(std::move(e));
    }
    const auto n = static_cast<EntityId>(kg.entities.size());
    for (std::size_t i = 0; i < j["relations"].size(); ++i) {
      const auto& o = j["relations"][i];
      const std::string where = "relations[" + std::to_string(i) + "]";
      Relation r;
      r.src = o.at("src").get<EntityId>();
      r.type = parse_relation_type(o.at("type").get<std::string>());
      if (o.contains("dst_cve")) {
        if (r.type != RelationType::kVulnerableTo) raise(Errc::kSchema, where + ": only vulnerable_to targets a CVE");
        r.dst = CveId{o["dst_cve"].get<std::string>()};
      } else {
        r.dst = o.at("dst").get<EntityId>();
        if (r.dst_entity() < 0 || r.dst_entity() >= n) raise(Errc::kSchema, where + ": dst out of range");
      }
      if (r.src < 0 || r.src >= n) raise(Errc::kSchema, where + ": src out of range");
      r.weight = o.at("weight").get<double>();
      if (!(r.weight > 0.0)) raise(Errc::kSchema, where + ": weight must be > 0");
      kg.relations.push_back(std::move(r));
    }
  } catch (const io::Json::exception& e) {
    raise(Errc::kSchema, std::string("SSCKG: ") + e.what());
  }
  return kg;
}

void save_ssckg(const SsckgGraph& kg, const std::filesystem::path& path) {
  io::write_text_atomic(path, io::dump(to_json(kg)));
}

SsckgGraph load_ssckg(const std::filesystem::path& path, const lattice::Lattice& lat) {
  return ssckg_from_json(io::read_json(path), lat);
}

namespace {
std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}
}  // namespace

std::string to_dot(const SsckgGraph& kg, const std::vector<double>* risk, RiskBands bands) {
  std::ostringstream out;
  out << "digraph ssckg {\n";
  out << "  graph [label=\"" << dot_escape(kg.source_binary) << "\"];\n";
  out << "  node [shape=ellipse, style=filled, fillcolor=\"#dddddd\"];\n";
  for (const auto& e : kg.entities) {
    out << "  e" << e.id << " [label=\"" << dot_escape(e.name) << "\\n" << dot_escape(e.label.str()) << "\"";
    if (risk != nullptr && static_cast<std::size_t>(e.id) < risk->size()) {
      const double r = (*risk)[e.id];
      const char* color = r >= bands.high ? "#e34a33" : r >= bands.medium ? "#fdbb84" : "#a1d99b";
      out << ", fillcolor=\"" << color << "\"";
    }
    out << "];\n";
  }
  std::set<std::string> cves;
  for (const auto& r : kg.relations) {
    if (!r.targets_entity()) cves.insert(std::get<CveId>(r.dst).value);
  }
  std::map<std::string, std::size_t> cve_index;
  for (const auto& c : cves) {
    const std::size_t k = cve_index.size();
    cve_index[c] = k;
    out << "  c" << k << " [shape=box, fillcolor=\"#ffffff\", label=\"" << dot_escape(c) << "\"];\n";
  }
  for (const auto& r : kg.relations) {
    out << "  e" << r.src << " -> ";
    if (r.targets_entity()) {
      out << "e" << r.dst_entity();
    } else {
      out << "c" << cve_index[std::get<CveId>(r.dst).value];
    }
    out << " [label=\"" << to_string(r.type) << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace scaa::ssckg
