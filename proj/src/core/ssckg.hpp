#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "core/cpg.hpp"
#include "core/embedding.hpp"
#include "core/io.hpp"
#include "core/lattice.hpp"
#include "core/lifting.hpp"

namespace scaa::ssckg {

enum class RelationType {
  kCalls,
  kDependsOn,
  kImports,
  kReadsFrom,
  kWritesTo,
  kTaints,
  kReaches,
  kVulnerableTo,
};
inline constexpr std::size_t kRelationTypeCount = 8;

std::string_view to_string(RelationType t);
RelationType parse_relation_type(std::string_view s);
bool is_vulnerability_relation(RelationType t);

using EntityId = std::int64_t;

struct CveId {
  std::string value;
  auto operator<=>(const CveId&) const = default;
};

struct Entity {
  EntityId id = 0;
  std::string name;
  lattice::Label label;
  // Sorted CPG node ids.
  std::vector<cpg::NodeId> members;
  std::string summary;
  embedding::EmbeddingVector embedding;
  bool external = false;
};

struct Relation {
  EntityId src = 0;
  RelationType type = RelationType::kCalls;
  std::variant<EntityId, CveId> dst;
  double weight = 1.0;

  bool targets_entity() const { return std::holds_alternative<EntityId>(dst); }
  EntityId dst_entity() const { return std::get<EntityId>(dst); }
};

struct CveRecord {
  std::string cve_id;
  std::string description;
  embedding::EmbeddingVector embedding;
};

// Entities carry dense ids 0..n-1 equal to their position.
struct SsckgGraph {
  std::string source_binary;
  std::vector<Entity> entities;
  std::vector<Relation> relations;
  // Semantic clustering bookkeeping for the construction statistics.
  std::size_t clustering_candidates = 0;
  std::size_t semantic_clusters = 0;
  std::size_t noise_points = 0;
};

enum class Granularity { kBlock, kFunction };

class WeightTable {
 public:
  // taints 1.0, reaches 0.8, vulnerable_to 1.0, writes_to 0.6, reads_from 0.4,
  // calls 0.3, depends_on 0.2, imports 0.2.
  WeightTable();
  double operator[](RelationType t) const { return w_[static_cast<std::size_t>(t)]; }
  void set(RelationType t, double w);

 private:
  std::array<double, kRelationTypeCount> w_{};
};

struct RelationConfig {
  WeightTable weights;
  // AST edge label -> structural relation. AST edges whose label is not listed
  // become calls when their source node is a Call node.
  std::map<std::string, RelationType> ast_labels;
  // A label belongs to a set when it is below (or equal to) any listed label.
  std::vector<lattice::Label> read_labels;
  std::vector<lattice::Label> write_labels;
  std::vector<lattice::Label> taint_sources;
  std::vector<lattice::Label> taint_sinks;
  double cve_match_threshold = 0.85;

  static RelationConfig defaults();
};

struct BuildConfig {
  Granularity granularity = Granularity::kFunction;
  bool semantic_clustering = true;
  double eps = 0.3;
  std::size_t min_samples = 2;
  RelationConfig relations = RelationConfig::defaults();
};

using AnnotationIndex = std::map<std::string, lifting::Annotation>;
AnnotationIndex index_annotations(const lifting::VerifiedCorpus& corpus);

// One entity per distinct function (or block); member sets partition the
// nodes. Labels and summaries come from the accepted annotations of covered
// functions (top / empty when none). Embeddings are left empty.
std::vector<Entity> structural_collapse(const cpg::CpgGraph& g, Granularity granularity,
                                        const AnnotationIndex& annotations = {},
                                        const lattice::Lattice& lat = lattice::Lattice::default_lattice());

// Fills missing embeddings from the entity summaries.
void embed_entities(std::vector<Entity>& entities, const embedding::EmbeddingProvider& provider);

struct ClusteringResult {
  std::vector<Entity> entities;
  std::size_t candidates = 0;
  std::size_t clusters = 0;
  std::size_t noise = 0;
};

// DBSCAN over the summary embeddings of external entities; co-clustered
// entities merge (member union, joined label, normalized mean embedding), all
// others pass through. Ids are renumbered densely in order of first member.
ClusteringResult semantic_clustering(std::vector<Entity> entities, const embedding::EmbeddingProvider& provider,
                                     double eps, std::size_t min_samples,
                                     const lattice::Lattice& lat = lattice::Lattice::default_lattice());

// Typed relations, deduplicated on (src, type, dst) and sorted.
std::vector<Relation> extract_relations(const cpg::CpgGraph& g, std::span<const Entity> entities,
                                        std::span<const CveRecord> cves, const RelationConfig& cfg,
                                        const lattice::Lattice& lat = lattice::Lattice::default_lattice());

SsckgGraph build_ssckg(const cpg::CpgGraph& g, const lifting::VerifiedCorpus& corpus,
                       const embedding::EmbeddingProvider& provider, std::span<const CveRecord> cves,
                       const BuildConfig& cfg,
                       const lattice::Lattice& lat = lattice::Lattice::default_lattice());

struct ConstructionStats {
  std::size_t cpg_nodes = 0;
  std::size_t entities = 0;
  double compression_ratio = 0.0;
  std::size_t semantic_clusters = 0;
  std::size_t noise_points = 0;
  // noise_points / clustering_candidates (0 when nothing was clustered).
  double noise_fraction = 0.0;
  std::size_t relation_count = 0;
  // |taints + reaches + vulnerable_to| / |relations| (0 when empty).
  double vuln_relation_fraction = 0.0;
};

ConstructionStats construction_stats(std::size_t cpg_nodes, const SsckgGraph& kg);
ConstructionStats construction_stats(const cpg::CpgGraph& g, const SsckgGraph& kg);
io::Json to_json(const ConstructionStats& s);

// CVE corpus: JSON list [{cve_id, description}], embedded once on load.
std::vector<CveRecord> parse_cves(const io::Json& j, const embedding::EmbeddingProvider& provider);
std::vector<CveRecord> load_cves(const std::filesystem::path& path, const embedding::EmbeddingProvider& provider);

io::Json to_json(const SsckgGraph& kg);
SsckgGraph ssckg_from_json(const io::Json& j, const lattice::Lattice& lat = lattice::Lattice::default_lattice());
void save_ssckg(const SsckgGraph& kg, const std::filesystem::path& path);
SsckgGraph load_ssckg(const std::filesystem::path& path,
                      const lattice::Lattice& lat = lattice::Lattice::default_lattice());

struct RiskBands {
  double high = 0.7;
  double medium = 0.4;
};

// DOT digraph: one node per entity (name and label in the text), one edge per
// entity-to-entity relation labelled with its type; CVE targets appear as box
// nodes. With `risk`, nodes are filled by risk band.
std::string to_dot(const SsckgGraph& kg, const std::vector<double>* risk = nullptr, RiskBands bands = {});

}  // namespace scaa::ssckg
