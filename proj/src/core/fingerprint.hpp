#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "core/embedding.hpp"
#include "core/graphormer.hpp"
#include "core/io.hpp"

namespace scaa::fingerprint {

struct Fingerprint {
  std::string name;
  std::string provenance;
  std::vector<embedding::EmbeddingVector> nodes;
};

// Target graph nodes: entity ids alongside their embeddings.
struct Target {
  std::vector<ssckg::EntityId> ids;
  std::vector<embedding::EmbeddingVector> nodes;
};
Target target_from(const graphormer::EmbeddingSet& s);

struct BestMatch {
  std::size_t fingerprint_node = 0;
  ssckg::EntityId target_entity = 0;
  double cosine = 0.0;
};

struct MatchResult {
  std::string fingerprint;
  double similarity = 0.0;
  std::vector<BestMatch> pairs;
  bool alert = false;
};

// Mean over fingerprint nodes of the best clamped cosine against any target
// node; ties go to the lowest target entity id. EmptyTarget, DimensionMismatch.
MatchResult match(const Target& target, const Fingerprint& fp);
double similarity(const Target& target, const Fingerprint& fp);

// One result per fingerprint in repository order; alert iff similarity > tau.
std::vector<MatchResult> match_and_alert(const Target& target, std::span<const Fingerprint> repo, double tau);

// Fingerprint from the embeddings of an allowlisted set of entities.
Fingerprint extract(const graphormer::EmbeddingSet& s, std::span<const ssckg::EntityId> entities,
                    std::string name, std::string provenance);

// {name, provenance, embeddings: [[...]]}.
io::Json to_json(const Fingerprint& fp);
Fingerprint fingerprint_from_json(const io::Json& j);
void save_fingerprint(const Fingerprint& fp, const std::filesystem::path& path);
Fingerprint load_fingerprint(const std::filesystem::path& path);
// Every *.json file of a directory, by file name.
std::vector<Fingerprint> load_repository(const std::filesystem::path& dir);

io::Json to_json(const MatchResult& m);

struct Score {
  double value = 0.0;
  bool malicious = false;
};

struct Grid {
  double lo = 0.50;
  double hi = 0.95;
  double step = 0.01;

  // lo + k * step for k = 0.. while <= hi, rounded to 1e-10.
  std::vector<double> points() const;
};

struct GridRow {
  double tau = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double j = 0.0;
};

struct ThresholdReport {
  double tau = 0.0;
  double j_statistic = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double fpr_cap = 0.05;
  // False when no grid point met the cap and the minimal-FPR point was taken.
  bool cap_satisfied = true;
  std::vector<GridRow> grid;
};

// Scores above tau are predicted malicious. Picks the maximal J = TPR - FPR
// among grid points with FPR <= fpr_cap, smaller tau on ties.
// SingleClassInput unless both classes are present.
ThresholdReport select_threshold(std::span<const Score> scores, const Grid& grid = {}, double fpr_cap = 0.05);

// P(malicious score > benign score), ties counted one half.
double roc_auc(std::span<const Score> scores);

// [{score, label: "malicious" | "benign"}].
std::vector<Score> parse_scores(const io::Json& j);
std::vector<Score> load_scores(const std::filesystem::path& path);
io::Json to_json(const ThresholdReport& r);

}  // namespace scaa::fingerprint
