#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/embedding.hpp"
#include "core/fingerprint.hpp"
#include "core/graphormer.hpp"
#include "core/io.hpp"
#include "core/lattice.hpp"
#include "core/lifting.hpp"
#include "core/risk.hpp"
#include "core/ssckg.hpp"

namespace scaa::pipeline {

inline constexpr const char* kToolName = "scaa";
inline constexpr const char* kToolVersion = "0.1.0";

struct AnnotatorSpec {
  std::string type = "rules";  // rules | replay | cmd
  std::filesystem::path path;
  std::string command;
};

struct EmbeddingSpec {
  std::string type = "hash";  // hash | file
  std::size_t dimension = embedding::kDefaultDimension;
  std::filesystem::path path;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::filesystem::path lattice;  // empty: built-in lattice
  AnnotatorSpec annotator;
  EmbeddingSpec embedding;
  std::filesystem::path cves;  // empty: no CVE corpus
  ssckg::BuildConfig ssckg;
  graphormer::ModelConfig model;  // input_dim and seed are filled in at use
  std::filesystem::path model_weights;
  risk::PropagationConfig risk;
  double tau = 0.78;
  std::filesystem::path fingerprint_repo;
  fingerprint::Grid grid;
  double fpr_cap = 0.05;
  ssckg::RiskBands bands;
  // Effective settings as written (defaults filled, paths unresolved).
  io::Json echo;
};

io::Json default_config_json();
// Merges `j` over the defaults (JSON merge patch), validates, and resolves
// relative paths against base_dir. ConfigError on bad values.
PipelineConfig config_from_json(const io::Json& j, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);
// Applies a merge patch on top of an existing config.
PipelineConfig override_config(const PipelineConfig& cfg, const io::Json& patch,
                               const std::filesystem::path& base_dir);

// Shared, immutable stage resources built from one config.
class Context {
 public:
  explicit Context(PipelineConfig cfg);

  const PipelineConfig& config() const { return cfg_; }
  const lattice::Lattice& lattice() const { return lattice_; }
  const embedding::EmbeddingProvider& provider() const { return *provider_; }
  const lifting::Annotator& annotator() const;
  const std::vector<ssckg::CveRecord>& cves() const { return cves_; }
  std::vector<ssckg::CveRecord> load_cves(const std::filesystem::path& path) const;
  graphormer::ModelConfig model_config() const;
  graphormer::ModelParams model_params() const;

 private:
  PipelineConfig cfg_;
  lattice::Lattice lattice_;
  std::unique_ptr<embedding::EmbeddingProvider> provider_;
  std::unique_ptr<lifting::Annotator> annotator_;
  std::vector<ssckg::CveRecord> cves_;
};

// Stage entry points; each reads and writes the documented file formats.
void ingest(const std::filesystem::path& cpg_in, const std::filesystem::path& out);
lifting::VerifiedCorpus lift(const Context& ctx, const std::filesystem::path& cpg, const std::filesystem::path& out);
ssckg::SsckgGraph build_ssckg(const Context& ctx, const std::filesystem::path& cpg,
                              const std::filesystem::path& corpus, const std::filesystem::path& out);
// Embeds each text; the output table is readable by the file provider.
io::Json embed_texts(const Context& ctx, std::span<const std::string> texts);
void forward(const Context& ctx, const std::filesystem::path& kg, const std::filesystem::path& out);
void save_initial_weights(const Context& ctx, const std::filesystem::path& out);
// `cves` overrides the configured corpus when non-empty.
risk::RiskVector score(const Context& ctx, const std::filesystem::path& kg, const std::filesystem::path& out,
                       const std::filesystem::path& cves = {});
void fingerprint_extract(const std::filesystem::path& embeddings, std::span<const ssckg::EntityId> entities,
                         const std::string& name, const std::string& provenance, const std::filesystem::path& out);
// Returns the number of alerts; an empty repo path yields no matches.
std::size_t match(const std::filesystem::path& embeddings, const std::filesystem::path& repo, double tau,
                  const std::filesystem::path& out);
fingerprint::ThresholdReport threshold(const std::filesystem::path& scores, const fingerprint::Grid& grid,
                                       double fpr_cap, const std::filesystem::path& out);
struct ReportInputs {
  std::filesystem::path cpg;
  std::filesystem::path corpus;  // optional
  std::filesystem::path kg;
  std::filesystem::path risk;
  std::filesystem::path alerts;  // optional
};
io::Json report(const Context& ctx, const ReportInputs& in, const std::filesystem::path& out);
// `risk` may be empty for an uncolored graph.
void export_dot(const std::filesystem::path& kg, const std::filesystem::path& risk, const ssckg::RiskBands& bands,
                const std::filesystem::path& out);

struct PipelineResult {
  std::string binary_id;
  std::filesystem::path out_dir;
  std::size_t alerts = 0;
};

// ingest -> lift -> build-ssckg -> forward -> score -> match -> report ->
// export-dot, writing every intermediate into out_dir.
PipelineResult run_pipeline(const Context& ctx, const std::filesystem::path& cpg, const std::filesystem::path& out_dir);
// Several binaries on up to `jobs` threads; each gets out_root/<file stem>.
// Results follow input order; the first failure is rethrown after all finish.
std::vector<PipelineResult> run_pipelines(const Context& ctx, std::span<const std::filesystem::path> cpgs,
                                          const std::filesystem::path& out_root, std::size_t jobs);

}  // namespace scaa::pipeline
