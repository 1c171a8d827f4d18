#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "core/cpg.hpp"
#include "core/io.hpp"
#include "core/ssckg.hpp"

namespace scaa::graphormer {

enum class EdgeBiasMode { kSum, kMax };

struct ModelConfig {
  std::size_t layers = 6;
  std::size_t heads = 8;
  std::size_t hidden_dim = 256;
  // Spatial buckets 0..max_dist plus one for unreachable pairs.
  std::uint32_t max_dist = cpg::kDefaultMaxDist;
  // Dimension of the entity summary embeddings fed to the input projection.
  std::size_t input_dim = 384;
  std::size_t ffn_multiplier = 4;
  std::uint64_t seed = 0;
  EdgeBiasMode edge_bias = EdgeBiasMode::kSum;

  std::size_t head_dim() const { return hidden_dim / heads; }
  // ConfigError unless layers, heads, dims are positive and heads divides hidden_dim.
  void validate() const;
  // True when two configs give tensors of identical shapes.
  bool same_shape(const ModelConfig& o) const;

  bool operator==(const ModelConfig&) const = default;
};

io::Json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const io::Json& j);

struct LayerParams {
  // hidden x hidden; head h uses columns [h*d, (h+1)*d).
  Eigen::MatrixXd wq, wk, wv, wo;
  Eigen::MatrixXd ffn_in;  // hidden x (ffn_multiplier * hidden)
  Eigen::RowVectorXd ffn_in_bias;
  Eigen::MatrixXd ffn_out;  // (ffn_multiplier * hidden) x hidden
  Eigen::RowVectorXd ffn_out_bias;
  Eigen::RowVectorXd ln_gain, ln_offset;
  Eigen::MatrixXd spatial_bias;  // heads x (max_dist + 2)
  Eigen::MatrixXd edge_bias;     // heads x 8, columns in RelationType order
};

struct ModelParams {
  ModelConfig config;
  Eigen::MatrixXd input_proj;      // input_dim x hidden
  Eigen::MatrixXd tier_embedding;  // 4 x hidden, row = label tier (0 = top)
  std::vector<LayerParams> layers;
};

// Weights uniform in +-1/sqrt(fan_in) from a seeded 64-bit Mersenne Twister,
// bias vectors zero, layer-norm gain 1 and offset 0. Bias tables count their
// bucket width as fan-in. Same config => bitwise identical params.
ModelParams init_params(const ModelConfig& cfg);

// Directed entity-to-entity relation feeding the edge-type bias.
struct BiasEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  ssckg::RelationType type = ssckg::RelationType::kCalls;
  double weight = 1.0;
};

// Relations between entities (CVE targets dropped), sorted.
std::vector<BiasEdge> bias_edges(const ssckg::SsckgGraph& kg);
// Hop counts over the directed entity relation graph.
cpg::DistanceMatrix entity_distances(const ssckg::SsckgGraph& kg, std::uint32_t max_dist);

// Row-softmax of q_i.k_j / sqrt(d) + spatial[h][dist(i,j)] + edge terms, where
// the edge term of (i,j) combines bias[h][type] * weight over relations i->j.
Eigen::MatrixXd attention_matrix(const Eigen::MatrixXd& z, const cpg::DistanceMatrix& dist,
                                 std::span<const BiasEdge> edges, const ModelParams& p, std::size_t layer,
                                 std::size_t head);

// Entity features: projected summary embedding plus the tier embedding.
Eigen::MatrixXd input_features(const ssckg::SsckgGraph& kg, const ModelParams& p);

// Per-layer intermediates, filled when requested.
struct ForwardTrace {
  std::vector<std::vector<Eigen::MatrixXd>> attention;  // [layer][head]
  std::vector<Eigen::MatrixXd> normalized;              // layer-norm output before gain/offset
};

// z' = LayerNorm(z + FFN(MultiHeadAttn(z))).
Eigen::MatrixXd apply_layer(const Eigen::MatrixXd& z, const cpg::DistanceMatrix& dist,
                            std::span<const BiasEdge> edges, const ModelParams& p, std::size_t layer,
                            ForwardTrace* trace = nullptr);

struct NodeEmbedding {
  ssckg::EntityId entity_id = 0;
  std::vector<double> z;

  bool operator==(const NodeEmbedding&) const = default;
};

// EmptyGraph for a graph without entities; DimensionMismatch when entity
// embeddings do not match config.input_dim.
std::vector<NodeEmbedding> forward(const ssckg::SsckgGraph& kg, const ModelParams& p,
                                   ForwardTrace* trace = nullptr);

// Binary container: magic, version, config JSON, then named float64 tensors.
inline constexpr std::uint32_t kWeightFormatVersion = 1;
std::string serialize_params(const ModelParams& p);
ModelParams deserialize_params(std::string_view bytes, const ModelConfig* expected = nullptr);
void save_params(const ModelParams& p, const std::filesystem::path& path);
// With `expected`, ShapeMismatch unless the stored config has the same shapes.
ModelParams load_params(const std::filesystem::path& path, const ModelConfig* expected = nullptr);

// {binary_id, hidden_dim, embeddings: [{entity_id, name, z}]}.
struct EmbeddingSet {
  std::string binary_id;
  std::vector<std::string> names;
  std::vector<NodeEmbedding> embeddings;
};
io::Json to_json(const EmbeddingSet& s);
EmbeddingSet embedding_set_from_json(const io::Json& j);
void save_embeddings(const EmbeddingSet& s, const std::filesystem::path& path);
EmbeddingSet load_embeddings(const std::filesystem::path& path);

}  // namespace scaa::graphormer
