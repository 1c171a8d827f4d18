#pragma once

// Small synthetic knowledge graphs and models shared by unit and acceptance tests.

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "core/graphormer.hpp"
#include "core/ssckg.hpp"
#include "support/fixtures.hpp"
#include "support/graphormer_oracle.hpp"

namespace testing {

inline scaa::ssckg::SsckgGraph random_kg(std::mt19937_64& rng, std::size_t n, std::size_t input_dim,
                                        std::size_t relations) {
  using namespace scaa::ssckg;
  SsckgGraph kg;
  kg.source_binary = "random.bin";
  const char* labels[] = {"TOP", "Network", "Network/Socket_Init", "Hardware/Coil_Write/Unauthenticated_Coil_Write"};
  for (std::size_t i = 0; i < n; ++i) {
    Entity e;
    e.id = static_cast<EntityId>(i);
    e.name = "e" + std::to_string(i);
    e.label = scaa::lattice::Label::parse(labels[rng() % 4]);
    e.members = {static_cast<scaa::cpg::NodeId>(i)};
    e.summary = "s";
    e.embedding = scaa::embedding::EmbeddingVector(random_unit(rng, input_dim));
    kg.entities.push_back(std::move(e));
  }
  std::uniform_real_distribution<double> w(0.1, 1.0);
  for (std::size_t k = 0; k < relations; ++k) {
    const auto a = static_cast<EntityId>(rng() % n);
    const auto b = static_cast<EntityId>(rng() % n);
    if (a == b) continue;
    kg.relations.push_back({a, static_cast<RelationType>(rng() % 7), b, w(rng)});
  }
  return kg;
}

// Entity i of `kg` becomes entity perm[i].
inline scaa::ssckg::SsckgGraph permute_kg(const scaa::ssckg::SsckgGraph& kg, const std::vector<std::size_t>& perm) {
  auto out = kg;
  for (std::size_t i = 0; i < kg.entities.size(); ++i) {
    out.entities[perm[i]] = kg.entities[i];
    out.entities[perm[i]].id = static_cast<scaa::ssckg::EntityId>(perm[i]);
  }
  for (auto& r : out.relations) {
    r.src = static_cast<scaa::ssckg::EntityId>(perm[static_cast<std::size_t>(r.src)]);
    r.dst = static_cast<scaa::ssckg::EntityId>(perm[static_cast<std::size_t>(r.dst_entity())]);
  }
  return out;
}

// Three nodes, hidden width 4, two heads of width 2, hand-set query/key
// matrices and biases.
struct HandInstance {
  scaa::graphormer::ModelParams params;
  Eigen::MatrixXd z;
  scaa::cpg::DistanceMatrix dist;
  std::vector<scaa::graphormer::BiasEdge> edges;
  oracle::Rows z_rows;
  std::vector<std::vector<unsigned>> buckets;
  std::vector<oracle::Bias> oracle_edges;
};

inline HandInstance hand_instance() {
  using scaa::ssckg::RelationType;
  HandInstance h;
  scaa::graphormer::ModelConfig cfg;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.hidden_dim = 4;
  cfg.max_dist = 3;
  cfg.input_dim = 4;
  cfg.ffn_multiplier = 1;
  h.params = scaa::graphormer::init_params(cfg);
  auto& L = h.params.layers[0];
  L.wq.resize(4, 4);
  L.wq << 0.5, -0.2, 0.1, 0.0,
          0.3, 0.4, -0.6, 0.2,
          -0.1, 0.7, 0.2, 0.5,
          0.0, 0.1, 0.3, -0.4;
  L.wk.resize(4, 4);
  L.wk << -0.3, 0.2, 0.6, 0.1,
          0.4, -0.5, 0.0, 0.3,
          0.2, 0.1, -0.2, 0.7,
          0.5, 0.3, 0.1, -0.1;
  L.spatial_bias.resize(2, 5);
  L.spatial_bias << 0.4, 0.1, -0.2, 0.05, -0.7,
                    -0.3, 0.25, 0.15, -0.1, 0.6;
  L.edge_bias = Eigen::MatrixXd::Zero(2, 8);
  L.edge_bias(0, static_cast<int>(RelationType::kTaints)) = 0.9;
  L.edge_bias(1, static_cast<int>(RelationType::kTaints)) = -0.4;
  L.edge_bias(0, static_cast<int>(RelationType::kReaches)) = 0.2;
  L.edge_bias(1, static_cast<int>(RelationType::kReaches)) = 0.5;
  L.edge_bias(0, static_cast<int>(RelationType::kCalls)) = -0.6;
  L.edge_bias(1, static_cast<int>(RelationType::kCalls)) = 0.3;

  h.z_rows = {{1.0, -0.5, 0.25, 0.0}, {0.2, 0.8, -0.4, 0.6}, {-0.7, 0.1, 0.9, -0.3}};
  h.z.resize(3, 4);
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 4; ++c) h.z(i, c) = h.z_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];

  // 0 -> 1 (taints 1.0, reaches 0.8), 1 -> 2 (calls 0.3).
  h.edges = {{0, 1, RelationType::kTaints, 1.0}, {0, 1, RelationType::kReaches, 0.8}, {1, 2, RelationType::kCalls, 0.3}};
  for (const auto& e : h.edges) h.oracle_edges.push_back({e.src, e.dst, static_cast<int>(e.type), e.weight});
  h.buckets = {{0, 1, 2}, {4, 0, 1}, {4, 4, 0}};
  h.dist = scaa::cpg::DistanceMatrix(3, 0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) h.dist.at(i, j) = h.buckets[i][j];
  return h;
}

}  // namespace testing
