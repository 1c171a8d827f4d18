#pragma once

#include <filesystem>
#include <cmath>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "core/cpg.hpp"
#include "core/embedding.hpp"

namespace testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(SCAA_FIXTURES_DIR) / name;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("scaa_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline scaa::cpg::CpgNode node(scaa::cpg::NodeId id, scaa::cpg::FunctionId fn, std::int64_t block = 0,
                               scaa::cpg::NodeKind kind = scaa::cpg::NodeKind::kInstruction,
                               std::string opcode = "mov") {
  scaa::cpg::CpgNode n;
  n.id = id;
  n.function_id = fn;
  n.block_id = block;
  n.kind = kind;
  n.opcode = std::move(opcode);
  return n;
}

inline scaa::cpg::CpgEdge edge(scaa::cpg::NodeId a, scaa::cpg::NodeId b, scaa::cpg::EdgeKind kind,
                               std::string label = {}) {
  return {a, b, kind, std::move(label)};
}

inline std::vector<double> random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dim);
  double s = 0.0;
  for (double& x : v) {
    x = g(rng);
    s += x * x;
  }
  for (double& x : v) x /= std::sqrt(s);
  return v;
}

inline std::vector<double> values(const scaa::embedding::EmbeddingVector& v) {
  return {v.values().begin(), v.values().end()};
}

}  // namespace testing
