#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/io.hpp"

namespace scaa::cpg {

using NodeId = std::int64_t;
using FunctionId = std::int64_t;

enum class NodeKind { kInstruction, kCall, kParam, kReturn, kLiteral };
enum class EdgeKind { kAst, kCfg, kPdg };

std::string_view to_string(NodeKind kind);
std::string_view to_string(EdgeKind kind);

struct CpgNode {
  NodeId id = 0;
  NodeKind kind = NodeKind::kInstruction;
  std::string opcode;
  FunctionId function_id = 0;
  std::int64_t block_id = 0;
  std::map<std::string, std::string> attrs;

  bool operator==(const CpgNode&) const = default;
};

struct CpgEdge {
  NodeId src = 0;
  NodeId dst = 0;
  EdgeKind kind = EdgeKind::kAst;
  std::string label;

  bool operator==(const CpgEdge&) const = default;
};

struct FunctionInfo {
  FunctionId id = 0;
  std::string name;
  bool external = false;

  bool operator==(const FunctionInfo&) const = default;
};

struct DataFlowClaim {
  NodeId source = 0;
  NodeId sink = 0;

  bool operator==(const DataFlowClaim&) const = default;
};

// Immutable, validated Code Property Graph. Construction enforces referential
// integrity, unique node ids, non-negative function/block ids and that every
// declared function owns at least one node.
class CpgGraph {
 public:
  // When `functions` is empty, one function per distinct node function_id is
  // synthesized with the name "fn_<id>".
  CpgGraph(std::string binary_id, std::vector<CpgNode> nodes, std::vector<CpgEdge> edges,
           std::vector<FunctionInfo> functions = {});

  const std::string& binary_id() const { return binary_id_; }
  const std::vector<CpgNode>& nodes() const { return nodes_; }
  const std::vector<CpgEdge>& edges() const { return edges_; }
  // Sorted by function id.
  const std::vector<FunctionInfo>& functions() const { return functions_; }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  bool contains(NodeId id) const { return index_.contains(id); }
  // Position of `id` in nodes(); UnknownNode if absent.
  std::size_t index_of(NodeId id) const;
  const CpgNode& node(NodeId id) const { return nodes_[index_of(id)]; }

  const FunctionInfo* find_function(FunctionId id) const;
  const FunctionInfo* find_function(std::string_view name) const;
  // Node indices owned by a function, in node order.
  std::span<const std::size_t> function_nodes(FunctionId id) const;

  // Directed adjacency (by node index) restricted to PDG edges.
  const std::vector<std::vector<std::size_t>>& pdg_successors() const { return pdg_out_; }

 private:
  std::string binary_id_;
  std::vector<CpgNode> nodes_;
  std::vector<CpgEdge> edges_;
  std::vector<FunctionInfo> functions_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::map<FunctionId, std::vector<std::size_t>> function_nodes_;
  std::vector<std::vector<std::size_t>> pdg_out_;
};

CpgGraph parse_cpg(const io::Json& j);
CpgGraph load_cpg(const std::filesystem::path& path);
io::Json to_json(const CpgGraph& g);
void save_cpg(const CpgGraph& g, const std::filesystem::path& path);

struct VerifyResult {
  bool satisfied = true;
  // Index and value of the first failing claim in input order (when unsatisfied).
  std::optional<std::size_t> failing_index;
  std::optional<DataFlowClaim> failing_claim;
};

// Sat iff every claim's sink is reachable from its source over directed PDG
// edges (zero-length paths included). UnknownNode if a claim names a missing id.
VerifyResult verify_claims(const CpgGraph& g, std::span<const DataFlowClaim> claims);

// Row-major matrix of clamped hop counts.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(std::size_t n, std::uint32_t fill) : n_(n), d_(n * n, fill) {}

  std::size_t size() const { return n_; }
  std::uint32_t operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  std::uint32_t& at(std::size_t i, std::size_t j) { return d_[i * n_ + j]; }

  bool operator==(const DistanceMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint32_t> d_;
};

inline constexpr std::uint32_t kDefaultMaxDist = 20;

using Adjacency = std::vector<std::vector<std::size_t>>;

// Unweighted directed shortest-path hop counts by BFS from every node, clamped
// to max_dist; unreachable pairs take the sentinel max_dist + 1.
DistanceMatrix shortest_path_matrix(const Adjacency& successors, std::uint32_t max_dist);
// Same over all CPG edges, indexed by node position.
DistanceMatrix shortest_path_matrix(const CpgGraph& g, std::uint32_t max_dist);

}  // namespace scaa::cpg
