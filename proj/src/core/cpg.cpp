#include "core/cpg.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "core/errors.hpp"

namespace scaa::cpg {
namespace {

constexpr std::string_view kNodeKindNames[] = {"Instruction", "Call", "Param", "Return",
                                               "Literal"};
constexpr std::string_view kEdgeKindNames[] = {"Ast", "Cfg", "Pdg"};

NodeKind parse_node_kind(const std::string& s, const std::string& where) {
  for (std::size_t i = 0; i < std::size(kNodeKindNames); ++i) {
    if (s == kNodeKindNames[i]) return static_cast<NodeKind>(i);
  }
  raise(Errc::kSchema, where + ": unknown node kind '" + s + "'");
}

EdgeKind parse_edge_kind(const std::string& s, const std::string& where) {
  for (std::size_t i = 0; i < std::size(kEdgeKindNames); ++i) {
    if (s == kEdgeKindNames[i]) return static_cast<EdgeKind>(i);
  }
  raise(Errc::kSchema, where + ": unknown edge kind '" + s + "'");
}

const io::Json& require(const io::Json& obj, const char* field, const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end()) raise(Errc::kSchema, where + ": missing field '" + field + "'");
  return *it;
}

std::int64_t require_int(const io::Json& obj, const char* field, const std::string& where) {
  const auto& v = require(obj, field, where);
  if (!v.is_number_integer()) {
    raise(Errc::kSchema, where + ": field '" + field + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

std::string require_string(const io::Json& obj, const char* field, const std::string& where) {
  const auto& v = require(obj, field, where);
  if (!v.is_string()) raise(Errc::kSchema, where + ": field '" + field + "' must be a string");
  return v.get<std::string>();
}

std::string optional_string(const io::Json& obj, const char* field, const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) raise(Errc::kSchema, where + ": field '" + field + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

std::string_view to_string(NodeKind kind) { return kNodeKindNames[static_cast<int>(kind)]; }
std::string_view to_string(EdgeKind kind) { return kEdgeKindNames[static_cast<int>(kind)]; }

CpgGraph::CpgGraph(std::string binary_id, std::vector<CpgNode> nodes, std::vector<CpgEdge> edges,
                   std::vector<FunctionInfo> functions)
    : binary_id_(std::move(binary_id)),
      nodes_(std::move(nodes)),
      edges_(std::move(edges)),
      functions_(std::move(functions)) {
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    const std::string where = "nodes[" + std::to_string(i) + "]";
    if (!index_.emplace(n.id, i).second) {
      raise(Errc::kSchema, where + ": duplicate node id " + std::to_string(n.id));
    }
    if (n.function_id < 0) raise(Errc::kSchema, where + ": negative function_id");
    if (n.block_id < 0) raise(Errc::kSchema, where + ": negative block_id");
    function_nodes_[n.function_id].push_back(i);
  }

  pdg_out_.resize(nodes_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto& e = edges_[i];
    const std::string where = "edges[" + std::to_string(i) + "]";
    auto s = index_.find(e.src);
    if (s == index_.end()) {
      raise(Errc::kSchema, where + ": src references unknown node " + std::to_string(e.src));
    }
    auto d = index_.find(e.dst);
    if (d == index_.end()) {
      raise(Errc::kSchema, where + ": dst references unknown node " + std::to_string(e.dst));
    }
    if (e.kind == EdgeKind::kPdg) pdg_out_[s->second].push_back(d->second);
  }

  if (functions_.empty()) {
    for (const auto& [fid, _] : function_nodes_) {
      functions_.push_back({fid, "fn_" + std::to_string(fid), false});
    }
  } else {
    std::sort(functions_.begin(), functions_.end(),
              [](const FunctionInfo& a, const FunctionInfo& b) { return a.id < b.id; });
    std::set<std::string> names;
    for (std::size_t i = 0; i < functions_.size(); ++i) {
      const auto& f = functions_[i];
      const std::string where = "function " + std::to_string(f.id) + " (" + f.name + ")";
      if (i > 0 && functions_[i - 1].id == f.id) {
        raise(Errc::kSchema, where + ": duplicate function id");
      }
      if (f.name.empty()) raise(Errc::kSchema, where + ": empty function name");
      if (!names.insert(f.name).second) raise(Errc::kSchema, where + ": duplicate function name");
      if (!function_nodes_.contains(f.id)) raise(Errc::kSchema, where + ": has no nodes");
    }
    for (const auto& [fid, idx] : function_nodes_) {
      if (find_function(fid) == nullptr) {
        raise(Errc::kSchema, "nodes[" + std::to_string(idx.front()) +
                                 "]: function_id " + std::to_string(fid) + " is not declared");
      }
    }
  }
}

std::size_t CpgGraph::index_of(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) raise(Errc::kUnknownNode, "node " + std::to_string(id));
  return it->second;
}

const FunctionInfo* CpgGraph::find_function(FunctionId id) const {
  auto it = std::lower_bound(functions_.begin(), functions_.end(), id,
                             [](const FunctionInfo& f, FunctionId v) { return f.id < v; });
  return (it != functions_.end() && it->id == id) ? &*it : nullptr;
}

const FunctionInfo* CpgGraph::find_function(std::string_view name) const {
  for (const auto& f : functions_) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

std::span<const std::size_t> CpgGraph::function_nodes(FunctionId id) const {
  auto it = function_nodes_.find(id);
  if (it == function_nodes_.end()) return {};
  return it->second;
}

CpgGraph parse_cpg(const io::Json& j) {
  if (!j.is_object()) raise(Errc::kSchema, "top level must be an object");
  const std::string binary_id = optional_string(j, "binary_id", "top level");

  std::vector<CpgNode> nodes;
  const auto& jn = require(j, "nodes", "top level");
  if (!jn.is_array()) raise(Errc::kSchema, "top level: 'nodes' must be an array");
  nodes.reserve(jn.size());
  for (std::size_t i = 0; i < jn.size(); ++i) {
    const auto& o = jn[i];
    const std::string where = "nodes[" + std::to_string(i) + "]";
    if (!o.is_object()) raise(Errc::kSchema, where + ": must be an object");
    CpgNode n;
    n.id = require_int(o, "id", where);
    n.kind = parse_node_kind(require_string(o, "kind", where), where);
    n.opcode = optional_string(o, "opcode", where);
    n.function_id = require_int(o, "function_id", where);
    n.block_id = require_int(o, "block_id", where);
    if (auto it = o.find("attrs"); it != o.end() && !it->is_null()) {
      if (!it->is_object()) raise(Errc::kSchema, where + ": 'attrs' must be an object");
      for (const auto& [k, v] : it->items()) {
        n.attrs[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
    }
    nodes.push_back(std::move(n));
  }

  std::vector<CpgEdge> edges;
  const auto& je = require(j, "edges", "top level");
  if (!je.is_array()) raise(Errc::kSchema, "top level: 'edges' must be an array");
  edges.reserve(je.size());
  for (std::size_t i = 0; i < je.size(); ++i) {
    const auto& o = je[i];
    const std::string where = "edges[" + std::to_string(i) + "]";
    if (!o.is_object()) raise(Errc::kSchema, where + ": must be an object");
    CpgEdge e;
    e.src = require_int(o, "src", where);
    e.dst = require_int(o, "dst", where);
    e.kind = parse_edge_kind(require_string(o, "kind", where), where);
    e.label = optional_string(o, "label", where);
    edges.push_back(std::move(e));
  }

  std::vector<FunctionInfo> functions;
  if (auto it = j.find("functions"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) raise(Errc::kSchema, "top level: 'functions' must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& o = (*it)[i];
      const std::string where = "functions[" + std::to_string(i) + "]";
      FunctionInfo f;
      f.id = require_int(o, "id", where);
      f.name = require_string(o, "name", where);
      if (auto ext = o.find("external"); ext != o.end()) {
        if (!ext->is_boolean()) raise(Errc::kSchema, where + ": 'external' must be a boolean");
        f.external = ext->get<bool>();
      }
      functions.push_back(std::move(f));
    }
  }
  return CpgGraph(binary_id, std::move(nodes), std::move(edges), std::move(functions));
}

CpgGraph load_cpg(const std::filesystem::path& path) {
  const auto j = io::read_json(path);
  try {
    return parse_cpg(j);
  } catch (const Error& e) {
    if (e.code() == Errc::kSchema) raise(Errc::kSchema, path.string() + ": " + e.detail());
    throw;
  }
}

io::Json to_json(const CpgGraph& g) {
  io::Json j;
  j["binary_id"] = g.binary_id();
  auto& fs = j["functions"] = io::Json::array();
  for (const auto& f : g.functions()) {
    fs.push_back({{"id", f.id}, {"name", f.name}, {"external", f.external}});
  }
  auto& ns = j["nodes"] = io::Json::array();
  for (const auto& n : g.nodes()) {
    io::Json attrs = io::Json::object();
    for (const auto& [k, v] : n.attrs) attrs[k] = v;
    ns.push_back({{"id", n.id},
                  {"kind", to_string(n.kind)},
                  {"opcode", n.opcode},
                  {"function_id", n.function_id},
                  {"block_id", n.block_id},
                  {"attrs", std::move(attrs)}});
  }
  auto& es = j["edges"] = io::Json::array();
  for (const auto& e : g.edges()) {
    es.push_back({{"src", e.src}, {"dst", e.dst}, {"kind", to_string(e.kind)}, {"label", e.label}});
  }
  return j;
}

void save_cpg(const CpgGraph& g, const std::filesystem::path& path) {
  io::write_text_atomic(path, io::dump(to_json(g)));
}

VerifyResult verify_claims(const CpgGraph& g, std::span<const DataFlowClaim> claims) {
  for (const auto& c : claims) {
    if (!g.contains(c.source)) raise(Errc::kUnknownNode, "claim source " + std::to_string(c.source));
    if (!g.contains(c.sink)) raise(Errc::kUnknownNode, "claim sink " + std::to_string(c.sink));
  }
  const auto& succ = g.pdg_successors();
  std::vector<std::uint32_t> stamp(g.node_count(), 0);
  std::uint32_t epoch = 0;
  std::vector<std::size_t> queue;
  for (std::size_t ci = 0; ci < claims.size(); ++ci) {
    const std::size_t from = g.index_of(claims[ci].source);
    const std::size_t to = g.index_of(claims[ci].sink);
    bool found = from == to;
    ++epoch;
    queue.assign(1, from);
    stamp[from] = epoch;
    for (std::size_t head = 0; !found && head < queue.size(); ++head) {
      for (std::size_t next : succ[queue[head]]) {
        if (stamp[next] == epoch) continue;
        if (next == to) {
          found = true;
          break;
        }
        stamp[next] = epoch;
        queue.push_back(next);
      }
    }
    if (!found) return {false, ci, claims[ci]};
  }
  return {};
}

DistanceMatrix shortest_path_matrix(const Adjacency& successors, std::uint32_t max_dist) {
  if (max_dist < 1) raise(Errc::kInvalidArgument, "max_dist must be >= 1");
  const std::size_t n = successors.size();
  const std::uint32_t sentinel = max_dist + 1;
  DistanceMatrix out(n, sentinel);
  std::vector<std::uint32_t> dist(n);
  std::deque<std::size_t> queue;
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), UINT32_MAX);
    dist[s] = 0;
    queue.assign(1, s);
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t v : successors[u]) {
        if (dist[v] != UINT32_MAX) continue;
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
    for (std::size_t t = 0; t < n; ++t) {
      if (dist[t] != UINT32_MAX) out.at(s, t) = std::min(dist[t], max_dist);
    }
  }
  return out;
}

DistanceMatrix shortest_path_matrix(const CpgGraph& g, std::uint32_t max_dist) {
  Adjacency succ(g.node_count());
  for (const auto& e : g.edges()) succ[g.index_of(e.src)].push_back(g.index_of(e.dst));
  return shortest_path_matrix(succ, max_dist);
}

}  // namespace scaa::cpg
