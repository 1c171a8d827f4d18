#include "core/graphormer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <type_traits>

#include "core/errors.hpp"

namespace scaa::graphormer {
namespace {

constexpr char kMagic[8] = {'S', 'C', 'A', 'A', 'G', 'F', 'W', '\0'};
constexpr double kLayerNormEps = 1e-12;
constexpr std::size_t kTiers = 4;

class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : gen_(seed) {}
  // Uniform in [-a, a); bit-exact across standard libraries.
  double next(double a) {
    const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return a * (2.0 * u - 1.0);
  }
  void fill(Eigen::MatrixXd& m, double a) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = next(a);
    }
  }

 private:
  std::mt19937_64 gen_;
};

Eigen::MatrixXd uniform(UniformSource& rng, std::size_t rows, std::size_t cols, double fan_in) {
  Eigen::MatrixXd m(rows, cols);
  rng.fill(m, 1.0 / std::sqrt(fan_in));
  return m;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

template <class T>
struct Named {
  std::string name;
  T* value;
};

template <class P>
using Slot = std::conditional_t<std::is_const_v<P>, const Eigen::MatrixXd, Eigen::MatrixXd>;
template <class P>
using RowSlot = std::conditional_t<std::is_const_v<P>, const Eigen::RowVectorXd, Eigen::RowVectorXd>;

template <class P>
std::vector<Named<Slot<P>>> tensor_slots(P& p) {
  std::vector<Named<Slot<P>>> out{{"input_proj", &p.input_proj}, {"tier_embedding", &p.tier_embedding}};
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& L = p.layers[l];
    const std::string pre = "layer" + std::to_string(l) + ".";
    out.push_back({pre + "wq", &L.wq});
    out.push_back({pre + "wk", &L.wk});
    out.push_back({pre + "wv", &L.wv});
    out.push_back({pre + "wo", &L.wo});
    out.push_back({pre + "ffn_in", &L.ffn_in});
    out.push_back({pre + "ffn_out", &L.ffn_out});
    out.push_back({pre + "spatial_bias", &L.spatial_bias});
    out.push_back({pre + "edge_bias", &L.edge_bias});
  }
  return out;
}

// Row vectors are stored as 1 x n tensors.
template <class P>
std::vector<Named<RowSlot<P>>> row_slots(P& p) {
  std::vector<Named<RowSlot<P>>> out;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& L = p.layers[l];
    const std::string pre = "layer" + std::to_string(l) + ".";
    out.push_back({pre + "ffn_in_bias", &L.ffn_in_bias});
    out.push_back({pre + "ffn_out_bias", &L.ffn_out_bias});
    out.push_back({pre + "ln_gain", &L.ln_gain});
    out.push_back({pre + "ln_offset", &L.ln_offset});
  }
  return out;
}

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
  }
  void f64(double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  std::string_view take(std::size_t n) {
    if (in_.size() - pos_ < n) raise(Errc::kCorruptFile, "weight file truncated");
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32() {
    auto s = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }
  double f64() {
    auto s = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[i])) << (8 * i);
    return std::bit_cast<double>(v);
  }
  std::string str() { return std::string(take(u32())); }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

ModelParams zero_params(const ModelConfig& cfg) {
  const auto h = static_cast<Eigen::Index>(cfg.hidden_dim);
  const auto f = static_cast<Eigen::Index>(cfg.hidden_dim * cfg.ffn_multiplier);
  const auto heads = static_cast<Eigen::Index>(cfg.heads);
  ModelParams p;
  p.config = cfg;
  p.input_proj = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cfg.input_dim), h);
  p.tier_embedding = Eigen::MatrixXd::Zero(kTiers, h);
  p.layers.resize(cfg.layers);
  for (auto& L : p.layers) {
    L.wq = L.wk = L.wv = L.wo = Eigen::MatrixXd::Zero(h, h);
    L.ffn_in = Eigen::MatrixXd::Zero(h, f);
    L.ffn_in_bias = Eigen::RowVectorXd::Zero(f);
    L.ffn_out = Eigen::MatrixXd::Zero(f, h);
    L.ffn_out_bias = Eigen::RowVectorXd::Zero(h);
    L.ln_gain = Eigen::RowVectorXd::Ones(h);
    L.ln_offset = Eigen::RowVectorXd::Zero(h);
    L.spatial_bias = Eigen::MatrixXd::Zero(heads, cfg.max_dist + 2);
    L.edge_bias = Eigen::MatrixXd::Zero(heads, static_cast<Eigen::Index>(ssckg::kRelationTypeCount));
  }
  return p;
}

}  // namespace

void ModelConfig::validate() const {
  if (layers == 0) raise(Errc::kConfig, "model layers must be >= 1");
  if (heads == 0 || hidden_dim == 0) raise(Errc::kConfig, "model heads and hidden_dim must be >= 1");
  if (hidden_dim % heads != 0) {
    raise(Errc::kConfig, "hidden_dim " + std::to_string(hidden_dim) + " is not divisible by heads " +
                             std::to_string(heads));
  }
  if (input_dim == 0 || ffn_multiplier == 0) raise(Errc::kConfig, "input_dim and ffn_multiplier must be >= 1");
  if (max_dist == 0) raise(Errc::kConfig, "max_dist must be >= 1");
}

bool ModelConfig::same_shape(const ModelConfig& o) const {
  return layers == o.layers && heads == o.heads && hidden_dim == o.hidden_dim && max_dist == o.max_dist &&
         input_dim == o.input_dim && ffn_multiplier == o.ffn_multiplier;
}

io::Json to_json(const ModelConfig& c) {
  return {{"layers", c.layers},
          {"heads", c.heads},
          {"hidden_dim", c.hidden_dim},
          {"max_dist", c.max_dist},
          {"input_dim", c.input_dim},
          {"ffn_multiplier", c.ffn_multiplier},
          {"seed", c.seed},
          {"edge_bias", c.edge_bias == EdgeBiasMode::kSum ? "sum" : "max"}};
}

ModelConfig model_config_from_json(const io::Json& j) {
  ModelConfig c;
  if (!j.is_object()) raise(Errc::kConfig, "model config must be an object");
  try {
    c.layers = j.value("layers", c.layers);
    c.heads = j.value("heads", c.heads);
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.max_dist = j.value("max_dist", c.max_dist);
    c.input_dim = j.value("input_dim", c.input_dim);
    c.ffn_multiplier = j.value("ffn_multiplier", c.ffn_multiplier);
    c.seed = j.value("seed", c.seed);
    const auto mode = j.value("edge_bias", std::string("sum"));
    if (mode == "sum") {
      c.edge_bias = EdgeBiasMode::kSum;
    } else if (mode == "max") {
      c.edge_bias = EdgeBiasMode::kMax;
    } else {
      raise(Errc::kConfig, "edge_bias must be 'sum' or 'max'");
    }
  } catch (const io::Json::exception& e) {
    raise(Errc::kConfig, std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

ModelParams init_params(const ModelConfig& cfg) {
  cfg.validate();
  const double h = static_cast<double>(cfg.hidden_dim);
  const std::size_t f = cfg.hidden_dim * cfg.ffn_multiplier;
  UniformSource rng(cfg.seed);
  ModelParams p = zero_params(cfg);
  p.input_proj = uniform(rng, cfg.input_dim, cfg.hidden_dim, static_cast<double>(cfg.input_dim));
  // Scaled like the projected summary features so neither dominates.
  p.tier_embedding = uniform(rng, kTiers, cfg.hidden_dim, static_cast<double>(cfg.input_dim));
  for (auto& L : p.layers) {
    L.wq = uniform(rng, cfg.hidden_dim, cfg.hidden_dim, h);
    L.wk = uniform(rng, cfg.hidden_dim, cfg.hidden_dim, h);
    L.wv = uniform(rng, cfg.hidden_dim, cfg.hidden_dim, h);
    L.wo = uniform(rng, cfg.hidden_dim, cfg.hidden_dim, h);
    L.ffn_in = uniform(rng, cfg.hidden_dim, f, h);
    L.ffn_out = uniform(rng, f, cfg.hidden_dim, static_cast<double>(f));
    L.spatial_bias = uniform(rng, cfg.heads, cfg.max_dist + 2, cfg.max_dist + 2.0);
    L.edge_bias = uniform(rng, cfg.heads, ssckg::kRelationTypeCount, ssckg::kRelationTypeCount);
  }
  return p;
}

std::vector<BiasEdge> bias_edges(const ssckg::SsckgGraph& kg) {
  std::vector<BiasEdge> out;
  for (const auto& r : kg.relations) {
    if (!r.targets_entity()) continue;
    out.push_back({static_cast<std::size_t>(r.src), static_cast<std::size_t>(r.dst_entity()), r.type, r.weight});
  }
  std::sort(out.begin(), out.end(), [](const BiasEdge& a, const BiasEdge& b) {
    return std::tie(a.src, a.dst, a.type, a.weight) < std::tie(b.src, b.dst, b.type, b.weight);
  });
  return out;
}

cpg::DistanceMatrix entity_distances(const ssckg::SsckgGraph& kg, std::uint32_t max_dist) {
  cpg::Adjacency adj(kg.entities.size());
  for (const auto& e : bias_edges(kg)) {
    if (e.src != e.dst) adj[e.src].push_back(e.dst);
  }
  for (auto& a : adj) a.erase(std::unique(a.begin(), a.end()), a.end());
  return cpg::shortest_path_matrix(adj, max_dist);
}

Eigen::MatrixXd attention_matrix(const Eigen::MatrixXd& z, const cpg::DistanceMatrix& dist,
                                 std::span<const BiasEdge> edges, const ModelParams& p, std::size_t layer,
                                 std::size_t head) {
  const auto& cfg = p.config;
  const auto n = z.rows();
  if (static_cast<std::size_t>(n) != dist.size()) {
    raise(Errc::kShapeMismatch, "distance matrix is " + std::to_string(dist.size()) + "x" +
                                    std::to_string(dist.size()) + " for " + std::to_string(n) + " nodes");
  }
  if (static_cast<std::size_t>(z.cols()) != cfg.hidden_dim) {
    raise(Errc::kShapeMismatch, "node features have " + std::to_string(z.cols()) + " columns, expected " +
                                    std::to_string(cfg.hidden_dim));
  }
  if (layer >= p.layers.size() || head >= cfg.heads) raise(Errc::kInvalidArgument, "layer or head out of range");
  const auto& L = p.layers[layer];
  const auto d = static_cast<Eigen::Index>(cfg.head_dim());
  const auto off = static_cast<Eigen::Index>(head) * d;

  const Eigen::MatrixXd q = z * L.wq.middleCols(off, d);
  const Eigen::MatrixXd k = z * L.wk.middleCols(off, d);
  Eigen::MatrixXd a = (q * k.transpose()) / std::sqrt(static_cast<double>(d));

  const auto sentinel = cfg.max_dist + 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto bucket = std::min<std::uint32_t>(dist(i, j), sentinel);
      a(i, j) += L.spatial_bias(static_cast<Eigen::Index>(head), bucket);
    }
  }

  Eigen::MatrixXd edge_term = Eigen::MatrixXd::Zero(n, n);
  std::vector<bool> has_term(static_cast<std::size_t>(n * n), false);
  for (const auto& e : edges) {
    if (e.src == e.dst) continue;
    if (e.src >= static_cast<std::size_t>(n) || e.dst >= static_cast<std::size_t>(n)) {
      raise(Errc::kShapeMismatch, "bias edge endpoint out of range");
    }
    const double t = L.edge_bias(static_cast<Eigen::Index>(head), static_cast<Eigen::Index>(e.type)) * e.weight;
    const auto i = static_cast<Eigen::Index>(e.src);
    const auto j = static_cast<Eigen::Index>(e.dst);
    const std::size_t slot = e.src * static_cast<std::size_t>(n) + e.dst;
    if (cfg.edge_bias == EdgeBiasMode::kSum || !has_term[slot]) {
      edge_term(i, j) = has_term[slot] ? edge_term(i, j) + t : t;
    } else {
      edge_term(i, j) = std::max(edge_term(i, j), t);
    }
    has_term[slot] = true;
  }
  a += edge_term;

  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = a.row(i).maxCoeff();
    a.row(i) = (a.row(i).array() - m).exp();
    a.row(i) /= a.row(i).sum();
  }
  return a;
}

Eigen::MatrixXd input_features(const ssckg::SsckgGraph& kg, const ModelParams& p) {
  const auto& cfg = p.config;
  const auto n = static_cast<Eigen::Index>(kg.entities.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(cfg.input_dim));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& e = kg.entities[static_cast<std::size_t>(i)];
    if (e.embedding.dimension() == 0) raise(Errc::kMissingEmbedding, "entity " + e.name + " has no embedding");
    if (e.embedding.dimension() != cfg.input_dim) {
      raise(Errc::kDimensionMismatch, "entity " + e.name + " embedding has dimension " +
                                          std::to_string(e.embedding.dimension()) + ", model expects " +
                                          std::to_string(cfg.input_dim));
    }
    for (Eigen::Index c = 0; c < x.cols(); ++c) x(i, c) = e.embedding[static_cast<std::size_t>(c)];
  }
  Eigen::MatrixXd z = x * p.input_proj;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto tier = std::min(kg.entities[static_cast<std::size_t>(i)].label.tier(), kTiers - 1);
    z.row(i) += p.tier_embedding.row(static_cast<Eigen::Index>(tier));
  }
  return z;
}

Eigen::MatrixXd apply_layer(const Eigen::MatrixXd& z, const cpg::DistanceMatrix& dist,
                            std::span<const BiasEdge> edges, const ModelParams& p, std::size_t layer,
                            ForwardTrace* trace) {
  const auto& cfg = p.config;
  const auto& L = p.layers.at(layer);
  const auto d = static_cast<Eigen::Index>(cfg.head_dim());
  const auto n = z.rows();

  Eigen::MatrixXd heads(n, static_cast<Eigen::Index>(cfg.hidden_dim));
  if (trace != nullptr) trace->attention.emplace_back();
  for (std::size_t h = 0; h < cfg.heads; ++h) {
    const auto off = static_cast<Eigen::Index>(h) * d;
    Eigen::MatrixXd a = attention_matrix(z, dist, edges, p, layer, h);
    heads.middleCols(off, d) = a * (z * L.wv.middleCols(off, d));
    if (trace != nullptr) trace->attention.back().push_back(std::move(a));
  }
  const Eigen::MatrixXd attn = heads * L.wo;

  Eigen::MatrixXd hidden = attn * L.ffn_in;
  hidden.rowwise() += L.ffn_in_bias;
  hidden = hidden.unaryExpr(&gelu);
  Eigen::MatrixXd ffn = hidden * L.ffn_out;
  ffn.rowwise() += L.ffn_out_bias;

  Eigen::MatrixXd x = z + ffn;
  const double width = static_cast<double>(x.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mean = x.row(i).sum() / width;
    x.row(i).array() -= mean;
    const double var = x.row(i).squaredNorm() / width;
    x.row(i) /= std::sqrt(var + kLayerNormEps);
  }
  if (trace != nullptr) trace->normalized.push_back(x);
  x.array().rowwise() *= L.ln_gain.array();
  x.rowwise() += L.ln_offset;
  return x;
}

std::vector<NodeEmbedding> forward(const ssckg::SsckgGraph& kg, const ModelParams& p, ForwardTrace* trace) {
  if (kg.entities.empty()) raise(Errc::kEmptyGraph, "SSCKG has no entities");
  const auto dist = entity_distances(kg, p.config.max_dist);
  const auto edges = bias_edges(kg);
  Eigen::MatrixXd z = input_features(kg, p);
  for (std::size_t l = 0; l < p.layers.size(); ++l) z = apply_layer(z, dist, edges, p, l, trace);

  std::vector<NodeEmbedding> out(kg.entities.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].entity_id = kg.entities[i].id;
    out[i].z.resize(static_cast<std::size_t>(z.cols()));
    for (Eigen::Index c = 0; c < z.cols(); ++c) out[i].z[static_cast<std::size_t>(c)] = z(static_cast<Eigen::Index>(i), c);
    for (double v : out[i].z) {
      if (!std::isfinite(v)) raise(Errc::kInternal, "non-finite embedding for entity " + kg.entities[i].name);
    }
  }
  return out;
}

std::string serialize_params(const ModelParams& p) {
  const auto mats = tensor_slots(p);
  const auto rows = row_slots(p);
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kWeightFormatVersion);
  w.str(to_json(p.config).dump());
  w.u32(static_cast<std::uint32_t>(mats.size() + rows.size()));
  auto put = [&](const std::string& name, Eigen::Index r, Eigen::Index c, auto at) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(r));
    w.u32(static_cast<std::uint32_t>(c));
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < c; ++j) w.f64(at(i, j));
    }
  };
  for (const auto& t : mats) {
    put(t.name, t.value->rows(), t.value->cols(), [&](Eigen::Index i, Eigen::Index j) { return (*t.value)(i, j); });
  }
  for (const auto& t : rows) {
    put(t.name, 1, t.value->size(), [&](Eigen::Index, Eigen::Index j) { return (*t.value)(j); });
  }
  return w.take();
}

ModelParams deserialize_params(std::string_view bytes, const ModelConfig* expected) {
  Reader r(bytes);
  if (bytes.size() < sizeof kMagic || std::memcmp(r.take(sizeof kMagic).data(), kMagic, sizeof kMagic) != 0) {
    raise(Errc::kCorruptFile, "not a weight file (bad magic)");
  }
  const auto version = r.u32();
  if (version != kWeightFormatVersion) {
    raise(Errc::kVersionMismatch, "weight file version " + std::to_string(version) + ", expected " +
                                      std::to_string(kWeightFormatVersion));
  }
  ModelConfig cfg;
  try {
    cfg = model_config_from_json(io::parse_json(r.str(), "weight file header"));
  } catch (const Error& e) {
    if (e.code() == Errc::kCorruptFile) throw;
    raise(Errc::kCorruptFile, std::string("weight file header: ") + e.what());
  }
  if (expected != nullptr && !expected->same_shape(cfg)) {
    raise(Errc::kShapeMismatch, "weight file config " + to_json(cfg).dump() + " does not match expected " +
                                    to_json(*expected).dump());
  }
  ModelParams p = zero_params(cfg);
  auto mats = tensor_slots(p);
  auto rows = row_slots(p);
  const auto count = r.u32();
  if (count != mats.size() + rows.size()) {
    raise(Errc::kShapeMismatch, "weight file holds " + std::to_string(count) + " tensors, config needs " +
                                    std::to_string(mats.size() + rows.size()));
  }
  auto header = [&](const std::string& name, Eigen::Index rr, Eigen::Index cc) {
    const auto got = r.str();
    const auto gr = r.u32();
    const auto gc = r.u32();
    if (got != name || gr != rr || gc != cc) {
      raise(Errc::kShapeMismatch, "tensor " + got + " (" + std::to_string(gr) + "x" + std::to_string(gc) +
                                      ") where " + name + " (" + std::to_string(rr) + "x" + std::to_string(cc) +
                                      ") was expected");
    }
  };
  for (auto& t : mats) {
    header(t.name, t.value->rows(), t.value->cols());
    for (Eigen::Index i = 0; i < t.value->rows(); ++i) {
      for (Eigen::Index j = 0; j < t.value->cols(); ++j) (*t.value)(i, j) = r.f64();
    }
  }
  for (auto& t : rows) {
    header(t.name, 1, t.value->size());
    for (Eigen::Index j = 0; j < t.value->size(); ++j) (*t.value)(j) = r.f64();
  }
  if (!r.done()) raise(Errc::kCorruptFile, "trailing bytes after last tensor");
  for (const auto& t : mats) {
    if (!t.value->allFinite()) raise(Errc::kCorruptFile, "tensor " + t.name + " has non-finite entries");
  }
  for (const auto& t : rows) {
    if (!t.value->allFinite()) raise(Errc::kCorruptFile, "tensor " + t.name + " has non-finite entries");
  }
  return p;
}

void save_params(const ModelParams& p, const std::filesystem::path& path) {
  io::write_text_atomic(path, serialize_params(p));
}

ModelParams load_params(const std::filesystem::path& path, const ModelConfig* expected) {
  return deserialize_params(io::read_text(path), expected);
}

io::Json to_json(const EmbeddingSet& s) {
  io::Json arr = io::Json::array();
  for (std::size_t i = 0; i < s.embeddings.size(); ++i) {
    arr.push_back({{"entity_id", s.embeddings[i].entity_id},
                   {"name", i < s.names.size() ? s.names[i] : std::string{}},
                   {"z", s.embeddings[i].z}});
  }
  const std::size_t dim = s.embeddings.empty() ? 0 : s.embeddings.front().z.size();
  return {{"binary_id", s.binary_id}, {"hidden_dim", dim}, {"embeddings", std::move(arr)}};
}

EmbeddingSet embedding_set_from_json(const io::Json& j) {
  if (!j.is_object() || !j.contains("embeddings") || !j["embeddings"].is_array()) {
    raise(Errc::kSchema, "node embeddings must be an object with an 'embeddings' list");
  }
  EmbeddingSet s;
  s.binary_id = j.value("binary_id", std::string{});
  try {
    for (const auto& o : j["embeddings"]) {
      NodeEmbedding e;
      e.entity_id = o.at("entity_id").get<ssckg::EntityId>();
      e.z = o.at("z").get<std::vector<double>>();
      if (!s.embeddings.empty() && e.z.size() != s.embeddings.front().z.size()) {
        raise(Errc::kDimensionMismatch, "node embeddings have mixed dimensions");
      }
      for (double v : e.z) {
        if (!std::isfinite(v)) raise(Errc::kSchema, "node embedding entries must be finite");
      }
      s.names.push_back(o.value("name", std::string{}));
      s.embeddings.push_back(std::move(e));
    }
  } catch (const io::Json::exception& e) {
    raise(Errc::kSchema, std::string("node embeddings: ") + e.what());
  }
  return s;
}

void save_embeddings(const EmbeddingSet& s, const std::filesystem::path& path) {
  io::write_text_atomic(path, io::dump(to_json(s)));
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  return embedding_set_from_json(io::read_json(path));
}

}  // namespace scaa::graphormer
