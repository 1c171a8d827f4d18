#include "core/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "core/errors.hpp"
#include "core/io.hpp"

namespace scaa::embedding {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t token_hash(std::string_view token, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ splitmix64(seed);
  for (unsigned char c : token) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

bool is_token_char(unsigned char c) { return c >= 0x80 || std::isalnum(c) != 0; }

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  double s = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v)) raise(Errc::kInvalidArgument, "embedding entries must be finite");
    s += v * v;
  }
  norm_ = std::sqrt(s);
}

EmbeddingVector EmbeddingVector::normalized() const {
  if (norm_ == 0.0) raise(Errc::kZeroVector, "cannot normalize a zero vector");
  std::vector<double> v(values_);
  for (double& x : v) x /= norm_;
  return EmbeddingVector(std::move(v));
}

EmbeddingVector EmbeddingVector::basis(std::size_t dimension, std::size_t axis) {
  std::vector<double> v(dimension, 0.0);
  v.at(axis) = 1.0;
  return EmbeddingVector(std::move(v));
}

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) {
    raise(Errc::kDimensionMismatch,
          std::to_string(a.dimension()) + " vs " + std::to_string(b.dimension()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) s += a[i] * b[i];
  return s;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  const double d = dot(a, b);
  if (a.norm() == 0.0 || b.norm() == 0.0) raise(Errc::kZeroVector, "cosine of a zero vector");
  return std::clamp(d / (a.norm() * b.norm()), -1.0, 1.0);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (is_token_char(c)) {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

HashEmbedder::HashEmbedder(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension < 2) raise(Errc::kInvalidArgument, "hash embedder dimension must be >= 2");
}

EmbeddingVector HashEmbedder::embed(std::string_view text) const {
  std::vector<double> acc(dimension_, 0.0);
  for (const auto& tok : tokenize(text)) {
    const std::uint64_t h = token_hash(tok, seed_);
    acc[h % dimension_] += (h >> 63) != 0 ? -1.0 : 1.0;
  }
  EmbeddingVector v(std::move(acc));
  // Cancelling signs can also produce a zero vector; both cases take e_0.
  if (v.norm() == 0.0) return EmbeddingVector::basis(dimension_, 0);
  return v.normalized();
}

FileProvider::FileProvider(std::unordered_map<std::string, EmbeddingVector> table)
    : table_(std::move(table)) {
  for (const auto& [key, vec] : table_) {
    if (dimension_ == 0) dimension_ = vec.dimension();
    if (vec.dimension() != dimension_) {
      raise(Errc::kDimensionMismatch, "embedding for '" + key + "' has dimension " +
                                          std::to_string(vec.dimension()) + ", expected " +
                                          std::to_string(dimension_));
    }
  }
}

namespace {
std::unordered_map<std::string, EmbeddingVector> read_table(const std::filesystem::path& path) {
  const auto j = io::read_json(path);
  if (!j.is_object()) raise(Errc::kSchema, path.string() + ": embedding file must be an object");
  std::unordered_map<std::string, EmbeddingVector> table;
  for (const auto& [key, arr] : j.items()) {
    if (!arr.is_array()) raise(Errc::kSchema, path.string() + ": value for '" + key + "' must be a list");
    std::vector<double> v;
    v.reserve(arr.size());
    for (const auto& x : arr) {
      if (!x.is_number()) raise(Errc::kSchema, path.string() + ": non-numeric entry under '" + key + "'");
      v.push_back(x.get<double>());
    }
    table.emplace(key, EmbeddingVector(std::move(v)));
  }
  return table;
}
}  // namespace

FileProvider::FileProvider(const std::filesystem::path& path) : FileProvider(read_table(path)) {}

EmbeddingVector FileProvider::embed(std::string_view text) const {
  auto it = table_.find(std::string(text));
  if (it == table_.end()) raise(Errc::kMissingEmbedding, "no embedding for '" + std::string(text) + "'");
  return it->second;
}

std::unique_ptr<EmbeddingProvider> hash_embedder(std::size_t dimension, std::uint64_t seed) {
  return std::make_unique<HashEmbedder>(dimension, seed);
}

std::unique_ptr<EmbeddingProvider> file_provider(const std::filesystem::path& path) {
  return std::make_unique<FileProvider>(path);
}

}  // namespace scaa::embedding
