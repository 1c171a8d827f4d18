#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace scaa::embedding {

inline constexpr std::size_t kDefaultDimension = 384;

// Fixed-length vector with its Euclidean norm cached at construction.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values);

  std::size_t dimension() const { return values_.size(); }
  double norm() const { return norm_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  EmbeddingVector normalized() const;
  static EmbeddingVector basis(std::size_t dimension, std::size_t axis);

  bool operator==(const EmbeddingVector& o) const { return values_ == o.values_; }

 private:
  std::vector<double> values_;
  double norm_ = 0.0;
};

double dot(const EmbeddingVector& a, const EmbeddingVector& b);

// dot(a,b) / (|a||b|) clamped to [-1, 1]. ZeroVector / DimensionMismatch.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// Text -> vector. Implementations are immutable after construction, safe for
// concurrent calls, and deterministic.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual EmbeddingVector embed(std::string_view text) const = 0;
  virtual std::size_t dimension() const = 0;
};

// Signed feature hashing over lowercase alphanumeric tokens, L2-normalized.
// Empty (token-free) text maps to the basis vector e_0.
class HashEmbedder final : public EmbeddingProvider {
 public:
  HashEmbedder(std::size_t dimension, std::uint64_t seed);

  EmbeddingVector embed(std::string_view text) const override;
  std::size_t dimension() const override { return dimension_; }

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

// Exact-key lookup into vectors precomputed by an external encoder.
// File format: JSON object {text: [float, ...]} with a uniform dimension.
class FileProvider final : public EmbeddingProvider {
 public:
  explicit FileProvider(const std::filesystem::path& path);
  explicit FileProvider(std::unordered_map<std::string, EmbeddingVector> table);

  EmbeddingVector embed(std::string_view text) const override;
  std::size_t dimension() const override { return dimension_; }
  std::size_t size() const { return table_.size(); }

 private:
  std::unordered_map<std::string, EmbeddingVector> table_;
  std::size_t dimension_ = 0;
};

std::unique_ptr<EmbeddingProvider> hash_embedder(std::size_t dimension, std::uint64_t seed);
std::unique_ptr<EmbeddingProvider> file_provider(const std::filesystem::path& path);

// Lowercased tokens split on non-alphanumerics; bytes >= 0x80 count as
// token characters so UTF-8 words stay intact.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace scaa::embedding
