#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "core/io.hpp"

namespace scaa::lattice {

// An element of the abstract security domain: a category / action / risk
// context path of length 1..3, or the top element ("Unknown Behavior").
class Label {
 public:
  Label() = default;  // top
  static Label top() { return Label(); }
  explicit Label(std::vector<std::string> path) : path_(std::move(path)) {}

  bool is_top() const { return path_.empty(); }
  std::size_t tier() const { return path_.size(); }
  const std::vector<std::string>& path() const { return path_; }

  // "TOP" or the "/"-joined path.
  std::string str() const;
  // Syntactic parse only; validation happens against a Lattice.
  static Label parse(std::string_view text);

  auto operator<=>(const Label&) const = default;

 private:
  std::vector<std::string> path_;
};

struct LatticeCounts {
  std::size_t categories = 0;
  std::size_t actions = 0;
  std::size_t risk_labels = 0;
};

enum class EvrMode { kLatticeCover, kExactTierMatch };

struct GoldenRecord {
  std::string function_id;
  Label ground_truth;
  Label predicted;
};

// Finite three-tier containment hierarchy under an implicit top. Names are
// unique per parent; the order is ancestor-or-equal.
class Lattice {
 public:
  // JSON tree {category: {action: [risk_context, ...]}}. Categories may map to
  // an empty object, actions to an empty array.
  static Lattice from_json(const io::Json& j);
  static Lattice load(const std::filesystem::path& path);
  // Five categories plus every behavior label named in the reference taxonomy.
  static const Lattice& default_lattice();

  io::Json to_json() const;
  LatticeCounts counts() const;

  bool contains(const Label& l) const;
  // Throws UnknownLabel unless contains(l).
  void validate(const Label& l) const;
  // Parses and validates.
  Label label(std::string_view text) const;

  // Every element including top, in a stable depth-first order.
  std::vector<Label> elements() const;

  bool leq(const Label& a, const Label& b) const;
  Label join(const Label& a, const Label& b) const;
  // predicted covers truth iff truth <= predicted.
  bool covers(const Label& predicted, const Label& truth) const;

  double evr(std::span<const GoldenRecord> records, EvrMode mode) const;

 private:
  // category -> [(action, [risk context])], in key order.
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::vector<std::string>>>>>
      tree_;
};

std::vector<GoldenRecord> parse_golden_set(const Lattice& lat, const io::Json& j);
std::vector<GoldenRecord> load_golden_set(const Lattice& lat, const std::filesystem::path& path);

}  // namespace scaa::lattice
