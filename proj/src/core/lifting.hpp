#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "core/cpg.hpp"
#include "core/io.hpp"
#include "core/lattice.hpp"

namespace scaa::lifting {

struct Annotation {
  std::string function_id;
  lattice::Label label;
  std::string summary;
  std::vector<cpg::DataFlowClaim> claims;

  bool operator==(const Annotation&) const = default;
};

// Everything an annotator may look at for one function.
struct FunctionContext {
  std::string binary_id;
  cpg::FunctionInfo function;
  std::vector<cpg::CpgNode> nodes;
  // PDG edges with both endpoints inside the function.
  std::vector<cpg::CpgEdge> pdg_edges;
  // attrs["callee"] of the function's Call nodes, in node order, deduplicated.
  std::vector<std::string> callees;
  // Functions with an AST or CFG edge into this one, sorted.
  std::vector<std::string> predecessors;
};

// Builds the context of every function in one pass over the edges.
std::map<std::string, FunctionContext> function_contexts(const cpg::CpgGraph& g);

// Produces a behavioral annotation for one function. Implementations must be
// safe to call from several threads at once; callers that cannot guarantee
// this for a custom annotator should serialize calls themselves. Any thrown
// exception is reported as AnnotatorFailure for that function.
class Annotator {
 public:
  virtual ~Annotator() = default;
  virtual Annotation annotate(const FunctionContext& fn) const = 0;
};

struct Rule {
  // Literal, or a prefix match when it ends in '*'.
  std::string pattern;
  lattice::Label label;
  // Summary text for matched functions; derived from the label when empty.
  std::string summary;
};

bool pattern_matches(std::string_view pattern, std::string_view token);

// Labels a function by the first rule (file order) whose pattern matches the
// function name, a node opcode or a callee name; falls back to top with an
// empty summary. Claims are the function's own PDG edges.
class RuleAnnotator final : public Annotator {
 public:
  RuleAnnotator(const lattice::Lattice& lat, std::vector<Rule> rules);
  Annotation annotate(const FunctionContext& fn) const override;

 private:
  std::vector<Rule> rules_;
};

// Rules file: JSON list [{pattern, label, summary?}]. InvalidRule on unknown
// labels or empty patterns.
std::vector<Rule> parse_rules(const lattice::Lattice& lat, const io::Json& j);
std::unique_ptr<Annotator> rule_annotator(const lattice::Lattice& lat, const std::filesystem::path& path);

// Replays stored annotations: JSON object {function_id: Annotation}.
class ReplayAnnotator final : public Annotator {
 public:
  explicit ReplayAnnotator(std::map<std::string, Annotation> table);
  Annotation annotate(const FunctionContext& fn) const override;

 private:
  std::map<std::string, Annotation> table_;
};

std::unique_ptr<Annotator> replay_annotator(const lattice::Lattice& lat, const std::filesystem::path& path);

// Runs `command` through /bin/sh once per function. The request JSON
// {function_id, nodes, pdg_edges, context} goes to stdin, an Annotation JSON is
// read from stdout; a non-zero exit status is a failure.
class CommandAnnotator final : public Annotator {
 public:
  CommandAnnotator(const lattice::Lattice& lat, std::string command);
  Annotation annotate(const FunctionContext& fn) const override;

 private:
  const lattice::Lattice* lattice_;
  std::string command_;
};

io::Json annotation_request(const FunctionContext& fn);
io::Json to_json(const Annotation& a);
Annotation annotation_from_json(const lattice::Lattice& lat, const io::Json& j,
                                std::string_view function_id_fallback = {});

struct VerifiedCorpus {
  std::vector<Annotation> accepted;
  std::size_t rejected_count = 0;
  // accepted.size() + rejected_count.
  std::size_t total = 0;
  // Functions whose annotator raised; not counted in total.
  std::vector<std::string> failed;
  std::vector<std::string> rejected;

  double rejection_rate() const {
    return total == 0 ? 0.0 : static_cast<double>(rejected_count) / static_cast<double>(total);
  }
};

// Annotate, verify every claim against PDG reachability, accept or discard the
// whole annotation. Annotation may run on `workers` threads; verification and
// accumulation always follow input order.
VerifiedCorpus build_corpus(const cpg::CpgGraph& g, std::span<const std::string> functions,
                            const Annotator& annotator, std::size_t workers = 1);
// All functions of g in id order.
VerifiedCorpus build_corpus(const cpg::CpgGraph& g, const Annotator& annotator, std::size_t workers = 1);

// JSON lines: one accepted annotation per line, then {"trailer": {...}}.
std::string corpus_to_jsonl(const VerifiedCorpus& corpus);
void save_corpus(const VerifiedCorpus& corpus, const std::filesystem::path& path);
VerifiedCorpus load_corpus(const lattice::Lattice& lat, const std::filesystem::path& path);

}  // namespace scaa::lifting
