#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/io.hpp"

namespace scaa::metrics {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;
};

// A metric whose denominator is zero is reported as 0 and flagged.
struct Metric {
  double value = 0.0;
  bool undefined = false;
};

struct ClassificationMetrics {
  Metric precision;
  Metric recall;
  Metric f1;
  Metric mcc;
  Metric fpr;
};

ClassificationMetrics classification_metrics(const ConfusionCounts& c);

// (p_o - p_e) / (1 - p_e) over the label marginals; 1 when p_e == 1 and the
// raters agree everywhere. LengthMismatch unless sizes are equal and >= 1.
double cohen_kappa(std::span<const std::string> rater_a, std::span<const std::string> rater_b);

// "tp,fp,tn,fn".
ConfusionCounts parse_confusion(std::string_view text);
io::Json to_json(const ClassificationMetrics& m);

}  // namespace scaa::metrics
