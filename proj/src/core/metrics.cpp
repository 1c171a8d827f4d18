#include "core/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "core/errors.hpp"

namespace scaa::metrics {
namespace {

Metric ratio(double num, double den) {
  if (den == 0.0) return {0.0, true};
  return {num / den, false};
}

}  // namespace

ClassificationMetrics classification_metrics(const ConfusionCounts& c) {
  const double tp = static_cast<double>(c.tp);
  const double fp = static_cast<double>(c.fp);
  const double tn = static_cast<double>(c.tn);
  const double fn = static_cast<double>(c.fn);
  ClassificationMetrics m;
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  m.f1 = ratio(2.0 * tp, 2.0 * tp + fp + fn);
  m.fpr = ratio(fp, fp + tn);
  m.mcc = ratio(tp * tn - fp * fn, std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)));
  m.mcc.value = std::clamp(m.mcc.value, -1.0, 1.0);
  return m;
}

double cohen_kappa(std::span<const std::string> rater_a, std::span<const std::string> rater_b) {
  if (rater_a.size() != rater_b.size()) {
    raise(Errc::kLengthMismatch, "rater sequences have lengths " + std::to_string(rater_a.size()) + " and " +
                                     std::to_string(rater_b.size()));
  }
  if (rater_a.empty()) raise(Errc::kLengthMismatch, "rater sequences are empty");
  const double n = static_cast<double>(rater_a.size());
  std::map<std::string_view, std::pair<double, double>> marginals;
  double agree = 0.0;
  for (std::size_t i = 0; i < rater_a.size(); ++i) {
    marginals[rater_a[i]].first += 1.0;
    marginals[rater_b[i]].second += 1.0;
    if (rater_a[i] == rater_b[i]) agree += 1.0;
  }
  const double po = agree / n;
  double pe = 0.0;
  for (const auto& [label, counts] : marginals) pe += (counts.first / n) * (counts.second / n);
  if (pe >= 1.0) return po == 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

ConfusionCounts parse_confusion(std::string_view text) {
  std::vector<std::uint64_t> v;
  bool ok = true;
  for (std::size_t pos = 0; ok;) {
    const auto comma = text.find(',', pos);
    const auto part = text.substr(pos, comma == std::string_view::npos ? text.size() - pos : comma - pos);
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), x);
    ok = !part.empty() && ec == std::errc{} && ptr == part.data() + part.size();
    v.push_back(x);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (!ok || v.size() != 4) raise(Errc::kInvalidArgument, "confusion counts must be 'tp,fp,tn,fn' non-negative integers");
  return {v[0], v[1], v[2], v[3]};
}

io::Json to_json(const ClassificationMetrics& m) {
  auto one = [](const Metric& x) { return io::Json{{"value", x.value}, {"undefined", x.undefined}}; };
  return {{"precision", one(m.precision)},
          {"recall", one(m.recall)},
          {"f1", one(m.f1)},
          {"mcc", one(m.mcc)},
          {"fpr", one(m.fpr)}};
}

}  // namespace scaa::metrics
