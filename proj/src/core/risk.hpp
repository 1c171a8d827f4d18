#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core/io.hpp"
#include "core/ssckg.hpp"

namespace scaa::risk {

struct PropagationConfig {
  double beta = 0.15;
  double tolerance = 1e-6;
  std::size_t max_iterations = 100;
  // Relation types whose source counts as an in-neighbor of the destination.
  std::vector<ssckg::RelationType> relation_types = default_relation_types();

  static std::vector<ssckg::RelationType> default_relation_types();
  // ConfigError unless 0 < beta <= 1, tolerance > 0, max_iterations >= 1.
  void validate() const;
};

// max(0, max_c cos(entity, c)); 0 for an empty corpus or an entity without a
// behavioral summary.
double inherent_risk(const ssckg::Entity& entity, std::span<const ssckg::CveRecord> cves);
std::vector<double> inherent_risks(const ssckg::SsckgGraph& kg, std::span<const ssckg::CveRecord> cves);

// Row v lists (u, p_vu) over the distinct in-neighbors u of v; parallel
// relations add their weights and each row sums to 1. Isolated rows are empty.
using Transition = std::vector<std::vector<std::pair<std::size_t, double>>>;
Transition normalize_weights(const ssckg::SsckgGraph& kg,
                             std::span<const ssckg::RelationType> types = PropagationConfig::default_relation_types());

struct RiskVector {
  std::vector<double> rho;
  std::vector<double> inherent;
  // Entities without in-neighbors, held at their inherent risk.
  std::vector<bool> isolated;
  std::size_t iterations = 0;
  // L1 change of the last update.
  double residual = 0.0;
};

// rho(v) <- beta * inherent(v) + (1 - beta) * sum_u p_vu rho(u), isolated rows
// pinned to inherent(v). Stops once the L1 change is small enough that one
// more update would also move rho by less than the tolerance.
RiskVector propagate(const Transition& p, std::span<const double> inherent, const PropagationConfig& cfg);
RiskVector propagate(const ssckg::SsckgGraph& kg, std::span<const double> inherent, const PropagationConfig& cfg);

// One synchronous update of `rho`.
std::vector<double> step(const Transition& p, std::span<const double> inherent, std::span<const double> rho,
                         double beta);

// Ranking by descending rho (ties by entity id) with the inherent and
// propagated shares of each score.
io::Json to_json(const RiskVector& r, const ssckg::SsckgGraph& kg, double beta);
// rho indexed by entity id, read back from a risk report.
std::vector<double> rho_from_json(const io::Json& j, std::size_t entity_count);

}  // namespace scaa::risk
