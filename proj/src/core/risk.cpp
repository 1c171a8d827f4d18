#include "core/risk.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "core/embedding.hpp"
#include "core/errors.hpp"

namespace scaa::risk {

std::vector<ssckg::RelationType> PropagationConfig::default_relation_types() {
  using R = ssckg::RelationType;
  return {R::kTaints, R::kReaches, R::kWritesTo, R::kCalls, R::kDependsOn, R::kImports, R::kReadsFrom};
}

void PropagationConfig::validate() const {
  if (!(beta > 0.0 && beta <= 1.0)) raise(Errc::kConfig, "beta must lie in (0, 1]");
  if (!(tolerance > 0.0)) raise(Errc::kConfig, "tolerance must be > 0");
  if (max_iterations == 0) raise(Errc::kConfig, "max_iterations must be >= 1");
}

double inherent_risk(const ssckg::Entity& entity, std::span<const ssckg::CveRecord> cves) {
  if (entity.summary.empty()) return 0.0;
  double best = 0.0;
  for (const auto& c : cves) best = std::max(best, embedding::cosine(entity.embedding, c.embedding));
  return best;
}

std::vector<double> inherent_risks(const ssckg::SsckgGraph& kg, std::span<const ssckg::CveRecord> cves) {
  std::vector<double> out;
  out.reserve(kg.entities.size());
  for (const auto& e : kg.entities) out.push_back(inherent_risk(e, cves));
  return out;
}

Transition normalize_weights(const ssckg::SsckgGraph& kg, std::span<const ssckg::RelationType> types) {
  std::vector<std::map<std::size_t, double>> in(kg.entities.size());
  for (const auto& r : kg.relations) {
    if (!r.targets_entity() || r.src == r.dst_entity()) continue;
    if (std::find(types.begin(), types.end(), r.type) == types.end()) continue;
    in[static_cast<std::size_t>(r.dst_entity())][static_cast<std::size_t>(r.src)] += r.weight;
  }
  Transition p(in.size());
  for (std::size_t v = 0; v < in.size(); ++v) {
    double total = 0.0;
    for (const auto& [u, w] : in[v]) total += w;
    for (const auto& [u, w] : in[v]) p[v].emplace_back(u, w / total);
  }
  return p;
}

std::vector<double> step(const Transition& p, std::span<const double> inherent, std::span<const double> rho,
                         double beta) {
  std::vector<double> next(rho.size());
  for (std::size_t v = 0; v < rho.size(); ++v) {
    if (p[v].empty()) {
      next[v] = inherent[v];
      continue;
    }
    double s = 0.0;
    for (const auto& [u, w] : p[v]) s += w * rho[u];
    next[v] = beta * inherent[v] + (1.0 - beta) * s;
  }
  return next;
}

RiskVector propagate(const Transition& p, std::span<const double> inherent, const PropagationConfig& cfg) {
  cfg.validate();
  if (p.size() != inherent.size()) raise(Errc::kLengthMismatch, "transition and inherent risk sizes differ");
  for (double v : inherent) {
    if (!(v >= 0.0 && v <= 1.0)) raise(Errc::kInvalidArgument, "inherent risk must lie in [0, 1]");
  }

  // One update shrinks an L1 change by at most (1 - beta) * max column sum.
  std::vector<double> col(p.size(), 0.0);
  for (const auto& row : p) {
    for (const auto& [u, w] : row) col[u] += w;
  }
  const double lipschitz = (1.0 - cfg.beta) * (col.empty() ? 0.0 : *std::max_element(col.begin(), col.end()));
  const double stop = cfg.tolerance / std::max(1.0, lipschitz);

  RiskVector r;
  r.inherent.assign(inherent.begin(), inherent.end());
  r.rho = r.inherent;
  for (const auto& row : p) r.isolated.push_back(row.empty());
  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    auto next = step(p, inherent, r.rho, cfg.beta);
    double change = 0.0;
    for (std::size_t v = 0; v < next.size(); ++v) change += std::abs(next[v] - r.rho[v]);
    r.rho = std::move(next);
    r.iterations = it;
    r.residual = change;
    if (change < stop) return r;
  }
  raise(Errc::kNonConvergence, "no convergence after " + std::to_string(cfg.max_iterations) +
                                   " iterations (residual " + std::to_string(r.residual) + ")");
}

RiskVector propagate(const ssckg::SsckgGraph& kg, std::span<const double> inherent, const PropagationConfig& cfg) {
  return propagate(normalize_weights(kg, cfg.relation_types), inherent, cfg);
}

io::Json to_json(const RiskVector& r, const ssckg::SsckgGraph& kg, double beta) {
  std::vector<std::size_t> order(r.rho.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r.rho[a] > r.rho[b]; });
  io::Json ranking = io::Json::array();
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const std::size_t v = order[rank];
    const auto& e = kg.entities[v];
    const double own = r.isolated[v] ? r.rho[v] : beta * r.inherent[v];
    ranking.push_back({{"rank", rank + 1},
                       {"entity_id", e.id},
                       {"name", e.name},
                       {"label", e.label.str()},
                       {"rho", r.rho[v]},
                       {"inherent", r.inherent[v]},
                       {"inherent_share", own},
                       {"propagated_share", r.rho[v] - own}});
  }
  return {{"binary_id", kg.source_binary},
          {"beta", beta},
          {"iterations", r.iterations},
          {"residual", r.residual},
          {"ranking", std::move(ranking)}};
}

std::vector<double> rho_from_json(const io::Json& j, std::size_t entity_count) {
  if (!j.is_object() || !j.contains("ranking") || !j["ranking"].is_array()) {
    raise(Errc::kSchema, "risk report must contain a 'ranking' list");
  }
  std::vector<double> rho(entity_count, 0.0);
  std::vector<bool> seen(entity_count, false);
  try {
    for (const auto& o : j["ranking"]) {
      const auto id = o.at("entity_id").get<std::int64_t>();
      if (id < 0 || static_cast<std::size_t>(id) >= entity_count) raise(Errc::kSchema, "risk entity id out of range");
      rho[static_cast<std::size_t>(id)] = o.at("rho").get<double>();
      seen[static_cast<std::size_t>(id)] = true;
    }
  } catch (const io::Json::exception& e) {
    raise(Errc::kSchema, std::string("risk report: ") + e.what());
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    raise(Errc::kSchema, "risk report does not cover every entity");
  }
  return rho;
}

}  // namespace scaa::risk
