#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "core/embedding.hpp"

namespace scaa::clustering {

inline constexpr int kNoise = -1;

// Density clustering under cosine distance (1 - cosine). A point is core when
// at least min_samples points (itself included) lie within eps, inclusive.
// Clusters are discovered by scanning points in input order and expanding each
// new core point breadth-first, so a border point reachable from several
// clusters joins the one discovered first. Returns a cluster id per point,
// numbered 0.. in discovery order, or kNoise.
std::vector<int> dbscan(std::span<const embedding::EmbeddingVector> points, double eps,
                        std::size_t min_samples);

}  // namespace scaa::clustering
