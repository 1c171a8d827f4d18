#include "core/dbscan.hpp"

#include <algorithm>
#include <deque>

#include "core/errors.hpp"

namespace scaa::clustering {

std::vector<int> dbscan(std::span<const embedding::EmbeddingVector> points, double eps,
                        std::size_t min_samples) {
  if (!(eps > 0.0)) raise(Errc::kInvalidArgument, "dbscan eps must be > 0");
  if (min_samples < 1) raise(Errc::kInvalidArgument, "dbscan min_samples must be >= 1");
  const std::size_t n = points.size();

  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    neighbors[i].push_back(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (1.0 - embedding::cosine(points[i], points[j]) <= eps) {
        neighbors[i].push_back(j);
        neighbors[j].push_back(i);
      }
    }
  }
  for (auto& nb : neighbors) std::sort(nb.begin(), nb.end());

  std::vector<int> label(n, kNoise);
  int next_cluster = 0;
  std::deque<std::size_t> frontier;
  for (std::size_t p = 0; p < n; ++p) {
    if (label[p] != kNoise || neighbors[p].size() < min_samples) continue;
    const int c = next_cluster++;
    label[p] = c;
    frontier.assign(1, p);
    while (!frontier.empty()) {
      const std::size_t q = frontier.front();
      frontier.pop_front();
      if (neighbors[q].size() < min_samples) continue;  // border: no expansion
      for (std::size_t r : neighbors[q]) {
        if (label[r] != kNoise) continue;
        label[r] = c;
        frontier.push_back(r);
      }
    }
  }
  return label;
}

}  // namespace scaa::clustering
