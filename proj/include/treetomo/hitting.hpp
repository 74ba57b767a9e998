#pragma once

// Forward solver: exact joint distributions of first hitting time and place
// for the boundary layers, and probabilities of constrained path classes.

#include <algorithm>
#include <climits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "treetomo/error.hpp"
#include "treetomo/kernel.hpp"
#include "treetomo/scalar.hpp"
#include "treetomo/tree.hpp"

namespace treetomo {

enum class Layer { Inner, Outer };

constexpr std::string_view to_string(Layer layer) {
  return layer == Layer::Inner ? "in" : "out";
}

/// mass(t, v): probability that the walk started at `start` first visits the
/// layer at time t, at vertex v. Dense over t = 0..t_max and the layer's
/// vertices.
template <class Scalar>
class HittingDistribution {
 public:
  HittingDistribution() = default;
  HittingDistribution(Layer layer, VertexId start, int t_max, std::vector<VertexId> vertices)
      : layer_(layer), start_(start), t_max_(t_max), vertices_(std::move(vertices)) {
    if (t_max < 0) fail(ErrorCode::InvalidParameter, "t_max must be nonnegative");
    std::sort(vertices_.begin(), vertices_.end());
    VertexId top = vertices_.empty() ? 0 : vertices_.back();
    index_.assign(top + 1, kNoVertex);
    for (std::size_t i = 0; i < vertices_.size(); ++i) index_[vertices_[i]] = i;
    mass_.assign(static_cast<std::size_t>(t_max) + 1,
                 std::vector<Scalar>(vertices_.size(), Scalar(0)));
  }

  Layer layer() const { return layer_; }
  VertexId start() const { return start_; }
  int t_max() const { return t_max_; }
  const std::vector<VertexId>& vertices() const { return vertices_; }

  bool contains(VertexId v) const { return v < index_.size() && index_[v] != kNoVertex; }

  const Scalar& mass(int t, VertexId v) const { return mass_[time_index(t)][slot(v)]; }
  Scalar& mass(int t, VertexId v) { return mass_[time_index(t)][slot(v)]; }

  Scalar total_at(int t) const {
    Scalar sum(0);
    for (const auto& m : mass_[time_index(t)]) sum += m;
    return sum;
  }
  Scalar total() const {
    Scalar sum(0);
    for (int t = 0; t <= t_max_; ++t) sum += total_at(t);
    return sum;
  }

  bool operator==(const HittingDistribution& other) const {
    return layer_ == other.layer_ && start_ == other.start_ && t_max_ == other.t_max_ &&
           vertices_ == other.vertices_ && mass_ == other.mass_;
  }

 private:
  std::size_t time_index(int t) const {
    if (t < 0 || t > t_max_)
      fail(ErrorCode::FormatError, "time " + std::to_string(t) + " outside the recorded range 0.." +
                                       std::to_string(t_max_));
    return static_cast<std::size_t>(t);
  }
  std::size_t slot(VertexId v) const {
    if (!contains(v))
      fail(ErrorCode::UnknownVertex, "vertex " + std::to_string(v) + " not on the " +
                                         std::string(to_string(layer_)) + " layer");
    return index_[v];
  }

  Layer layer_ = Layer::Inner;
  VertexId start_ = 0;
  int t_max_ = 0;
  std::vector<VertexId> vertices_;
  std::vector<std::size_t> index_;
  std::vector<std::vector<Scalar>> mass_;
};

inline const std::vector<VertexId>& layer_vertices(const AugmentedTree& aug, Layer layer) {
  return layer == Layer::Inner ? aug.inner_layer : aug.outer_layer;
}

namespace detail {

template <class Scalar>
void require_valid(const AugmentedTree& aug, const TransitionKernel<Scalar>& kernel) {
  auto diagnostics = validate_kernel(aug, kernel);
  if (!diagnostics.empty()) {
    const auto& d = diagnostics.front();
    fail(ErrorCode::InvalidKernel, "invalid kernel at vertex " + std::to_string(d.vertex) + ": " +
                                       std::string(to_string(d.violation)) + " (" + d.detail +
                                       ")");
  }
}

}  // namespace detail

/// Forward dynamic programming on the killed chain. The sub-probability
/// vector lives on non-target vertices; mass that steps onto the target layer
/// is harvested at that time and removed.
template <class Scalar>
HittingDistribution<Scalar> first_hitting_joint(const AugmentedTree& aug,
                                                const TransitionKernel<Scalar>& kernel,
                                                Layer layer, int t_max) {
  detail::require_valid(aug, kernel);
  const auto& targets = layer_vertices(aug, layer);
  HittingDistribution<Scalar> dist(layer, aug.root(), t_max, targets);
  const std::size_t n = aug.vertex_count();
  if (dist.contains(aug.root())) {
    dist.mass(0, aug.root()) = Scalar(1);
    return dist;
  }
  std::vector<Scalar> current(n, Scalar(0));
  std::vector<Scalar> next(n, Scalar(0));
  current[aug.root()] = Scalar(1);
  for (int t = 1; t <= t_max; ++t) {
    for (auto& x : next) x = 0;
    for (VertexId u = 0; u < n; ++u) {
      if (current[u] == 0) continue;
      for (const auto& [v, p] : kernel.row(u)) {
        if (dist.contains(v)) {
          dist.mass(t, v) += current[u] * p;
        } else {
          next[v] += current[u] * p;
        }
      }
    }
    std::swap(current, next);
  }
  return dist;
}

inline constexpr int kUnboundedShell = INT_MAX;

/// Paths from `start` whose first visit to `target` happens at exactly
/// `exact_hit_time`, with every earlier position z satisfying
/// min_shell <= |z| < max_shell_strict (and lying below restrict_to_subtree
/// when that is set).
struct PathClassQuery {
  VertexId start = 0;
  std::vector<VertexId> target;
  int exact_hit_time = 0;
  int min_shell = 0;
  int max_shell_strict = kUnboundedShell;
  std::optional<VertexId> restrict_to_subtree;
};

/// Probabilities of the query's path class for every hit time 0..horizon
/// (query.exact_hit_time is ignored). Reads kernel rows only at vertices that
/// satisfy the query's position constraints.
template <class Scalar>
std::vector<Scalar> path_class_profile(const AugmentedTree& aug,
                                       const TransitionKernel<Scalar>& kernel,
                                       const PathClassQuery& query, int horizon) {
  if (query.target.empty()) fail(ErrorCode::InvalidQuery, "empty target set");
  if (query.min_shell >= query.max_shell_strict)
    fail(ErrorCode::InvalidQuery, "min_shell must be below max_shell_strict");
  if (horizon < 0) fail(ErrorCode::InvalidQuery, "negative hit time");
  const std::size_t n = aug.vertex_count();
  if (query.start >= n) fail(ErrorCode::InvalidQuery, "start vertex out of range");
  std::vector<char> is_target(n, 0);
  for (VertexId v : query.target) {
    if (v >= n) fail(ErrorCode::InvalidQuery, "target vertex out of range");
    is_target[v] = 1;
  }
  auto allowed = [&](VertexId z) {
    const int k = aug.full.norm(z);
    if (k < query.min_shell || k >= query.max_shell_strict) return false;
    return !query.restrict_to_subtree || aug.full.is_ancestor(*query.restrict_to_subtree, z);
  };

  std::vector<Scalar> profile(static_cast<std::size_t>(horizon) + 1, Scalar(0));
  if (is_target[query.start]) {
    profile[0] = Scalar(1);
    return profile;
  }
  if (!allowed(query.start)) return profile;

  std::vector<Scalar> current(n, Scalar(0));
  std::vector<Scalar> next(n, Scalar(0));
  current[query.start] = Scalar(1);
  for (int t = 1; t <= horizon; ++t) {
    for (auto& x : next) x = 0;
    for (VertexId z = 0; z < n; ++z) {
      if (current[z] == 0) continue;
      for (const auto& [y, p] : kernel.row(z)) {
        if (is_target[y]) {
          profile[t] += current[z] * p;
        } else if (allowed(y)) {
          next[y] += current[z] * p;
        }
      }
    }
    std::swap(current, next);
  }
  return profile;
}

template <class Scalar>
Scalar path_class_prob(const AugmentedTree& aug, const TransitionKernel<Scalar>& kernel,
                       const PathClassQuery& query) {
  if (query.exact_hit_time < 0) fail(ErrorCode::InvalidQuery, "negative hit time");
  return path_class_profile(aug, kernel, query, query.exact_hit_time).back();
}

struct BruteForceCaps {
  int max_time = 16;
  std::size_t max_vertices = 12;
};

/// Same contract as first_hitting_joint, by explicit enumeration of every
/// path from the root of length <= t_max. Exponential; capped.
template <class Scalar>
HittingDistribution<Scalar> brute_force_hitting(const AugmentedTree& aug,
                                                const TransitionKernel<Scalar>& kernel,
                                                Layer layer, int t_max,
                                                BruteForceCaps caps = {}) {
  if (t_max > caps.max_time || aug.vertex_count() > caps.max_vertices)
    fail(ErrorCode::TooLarge, "brute force limited to t_max <= " + std::to_string(caps.max_time) +
                                  " and <= " + std::to_string(caps.max_vertices) + " vertices");
  detail::require_valid(aug, kernel);
  HittingDistribution<Scalar> dist(layer, aug.root(), t_max, layer_vertices(aug, layer));

  struct Frame {
    VertexId vertex;
    int time;
    Scalar weight;
  };
  std::vector<Frame> stack{{aug.root(), 0, Scalar(1)}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (dist.contains(f.vertex)) {
      dist.mass(f.time, f.vertex) += f.weight;
      continue;
    }
    if (f.time == t_max) continue;
    for (const auto& [v, p] : kernel.row(f.vertex)) stack.push_back({v, f.time + 1, f.weight * p});
  }
  return dist;
}

}  // namespace treetomo
