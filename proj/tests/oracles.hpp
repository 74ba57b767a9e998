#pragma once

// Reference computations used only by the tests. They walk the tree's
// adjacency directly and never call the library's solvers.

#include <array>
#include <map>
#include <utility>
#include <vector>

#include "treetomo/kernel.hpp"
#include "treetomo/tree.hpp"

namespace oracle {

using treetomo::AugmentedTree;
using treetomo::TransitionKernel;
using treetomo::VertexId;

template <class S>
using Cells = std::map<std::pair<int, VertexId>, S>;

// Every path from the root, extended one neighbor at a time; records the
// weight of the first arrival on shell `target_norm`.
template <class S>
Cells<S> enumerate_first_hits(const AugmentedTree& aug, const TransitionKernel<S>& k,
                              int target_norm, int t_max) {
  Cells<S> hits;
  const int outer = aug.outer_norm();
  auto dfs = [&](auto&& self, VertexId at, int t, const S& weight) -> void {
    if (aug.full.norm(at) == target_norm) {
      hits[{t, at}] += weight;
      return;
    }
    if (aug.full.norm(at) == outer || t == t_max) return;
    for (VertexId next : aug.full.neighbors(at)) {
      const S p = k.prob(at, next);
      if (p != 0) self(self, next, t + 1, S(weight * p));
    }
  };
  dfs(dfs, aug.root(), 0, S(1));
  return hits;
}

template <class S>
S ballistic_weight(const AugmentedTree& aug, const TransitionKernel<S>& k, VertexId v) {
  S w(1);
  for (VertexId x = v; x != aug.root(); x = *aug.full.parent(x)) w *= k.prob(*aug.full.parent(x), x);
  return w;
}

template <class S>
struct ExitSplit {
  S total;       // walks first absorbed below w at time T
  S direct;      // ... that stayed at shells > k after their first inner visit
  S turnaround;  // ... that came back to shell <= k after it
};

// Exact dynamic programming over (vertex, phase). Phase 0: inner layer not yet
// visited; 1: visited, shell <= k not revisited since; 2: revisited.
template <class S>
ExitSplit<S> split_exit_mass(const AugmentedTree& aug, const TransitionKernel<S>& kernel,
                             VertexId u, VertexId w) {
  const int k = aug.full.norm(u);
  const int inner = aug.inner_norm();
  const int outer = aug.outer_norm();
  const int T = 3 * aug.hull_radius + 4 - 2 * k;
  const std::size_t n = aug.vertex_count();
  std::vector<std::array<S, 3>> cur(n), nxt(n);
  for (auto& a : cur) a.fill(S(0));
  cur[aug.root()][aug.full.norm(aug.root()) == inner ? 1 : 0] = S(1);
  ExitSplit<S> split{S(0), S(0), S(0)};
  for (int t = 1; t <= T; ++t) {
    for (auto& a : nxt) a.fill(S(0));
    for (VertexId v = 0; v < n; ++v) {
      for (int phase = 0; phase < 3; ++phase) {
        if (cur[v][phase] == 0) continue;
        for (VertexId y : aug.full.neighbors(v)) {
          const S m = cur[v][phase] * kernel.prob(v, y);
          if (m == 0) continue;
          int next = phase;
          const int norm = aug.full.norm(y);
          if (next == 0 && norm == inner) next = 1;
          if (next == 1 && norm <= k) next = 2;
          if (norm == outer) {
            if (t == T && aug.full.is_ancestor(w, y)) {
              split.total += m;
              (next == 2 ? split.turnaround : split.direct) += m;
            }
            continue;
          }
          nxt[y][next] += m;
        }
      }
    }
    std::swap(cur, nxt);
  }
  return split;
}

// Denominator restricted to turnarounds through the exit's own branch: the
// turn point is always the parent of the exit.
template <class S>
S single_branch_denominator(const AugmentedTree& aug, const TransitionKernel<S>& k, VertexId u,
                            VertexId w, const Cells<S>& p_out) {
  const int ballistic = aug.outer_norm();
  S d(0);
  for (VertexId v : aug.outer_layer) {
    if (!aug.full.is_ancestor(w, v)) continue;
    S legs(1);
    const VertexId x = *aug.full.parent(v);
    for (VertexId y = x; y != w; y = *aug.full.parent(y)) legs *= k.prob(*aug.full.parent(y), y);
    for (VertexId y = x; y != u; y = *aug.full.parent(y)) legs *= k.prob(y, *aug.full.parent(y));
    auto it = p_out.find({ballistic, v});
    if (it != p_out.end()) d += it->second * legs;
  }
  return d;
}

}  // namespace oracle
