#pragma once

// Rooted trees, shells and radii, and the augmentation constructions that
// embed a tree into a spherical tree with two boundary layers.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "treetomo/error.hpp"
#include "treetomo/random.hpp"

namespace treetomo {

using VertexId = std::size_t;
using Edge = std::pair<VertexId, VertexId>;

inline constexpr VertexId kNoVertex = std::numeric_limits<VertexId>::max();

class RootedTree {
 public:
  RootedTree() = default;

  std::size_t vertex_count() const { return parent_.size(); }
  VertexId root() const { return root_; }

  std::optional<VertexId> parent(VertexId v) const {
    check(v);
    if (parent_[v] == kNoVertex) return std::nullopt;
    return parent_[v];
  }
  const std::vector<VertexId>& children(VertexId v) const {
    check(v);
    return children_[v];
  }
  int norm(VertexId v) const {
    check(v);
    return norm_[v];
  }
  const std::vector<int>& norms() const { return norm_; }
  const std::vector<VertexId>& parents() const { return parent_; }

  // Neighbors in ascending id order.
  std::vector<VertexId> neighbors(VertexId v) const {
    check(v);
    std::vector<VertexId> out = children_[v];
    if (parent_[v] != kNoVertex) out.push_back(parent_[v]);
    std::sort(out.begin(), out.end());
    return out;
  }
  std::size_t degree(VertexId v) const {
    check(v);
    return children_[v].size() + (parent_[v] == kNoVertex ? 0 : 1);
  }

  // Degree-one vertices other than the root.
  bool is_terminal(VertexId v) const { return v != root_ && degree(v) == 1; }
  std::vector<VertexId> terminal_vertices() const {
    std::vector<VertexId> out;
    for (VertexId v = 0; v < vertex_count(); ++v)
      if (is_terminal(v)) out.push_back(v);
    return out;
  }

  int max_norm() const {
    return norm_.empty() ? 0 : *std::max_element(norm_.begin(), norm_.end());
  }
  std::vector<VertexId> shell(int k) const {
    std::vector<VertexId> out;
    for (VertexId v = 0; v < vertex_count(); ++v)
      if (norm_[v] == k) out.push_back(v);
    return out;
  }
  std::vector<std::vector<VertexId>> shells() const {
    std::vector<std::vector<VertexId>> out(static_cast<std::size_t>(max_norm()) + 1);
    for (VertexId v = 0; v < vertex_count(); ++v) out[norm_[v]].push_back(v);
    return out;
  }

  bool is_ancestor(VertexId ancestor, VertexId v) const {
    check(ancestor);
    check(v);
    while (norm_[v] > norm_[ancestor]) v = parent_[v];
    return v == ancestor;
  }

  // Parent/child pairs ordered by child id.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (VertexId v = 0; v < vertex_count(); ++v)
      if (parent_[v] != kNoVertex) out.emplace_back(parent_[v], v);
    return out;
  }

  const std::vector<std::string>& labels() const { return labels_; }
  std::string label(VertexId v) const {
    check(v);
    return labels_.empty() ? std::to_string(v) : labels_[v];
  }
  void set_labels(std::vector<std::string> labels) {
    if (!labels.empty() && labels.size() != vertex_count())
      fail(ErrorCode::InvalidParameter, "label count does not match vertex count");
    labels_ = std::move(labels);
  }

  bool operator==(const RootedTree& other) const {
    return root_ == other.root_ && parent_ == other.parent_;
  }

  // Builds from a parent array; every vertex except root must have a parent
  // and the parent links must reach the root.
  static RootedTree from_parents(std::vector<VertexId> parents, VertexId root) {
    const std::size_t n = parents.size();
    if (root >= n) fail(ErrorCode::UnknownVertex, "root " + std::to_string(root) + " not a vertex");
    RootedTree t;
    t.root_ = root;
    t.parent_ = std::move(parents);
    t.parent_[root] = kNoVertex;
    t.children_.assign(n, {});
    for (VertexId v = 0; v < n; ++v) {
      if (v == root) continue;
      VertexId p = t.parent_[v];
      if (p >= n) fail(ErrorCode::NotATree, "vertex " + std::to_string(v) + " has no parent");
      t.children_[p].push_back(v);
    }
    t.norm_.assign(n, -1);
    t.norm_[root] = 0;
    std::vector<VertexId> frontier{root};
    std::size_t reached = 1;
    while (!frontier.empty()) {
      std::vector<VertexId> next;
      for (VertexId u : frontier) {
        for (VertexId c : t.children_[u]) {
          t.norm_[c] = t.norm_[u] + 1;
          next.push_back(c);
          ++reached;
        }
      }
      frontier = std::move(next);
    }
    if (reached != n) fail(ErrorCode::NotATree, "parent links contain a cycle or miss the root");
    return t;
  }

 private:
  void check(VertexId v) const {
    if (v >= vertex_count())
      fail(ErrorCode::UnknownVertex, "vertex " + std::to_string(v) + " out of range");
  }

  VertexId root_ = 0;
  std::vector<VertexId> parent_;
  std::vector<std::vector<VertexId>> children_;
  std::vector<int> norm_;
  std::vector<std::string> labels_;
};

inline RootedTree build_tree(std::size_t vertex_count, const std::vector<Edge>& edges,
                             VertexId root) {
  if (root >= vertex_count)
    fail(ErrorCode::UnknownVertex, "root " + std::to_string(root) + " not a vertex");
  std::vector<std::vector<VertexId>> adjacency(vertex_count);
  std::set<Edge> seen;
  for (auto [a, b] : edges) {
    if (a >= vertex_count || b >= vertex_count)
      fail(ErrorCode::UnknownVertex,
           "edge (" + std::to_string(a) + "," + std::to_string(b) + ") names an unknown vertex");
    if (a == b) fail(ErrorCode::NotATree, "self loop at " + std::to_string(a));
    if (!seen.insert(std::minmax(a, b)).second)
      fail(ErrorCode::NotATree,
           "duplicate edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  }
  if (edges.size() + 1 != vertex_count)
    fail(ErrorCode::NotATree, "edge count must be vertex count - 1");

  std::vector<VertexId> parents(vertex_count, kNoVertex);
  std::vector<bool> visited(vertex_count, false);
  std::vector<VertexId> stack{root};
  visited[root] = true;
  while (!stack.empty()) {
    VertexId u = stack.back();
    stack.pop_back();
    for (VertexId v : adjacency[u]) {
      if (visited[v]) {
        if (v != parents[u]) fail(ErrorCode::NotATree, "edges contain a cycle");
        continue;
      }
      visited[v] = true;
      parents[v] = u;
      stack.push_back(v);
    }
  }
  if (std::find(visited.begin(), visited.end(), false) != visited.end())
    fail(ErrorCode::NotATree, "edges do not connect every vertex");
  return RootedTree::from_parents(std::move(parents), root);
}

// Vertex count inferred as one past the largest id mentioned.
inline RootedTree build_tree(const std::vector<Edge>& edges, VertexId root) {
  VertexId top = root;
  for (auto [a, b] : edges) top = std::max({top, a, b});
  return build_tree(top + 1, edges, root);
}

struct Radii {
  int inner = 0;
  int outer = 0;
  bool spherical = true;
};

inline Radii radii(const RootedTree& tree) {
  Radii r;
  r.outer = tree.max_norm();
  auto terminals = tree.terminal_vertices();
  if (terminals.empty()) {
    r.inner = r.outer;
  } else {
    r.inner = std::numeric_limits<int>::max();
    for (VertexId v : terminals) r.inner = std::min(r.inner, tree.norm(v));
  }
  r.spherical = r.inner == r.outer;
  return r;
}

/// The (-k,l)-segment: integers -k..l on a line, rooted at 0.
/// Id 0 is the root, ids 1..l carry labels 1..l and ids l+1..l+k carry
/// labels -1..-k.
inline RootedTree segment(int k, int l) {
  if (k < 0 || l < 1) fail(ErrorCode::InvalidParameter, "segment needs k >= 0 and l >= 1");
  const auto n = static_cast<std::size_t>(k + l + 1);
  std::vector<VertexId> parents(n, kNoVertex);
  std::vector<std::string> labels(n);
  labels[0] = "0";
  for (int i = 1; i <= l; ++i) {
    parents[i] = static_cast<VertexId>(i - 1);
    labels[i] = std::to_string(i);
  }
  for (int i = 1; i <= k; ++i) {
    auto id = static_cast<VertexId>(l + i);
    parents[id] = i == 1 ? 0 : id - 1;
    labels[id] = std::to_string(-i);
  }
  RootedTree t = RootedTree::from_parents(std::move(parents), 0);
  t.set_labels(std::move(labels));
  return t;
}

/// The (l,n)-star: n arms of length l glued at the root. Ids run shell by
/// shell, so the vertex at depth d on arm j (1-based) is (d-1)*n + j.
inline RootedTree star(int l, int n) {
  if (l < 1 || n < 1) fail(ErrorCode::InvalidParameter, "star needs l >= 1 and n >= 1");
  const auto count = static_cast<std::size_t>(l) * static_cast<std::size_t>(n) + 1;
  std::vector<VertexId> parents(count, kNoVertex);
  for (int d = 1; d <= l; ++d) {
    for (int j = 1; j <= n; ++j) {
      auto id = static_cast<VertexId>((d - 1) * n + j);
      parents[id] = d == 1 ? 0 : id - static_cast<VertexId>(n);
    }
  }
  return RootedTree::from_parents(std::move(parents), 0);
}

/// Random tree with exactly the requested outer radius. A spine 0-1-..-rout
/// fixes the radius; every further vertex hangs from a uniformly chosen
/// vertex of norm < rout that has fewer than max_children children. The
/// vertex count is drawn from [rout+1, max_vertices] and then truncated if no
/// vertex can take another child.
inline RootedTree random_tree(int rout, std::size_t max_vertices, std::uint64_t seed,
                              std::size_t max_children = 5) {
  if (rout < 1) fail(ErrorCode::InvalidParameter, "random tree needs rout >= 1");
  if (max_children < 1) fail(ErrorCode::InvalidParameter, "max_children must be >= 1");
  if (max_vertices < static_cast<std::size_t>(rout) + 1)
    fail(ErrorCode::InvalidParameter, "max_vertices too small for the requested radius");
  SplitMix64 rng(seed);
  const std::size_t smallest = static_cast<std::size_t>(rout) + 1;
  const std::size_t n = smallest + uniform_index(rng, max_vertices - smallest + 1);
  std::vector<VertexId> parents(smallest, kNoVertex);
  std::vector<int> norm(smallest, 0);
  std::vector<std::size_t> kids(smallest, 0);
  std::vector<VertexId> open;  // vertices allowed to receive children
  for (int i = 1; i <= rout; ++i) {
    parents[i] = static_cast<VertexId>(i - 1);
    norm[i] = i;
    ++kids[i - 1];
  }
  for (int i = 0; i < rout; ++i)
    if (kids[i] < max_children) open.push_back(static_cast<VertexId>(i));
  while (parents.size() < n && !open.empty()) {
    const std::size_t slot = uniform_index(rng, open.size());
    const VertexId p = open[slot];
    const VertexId v = parents.size();
    parents.push_back(p);
    norm.push_back(norm[p] + 1);
    kids.push_back(0);
    if (++kids[p] == max_children) open.erase(open.begin() + static_cast<long>(slot));
    if (norm[v] < rout) open.push_back(v);
  }
  return RootedTree::from_parents(std::move(parents), 0);
}

/// Glues a chain of l new vertices below the terminal vertex v. New ids are
/// appended in chain order.
inline RootedTree l_augment_at(const RootedTree& tree, VertexId v, int l) {
  if (l < 1) fail(ErrorCode::InvalidParameter, "augmentation length must be >= 1");
  if (v >= tree.vertex_count())
    fail(ErrorCode::UnknownVertex, "vertex " + std::to_string(v) + " out of range");
  if (!tree.is_terminal(v))
    fail(ErrorCode::NotTerminal, "vertex " + std::to_string(v) + " is not terminal");
  std::vector<VertexId> parents = tree.parents();
  VertexId prev = v;
  for (int i = 0; i < l; ++i) {
    parents.push_back(prev);
    prev = parents.size() - 1;
  }
  RootedTree out = RootedTree::from_parents(std::move(parents), tree.root());
  if (!tree.labels().empty()) {
    auto labels = tree.labels();
    for (VertexId id = tree.vertex_count(); id < out.vertex_count(); ++id)
      labels.push_back(std::to_string(id));
    out.set_labels(std::move(labels));
  }
  return out;
}

enum class Origin { Original, Added };

/// A tree embedded in its l-spherical augmentation. Original vertices keep
/// their ids (0..base.vertex_count()-1); added vertices follow.
struct AugmentedTree {
  RootedTree base;
  RootedTree full;
  std::vector<Origin> origin;
  int hull_radius = 0;  // R_out of the base tree
  int aug_len = 0;
  std::vector<VertexId> inner_layer;
  std::vector<VertexId> outer_layer;

  int inner_norm() const { return hull_radius + aug_len - 1; }
  int outer_norm() const { return hull_radius + aug_len; }
  std::size_t vertex_count() const { return full.vertex_count(); }
  VertexId root() const { return full.root(); }

  bool is_original(VertexId v) const { return origin.at(v) == Origin::Original; }
  bool in_inner(VertexId v) const { return full.norm(v) == inner_norm(); }
  bool in_outer(VertexId v) const { return full.norm(v) == outer_norm(); }

  // Internal vertices of the base tree (root included even when it has
  // degree one).
  bool is_base_internal(VertexId v) const {
    return is_original(v) && !base.is_terminal(v);
  }

  // The unique outer vertex below an inner vertex.
  VertexId outer_child(VertexId inner) const {
    const auto& kids = full.children(inner);
    if (kids.size() != 1 || !in_inner(inner))
      fail(ErrorCode::InvalidParameter, "vertex " + std::to_string(inner) + " not on inner layer");
    return kids.front();
  }
};

/// Gives every terminal vertex v a chain of length R_out - |v| + l so that the
/// result is spherical of radius R_out + l. Added ids are assigned round by
/// round: round d appends the d-th vertex of every chain still growing, in
/// ascending terminal-id order.
inline AugmentedTree spherical_augmentation(const RootedTree& tree, int l) {
  if (l < 1) fail(ErrorCode::InvalidParameter, "augmentation length must be >= 1");
  if (tree.vertex_count() < 2) fail(ErrorCode::InvalidParameter, "tree needs at least one edge");
  const int rout = tree.max_norm();
  const auto terminals = tree.terminal_vertices();

  std::vector<VertexId> parents = tree.parents();
  std::vector<VertexId> tip(terminals.begin(), terminals.end());
  std::vector<int> remaining;
  for (VertexId v : terminals) remaining.push_back(rout - tree.norm(v) + l);
  for (bool grew = true; grew;) {
    grew = false;
    for (std::size_t i = 0; i < tip.size(); ++i) {
      if (remaining[i] == 0) continue;
      parents.push_back(tip[i]);
      tip[i] = parents.size() - 1;
      --remaining[i];
      grew = true;
    }
  }

  AugmentedTree aug;
  aug.base = tree;
  aug.full = RootedTree::from_parents(std::move(parents), tree.root());
  aug.origin.assign(aug.full.vertex_count(), Origin::Added);
  std::fill_n(aug.origin.begin(), tree.vertex_count(), Origin::Original);
  aug.hull_radius = rout;
  aug.aug_len = l;
  aug.inner_layer = aug.full.shell(rout + l - 1);
  aug.outer_layer = aug.full.shell(rout + l);
  if (!tree.labels().empty()) {
    auto labels = tree.labels();
    for (VertexId id = tree.vertex_count(); id < aug.full.vertex_count(); ++id)
      labels.push_back(std::to_string(id));
    aug.full.set_labels(std::move(labels));
  }
  return aug;
}

}  // namespace treetomo
