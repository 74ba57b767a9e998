#pragma once

// Transition kernels of nearest-neighbour chains on an augmented tree, with
// per-row provenance (known, unknown, recovered).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "treetomo/error.hpp"
#include "treetomo/random.hpp"
#include "treetomo/scalar.hpp"
#include "treetomo/tree.hpp"

namespace treetomo {

enum class Provenance { Known, Unknown, Recovered };

constexpr std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Known: return "known";
    case Provenance::Unknown: return "unknown";
    case Provenance::Recovered: return "recovered";
  }
  return "unknown";
}

// Which base-tree rows are recovery targets.
enum class UnknownScope {
  AllLambda,       // every vertex of the base tree
  InternalLambda,  // internal vertices only; base terminals are known
};

// Which rows random_kernel draws at random.
enum class RandomScope { LambdaOnly, AllVertices };

template <class Scalar>
class TransitionKernel {
 public:
  using Row = std::vector<std::pair<VertexId, Scalar>>;

  TransitionKernel() = default;
  explicit TransitionKernel(std::size_t vertex_count)
      : rows_(vertex_count), provenance_(vertex_count, Provenance::Unknown) {}

  static constexpr ArithmeticMode mode() { return scalar_traits<Scalar>::mode; }

  std::size_t vertex_count() const { return rows_.size(); }

  bool has_row(VertexId u) const { return u < rows_.size() && rows_[u].has_value(); }

  const Row& row(VertexId u) const {
    if (!has_row(u))
      fail(ErrorCode::MissingKnownRow, "no transition row for vertex " + std::to_string(u));
    return *rows_[u];
  }

  // Zero when v is not in the row; throws when the row itself is blank.
  Scalar prob(VertexId u, VertexId v) const {
    for (const auto& [to, p] : row(u))
      if (to == v) return p;
    return Scalar(0);
  }

  Provenance provenance(VertexId u) const { return provenance_.at(u); }
  void set_provenance(VertexId u, Provenance p) { provenance_.at(u) = p; }

  void set_row(VertexId u, Row row, Provenance p) {
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    rows_.at(u) = std::move(row);
    provenance_.at(u) = p;
  }

  // Absorbing vertex: a present, empty row.
  void set_absorbing(VertexId u) { set_row(u, {}, Provenance::Known); }

  void clear_row(VertexId u) {
    rows_.at(u).reset();
    provenance_.at(u) = Provenance::Unknown;
  }

  template <class To>
  TransitionKernel<To> convert() const {
    TransitionKernel<To> out(vertex_count());
    for (VertexId u = 0; u < vertex_count(); ++u) {
      if (!has_row(u)) {
        out.clear_row(u);
        out.set_provenance(u, provenance_[u]);
        continue;
      }
      typename TransitionKernel<To>::Row r;
      for (const auto& [v, p] : *rows_[u]) {
        if constexpr (std::is_same_v<To, Scalar>) {
          r.emplace_back(v, p);
        } else {
          r.emplace_back(v, scalar_traits<To>::from_double(to_double(p)));
        }
      }
      out.set_row(u, std::move(r), provenance_[u]);
    }
    return out;
  }

  bool operator==(const TransitionKernel& other) const {
    return rows_ == other.rows_ && provenance_ == other.provenance_;
  }

 private:
  std::vector<std::optional<Row>> rows_;
  std::vector<Provenance> provenance_;
};

/// A copy of `kernel` in which every Unknown row is blanked.
template <class Scalar>
TransitionKernel<Scalar> known_part(const TransitionKernel<Scalar>& kernel) {
  TransitionKernel<Scalar> out = kernel;
  for (VertexId u = 0; u < kernel.vertex_count(); ++u)
    if (kernel.provenance(u) == Provenance::Unknown) out.clear_row(u);
  return out;
}

enum class Violation { SizeMismatch, MissingRow, Support, Nondegenerate, RowSum, NotAbsorbing };

constexpr std::string_view to_string(Violation v) {
  switch (v) {
    case Violation::SizeMismatch: return "SizeMismatch";
    case Violation::MissingRow: return "MissingRow";
    case Violation::Support: return "Support";
    case Violation::Nondegenerate: return "Nondegenerate";
    case Violation::RowSum: return "RowSum";
    case Violation::NotAbsorbing: return "NotAbsorbing";
  }
  return "?";
}

struct Diagnostic {
  VertexId vertex = 0;
  Violation violation = Violation::MissingRow;
  std::string detail;
};

inline constexpr double kFloatRowSumTolerance = 1e-12;

/// Checks that the kernel defines a simple nondegenerate chain on aug.full,
/// killed on the outer layer. With `allow_blank_unknown`, rows that are blank
/// and flagged Unknown are accepted (a partially known kernel).
template <class Scalar>
std::vector<Diagnostic> validate_kernel(const AugmentedTree& aug,
                                        const TransitionKernel<Scalar>& kernel,
                                        bool allow_blank_unknown = false) {
  std::vector<Diagnostic> out;
  if (kernel.vertex_count() != aug.vertex_count()) {
    out.push_back({0, Violation::SizeMismatch,
                   "kernel has " + std::to_string(kernel.vertex_count()) + " rows, tree has " +
                       std::to_string(aug.vertex_count()) + " vertices"});
    return out;
  }
  for (VertexId u = 0; u < aug.vertex_count(); ++u) {
    if (!kernel.has_row(u)) {
      if (allow_blank_unknown && kernel.provenance(u) == Provenance::Unknown) continue;
      out.push_back({u, Violation::MissingRow, "row is blank"});
      continue;
    }
    const auto& row = kernel.row(u);
    if (aug.in_outer(u)) {
      if (!row.empty()) out.push_back({u, Violation::NotAbsorbing, "outer vertex has exits"});
      continue;
    }
    std::vector<VertexId> support;
    for (const auto& entry : row) support.push_back(entry.first);
    if (support != aug.full.neighbors(u))
      out.push_back({u, Violation::Support, "row support differs from the neighbor set"});
    Scalar sum(0);
    for (const auto& [v, p] : row) {
      if (!(p > 0))
        out.push_back({u, Violation::Nondegenerate,
                       "t(" + std::to_string(u) + "," + std::to_string(v) + ") is not positive"});
      sum += p;
    }
    bool sums_to_one;
    if constexpr (scalar_traits<Scalar>::exact) {
      sums_to_one = sum == 1;
    } else {
      sums_to_one = std::abs(sum - 1.0) <= kFloatRowSumTolerance;
    }
    if (!sums_to_one)
      out.push_back({u, Violation::RowSum, "row sums to " + format_scalar(Scalar(sum))});
  }
  return out;
}

namespace detail {

template <class Scalar>
typename TransitionKernel<Scalar>::Row symmetric_row(const AugmentedTree& aug, VertexId u) {
  auto nb = aug.full.neighbors(u);
  if (nb.size() != 2)
    fail(ErrorCode::DegreeMismatch,
         "vertex " + std::to_string(u) + " has " + std::to_string(nb.size()) +
             " neighbors; a symmetric walk row needs exactly 2");
  const Scalar half = scalar_traits<Scalar>::from_ratio(1, 2);
  return {{nb[0], half}, {nb[1], half}};
}

inline bool is_unknown_target(const AugmentedTree& aug, VertexId u, UnknownScope scope) {
  if (!aug.is_original(u)) return false;
  return scope == UnknownScope::AllLambda || aug.is_base_internal(u);
}

}  // namespace detail

/// Completes a kernel given rows at the base tree's internal vertices.
/// Base terminals without a supplied row and added vertices off the outer
/// layer get the symmetric (1/2, 1/2) row; the outer layer is absorbing; a
/// degree-one root gets its forced row.
template <class Scalar>
TransitionKernel<Scalar> default_augmented_kernel(const AugmentedTree& aug,
                                                  const TransitionKernel<Scalar>& base,
                                                  UnknownScope scope = UnknownScope::AllLambda) {
  const std::size_t n = aug.vertex_count();
  TransitionKernel<Scalar> out(n);
  for (VertexId u = 0; u < n; ++u) {
    const Provenance flag =
        detail::is_unknown_target(aug, u, scope) ? Provenance::Unknown : Provenance::Known;
    if (aug.in_outer(u)) {
      out.set_absorbing(u);
    } else if (aug.is_original(u) && u < base.vertex_count() && base.has_row(u)) {
      out.set_row(u, base.row(u), flag);
    } else if (aug.is_base_internal(u)) {
      if (u == aug.root() && aug.full.degree(u) == 1) {
        out.set_row(u, {{aug.full.children(u).front(), Scalar(1)}}, flag);
      } else {
        fail(ErrorCode::MissingRow,
             "no row supplied for internal base vertex " + std::to_string(u));
      }
    } else {
      out.set_row(u, detail::symmetric_row<Scalar>(aug, u), flag);
    }
  }
  return out;
}

/// Reproducible random kernel. Scoped rows are uniform on the simplex
/// conditioned on every entry >= floor. Rational mode draws uniformly from the
/// simplex grid with denominator 1000 (finer if the floor needs it).
template <class Scalar>
TransitionKernel<Scalar> random_kernel(const AugmentedTree& aug, std::uint64_t seed, double floor,
                                       RandomScope scope = RandomScope::LambdaOnly,
                                       UnknownScope unknown = UnknownScope::AllLambda) {
  const std::size_t n = aug.vertex_count();
  auto in_scope = [&](VertexId u) {
    if (aug.in_outer(u)) return false;
    return scope == RandomScope::AllVertices || aug.is_original(u);
  };
  std::size_t max_degree = 1;
  for (VertexId u = 0; u < n; ++u)
    if (in_scope(u)) max_degree = std::max(max_degree, aug.full.degree(u));
  if (!(floor > 0) || !(floor * static_cast<double>(max_degree) < 1.0))
    fail(ErrorCode::InvalidParameter,
         "floor must lie in (0, 1/" + std::to_string(max_degree) + ")");

  SplitMix64 rng(seed, 0x6b65726e656cULL);
  TransitionKernel<Scalar> base(n);
  for (VertexId u = 0; u < n; ++u) {
    if (!in_scope(u)) continue;
    const auto nb = aug.full.neighbors(u);
    const std::size_t d = nb.size();
    typename TransitionKernel<Scalar>::Row row;
    if (d == 1) {
      row.emplace_back(nb[0], Scalar(1));
    } else if constexpr (scalar_traits<Scalar>::exact) {
      long q = 1000;
      long floor_units = static_cast<long>(std::ceil(floor * static_cast<double>(q)));
      while (floor_units * static_cast<long>(d) > q) {
        q *= 10;
        floor_units = static_cast<long>(std::ceil(floor * static_cast<double>(q)));
      }
      // Stars and bars: d-1 distinct cut points among spare + d - 1 slots.
      const long spare = q - floor_units * static_cast<long>(d);
      std::vector<long> slots(static_cast<std::size_t>(spare) + d - 1);
      for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = static_cast<long>(i);
      for (std::size_t i = 0; i + 1 < d; ++i) {
        auto j = i + uniform_index(rng, slots.size() - i);
        std::swap(slots[i], slots[j]);
      }
      std::vector<long> cuts(slots.begin(), slots.begin() + static_cast<long>(d - 1));
      std::sort(cuts.begin(), cuts.end());
      long prev = -1;
      for (std::size_t i = 0; i < d; ++i) {
        long next = i + 1 < d ? cuts[i] : static_cast<long>(slots.size());
        long units = next - prev - 1 + floor_units;
        row.emplace_back(nb[i], scalar_traits<Scalar>::from_ratio(units, q));
        prev = next;
      }
    } else {
      std::vector<double> e(d);
      double total = 0;
      for (auto& x : e) total += (x = standard_exponential(rng));
      const double spare = 1.0 - floor * static_cast<double>(d);
      double assigned = 0;
      for (std::size_t i = 0; i + 1 < d; ++i) {
        double p = floor + spare * e[i] / total;
        row.emplace_back(nb[i], p);
        assigned += p;
      }
      row.emplace_back(nb[d - 1], 1.0 - assigned);
    }
    base.set_row(u, std::move(row), Provenance::Known);
  }

  TransitionKernel<Scalar> out = default_augmented_kernel(aug, base, unknown);
  for (VertexId u = 0; u < n; ++u) {
    if (!in_scope(u) || !base.has_row(u)) continue;
    out.set_row(u, base.row(u),
                detail::is_unknown_target(aug, u, unknown) ? Provenance::Unknown
                                                           : Provenance::Known);
  }
  return out;
}

/// Kernel with the given rows at original vertices and defaults elsewhere.
/// Convenience for fixtures: rows are (vertex, [(neighbor, prob)...]).
template <class Scalar>
TransitionKernel<Scalar> kernel_with_rows(
    const AugmentedTree& aug,
    const std::vector<std::pair<VertexId, typename TransitionKernel<Scalar>::Row>>& rows,
    UnknownScope scope = UnknownScope::AllLambda) {
  TransitionKernel<Scalar> base(aug.vertex_count());
  for (const auto& [u, row] : rows) base.set_row(u, row, Provenance::Known);
  TransitionKernel<Scalar> out = default_augmented_kernel(aug, base, scope);
  for (const auto& [u, row] : rows)
    if (!aug.is_original(u)) out.set_row(u, row, Provenance::Known);
  return out;
}

}  // namespace treetomo
