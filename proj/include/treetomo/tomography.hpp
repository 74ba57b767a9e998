#pragma once

// Inversion: recover the transition probabilities of the base tree from the
// first hitting distributions of the two boundary layers of its 2-spherical
// augmentation.
//
// For an edge (u, w) with u at shell k and every row at shells >= k+1 known,
// consider the walks that first reach the outer layer at time
// T = 3R+4-2k at a vertex below w. Split them by the time s and place g of
// their first inner-layer visit (s = T-(2l-1), l = 1..R+2-k):
//
//  * if g lies below w, the remainder of the walk is a tail from g that
//    never drops below shell k+1, whose probability chi(g, l) uses only
//    known rows;
//  * the remaining walks are "turnarounds": they go straight out to some
//    inner vertex x below u at time R+1, straight back to u, then straight
//    out through w. Each carries t_uw exactly once, and every other factor
//    is known or is the observable P_in(R+1, x).
//
// Hence sum_v P_out(T, v) = sum_{l,g} P_in(T-(2l-1), g) chi(g, l) + t_uw D,
// which is solved for t_uw. The recursion runs from shell R down to the root.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "treetomo/error.hpp"
#include "treetomo/hitting.hpp"
#include "treetomo/kernel.hpp"
#include "treetomo/scalar.hpp"
#include "treetomo/tree.hpp"

namespace treetomo {

/// Highest time index read from each distribution (-1: never read).
struct TimeAccess {
  int inner = -1;
  int outer = -1;

  void note(Layer layer, int t) {
    int& slot = layer == Layer::Inner ? inner : outer;
    slot = std::max(slot, t);
  }
  void merge(const TimeAccess& other) {
    inner = std::max(inner, other.inner);
    outer = std::max(outer, other.outer);
  }
  int max() const { return std::max(inner, outer); }
};

namespace detail {

template <class Scalar>
const Scalar& read(const HittingDistribution<Scalar>& dist, int t, VertexId v, TimeAccess* log) {
  if (log) log->note(dist.layer(), t);
  return dist.mass(t, v);
}

}  // namespace detail

struct EdgeRecoveryPlan {
  int shell = 0;  // k = |u|
  VertexId u = 0;
  VertexId w = 0;
  int radius = 0;     // R = R_out of the base tree
  int hit_time = 0;   // 3R+4-2k
  int max_l = 0;      // R+2-k
  std::vector<VertexId> exits;        // outer vertices below w
  std::vector<VertexId> exit_gates;   // inner vertices below w
  std::vector<VertexId> turn_points;  // inner vertices below u
};

inline EdgeRecoveryPlan make_plan(const AugmentedTree& aug, VertexId u, VertexId w) {
  if (aug.aug_len != 2)
    fail(ErrorCode::InvalidParameter, "inversion needs the 2-spherical augmentation");
  if (u >= aug.vertex_count() || w >= aug.vertex_count())
    fail(ErrorCode::UnknownVertex, "edge endpoint out of range");
  if (!aug.is_original(u))
    fail(ErrorCode::NotInLambda, "vertex " + std::to_string(u) + " is not in the base tree");
  if (aug.full.parent(w) != u)
    fail(ErrorCode::NotAChild,
         "vertex " + std::to_string(w) + " is not a child of " + std::to_string(u));
  EdgeRecoveryPlan plan;
  plan.shell = aug.full.norm(u);
  plan.u = u;
  plan.w = w;
  plan.radius = aug.hull_radius;
  plan.hit_time = 3 * plan.radius + 4 - 2 * plan.shell;
  plan.max_l = plan.radius + 2 - plan.shell;
  for (VertexId v : aug.outer_layer)
    if (aug.full.is_ancestor(w, v)) plan.exits.push_back(v);
  for (VertexId g : aug.inner_layer) {
    if (aug.full.is_ancestor(w, g)) plan.exit_gates.push_back(g);
    if (aug.full.is_ancestor(u, g)) plan.turn_points.push_back(g);
  }
  return plan;
}

/// chi(g, l): probability that the walk from gate g first reaches the exits
/// at time 2l-1 while staying at shells k+1..R+1 beforehand.
template <class Scalar>
std::map<std::pair<VertexId, int>, Scalar> chi_values(const AugmentedTree& aug,
                                                      const TransitionKernel<Scalar>& kernel,
                                                      const EdgeRecoveryPlan& plan) {
  std::map<std::pair<VertexId, int>, Scalar> chi;
  PathClassQuery query;
  query.target = plan.exits;
  query.min_shell = plan.shell + 1;
  query.max_shell_strict = plan.radius + 2;
  for (VertexId g : plan.exit_gates) {
    query.start = g;
    auto profile = path_class_profile(aug, kernel, query, 2 * plan.max_l - 1);
    for (int l = 1; l <= plan.max_l; ++l) chi[{g, l}] = profile[2 * l - 1];
  }
  return chi;
}

namespace detail {

// Product of transitions along the straight path from `from` down to its
// descendant `to`.
template <class Scalar>
Scalar outward_product(const AugmentedTree& aug, const TransitionKernel<Scalar>& kernel,
                       VertexId from, VertexId to) {
  Scalar product(1);
  while (to != from) {
    VertexId p = *aug.full.parent(to);
    product *= kernel.prob(p, to);
    to = p;
  }
  return product;
}

// Product of transitions along the straight path from `from` up to its
// ancestor `to`.
template <class Scalar>
Scalar inward_product(const AugmentedTree& aug, const TransitionKernel<Scalar>& kernel,
                      VertexId from, VertexId to) {
  Scalar product(1);
  while (from != to) {
    VertexId p = *aug.full.parent(from);
    product *= kernel.prob(from, p);
    from = p;
  }
  return product;
}

}  // namespace detail

/// D = P(turnaround walks) / t_uw
///   = sum_x P_in(R+1, x) * in(x -> u) * sum_v out(w -> v)
/// over turn points x below u and exits v below w, where in/out are the
/// products of known transitions along the straight legs. P_in(R+1, x) is
/// read off the outer distribution as P_out(R+2, x') / t(x, x') with x' the
/// outer child of x.
template <class Scalar>
Scalar gamma_star_denominator(const AugmentedTree& aug, const TransitionKernel<Scalar>& kernel,
                              const EdgeRecoveryPlan& plan,
                              const HittingDistribution<Scalar>& p_out,
                              TimeAccess* log = nullptr) {
  const int ballistic = plan.radius + 2;
  Scalar out_legs(0);
  for (VertexId v : plan.exits) out_legs += detail::outward_product(aug, kernel, plan.w, v);
  Scalar heads(0);
  for (VertexId x : plan.turn_points) {
    const VertexId exit = aug.outer_child(x);
    const Scalar step = kernel.prob(x, exit);
    if (step == 0) fail(ErrorCode::ZeroDenominator, "zero exit step at " + std::to_string(x));
    heads += detail::read(p_out, ballistic, exit, log) / step *
             detail::inward_product(aug, kernel, x, plan.u);
  }
  Scalar d = heads * out_legs;
  if (d == 0)
    fail(ErrorCode::ZeroDenominator, "turnaround probability vanishes for edge (" +
                                         std::to_string(plan.u) + "," + std::to_string(plan.w) +
                                         ")");
  return d;
}

template <class Scalar>
Scalar recover_edge(const AugmentedTree& aug, const TransitionKernel<Scalar>& kernel,
                    const EdgeRecoveryPlan& plan, const HittingDistribution<Scalar>& p_in,
                    const HittingDistribution<Scalar>& p_out, TimeAccess* log = nullptr) {
  const auto chi = chi_values(aug, kernel, plan);
  const Scalar d = gamma_star_denominator(aug, kernel, plan, p_out, log);
  Scalar numerator(0);
  for (VertexId v : plan.exits) numerator += detail::read(p_out, plan.hit_time, v, log);
  for (int l = 1; l <= plan.max_l; ++l) {
    const int s = plan.hit_time - (2 * l - 1);
    for (VertexId g : plan.exit_gates) {
      const Scalar& c = chi.at({g, l});
      if (c == 0) continue;
      numerator -= detail::read(p_in, s, g, log) * c;
    }
  }
  return Scalar(numerator / d);
}

struct RecoveryFlag {
  std::string code;
  VertexId vertex = 0;
  std::string detail;
};

struct RecoveryOptions {
  // Clamp out-of-range values into [clamp_eps, 1 - clamp_eps] and renormalize
  // instead of throwing. Meant for empirical inputs.
  bool project = false;
  double clamp_eps = 1e-6;
  // Float mode: allowed |sum - 1| for the root's recovered row.
  double root_sum_tolerance = 1e-9;
};

template <class Scalar>
struct RecoveryReport {
  TransitionKernel<Scalar> kernel;  // final rows (projected when enabled)
  TransitionKernel<Scalar> raw;     // rows exactly as solved
  std::map<VertexId, double> residuals;
  std::optional<double> max_error;
  TimeAccess times_accessed;
  std::map<int, int> shell_max_time;  // shell k -> highest time read there
  std::vector<RecoveryFlag> flags;

  int max_time_read() const { return times_accessed.max(); }
};

inline int required_time(const AugmentedTree& aug) { return 3 * aug.hull_radius + 4; }

namespace detail {

template <class Scalar>
void check_inputs(const AugmentedTree& aug, const TransitionKernel<Scalar>& known,
                  const HittingDistribution<Scalar>& p_in,
                  const HittingDistribution<Scalar>& p_out) {
  if (aug.aug_len != 2)
    fail(ErrorCode::InvalidParameter, "inversion needs the 2-spherical augmentation");
  if (p_in.layer() != Layer::Inner || p_out.layer() != Layer::Outer)
    fail(ErrorCode::InvalidParameter, "distributions passed for the wrong layers");
  const int need = required_time(aug);
  for (const auto* d : {&p_in, &p_out})
    if (d->t_max() < need)
      fail(ErrorCode::FormatError, std::string(to_string(d->layer())) +
                                       " distribution covers t <= " + std::to_string(d->t_max()) +
                                       ", inversion needs t <= " + std::to_string(need));
  if (known.vertex_count() != aug.vertex_count())
    fail(ErrorCode::InvalidKernel, "kernel size does not match the tree");
  for (VertexId u = 0; u < aug.vertex_count(); ++u) {
    if (known.provenance(u) == Provenance::Unknown) {
      if (!aug.is_original(u))
        fail(ErrorCode::InvalidParameter,
             "added vertex " + std::to_string(u) + " must have a known row");
    } else if (!known.has_row(u)) {
      fail(ErrorCode::MissingRow, "known row missing at vertex " + std::to_string(u));
    }
  }
  auto diagnostics = validate_kernel(aug, known, true);
  for (const auto& d : diagnostics) {
    // Rows flagged Unknown but filled in are ignored by the recursion.
    if (known.provenance(d.vertex) == Provenance::Unknown) continue;
    fail(ErrorCode::InvalidKernel, "known row at vertex " + std::to_string(d.vertex) + ": " +
                                       std::string(to_string(d.violation)));
  }
}

template <class Scalar>
bool near_one(const Scalar& sum, double tolerance) {
  if constexpr (scalar_traits<Scalar>::exact) {
    return sum == 1;
  } else {
    return std::abs(sum - 1.0) <= tolerance;
  }
}

}  // namespace detail

/// Recovers every Unknown row of `known`, shell by shell from R down to 0.
template <class Scalar>
RecoveryReport<Scalar> recover_all(const AugmentedTree& aug, const TransitionKernel<Scalar>& known,
                                   const HittingDistribution<Scalar>& p_in,
                                   const HittingDistribution<Scalar>& p_out,
                                   const RecoveryOptions& options = {}) {
  detail::check_inputs(aug, known, p_in, p_out);
  RecoveryReport<Scalar> report;
  report.kernel = known;
  for (VertexId u = 0; u < aug.vertex_count(); ++u)
    if (known.provenance(u) == Provenance::Unknown) report.kernel.clear_row(u);
  report.raw = report.kernel;

  const Scalar eps = scalar_traits<Scalar>::from_double(options.clamp_eps);
  const Scalar one(1);

  for (int k = aug.hull_radius; k >= 0; --k) {
    TimeAccess shell_log;
    for (VertexId u : aug.full.shell(k)) {
      if (!aug.is_original(u) || known.provenance(u) != Provenance::Unknown) continue;
      const auto& kids = aug.full.children(u);
      const auto parent = aug.full.parent(u);
      typename TransitionKernel<Scalar>::Row raw_row;

      if (!parent && kids.size() == 1) {
        raw_row.emplace_back(kids.front(), one);
        report.kernel.set_row(u, raw_row, Provenance::Recovered);
        report.raw.set_row(u, raw_row, Provenance::Recovered);
        report.residuals[u] = 0.0;
        continue;
      }

      bool needs_projection = false;
      Scalar child_sum(0);
      for (VertexId w : kids) {
        const auto plan = make_plan(aug, u, w);
        Scalar t = recover_edge(aug, report.kernel, plan, p_in, p_out, &shell_log);
        if (!(t > 0 && t < 1)) {
          if (!options.project)
            fail(ErrorCode::OutOfRange, "recovered t(" + std::to_string(u) + "," +
                                            std::to_string(w) + ") = " + format_scalar(t) +
                                            " lies outside (0,1)");
          report.flags.push_back({"OutOfRange", u, "t(" + std::to_string(u) + "," +
                                                       std::to_string(w) +
                                                       ") = " + format_scalar(t)});
          needs_projection = true;
        }
        child_sum += t;
        raw_row.emplace_back(w, std::move(t));
      }

      if (parent) {
        Scalar back = one - child_sum;
        if (!(back > 0)) {
          if (!options.project)
            fail(ErrorCode::RowSumViolation, "children of vertex " + std::to_string(u) +
                                                 " sum to " + format_scalar(child_sum) +
                                                 " leaving no mass for the parent step");
          report.flags.push_back({"RowSum", u, "parent step " + format_scalar(back)});
          needs_projection = true;
        }
        raw_row.emplace_back(*parent, std::move(back));
        report.residuals[u] = 0.0;
      } else {
        const double deviation = std::abs(to_double(Scalar(child_sum - one)));
        report.residuals[u] = deviation;
        if (!detail::near_one(child_sum, options.root_sum_tolerance)) {
          if (!options.project)
            fail(ErrorCode::RowSumViolation,
                 "root row sums to " + format_scalar(child_sum) + " instead of 1");
          report.flags.push_back({"RootSum", u, "root row sums to " + format_scalar(child_sum)});
          needs_projection = true;
        }
      }

      report.raw.set_row(u, raw_row, Provenance::Recovered);
      if (needs_projection) {
        Scalar total(0);
        for (auto& entry : raw_row) {
          entry.second = std::clamp(entry.second, eps, Scalar(one - eps));
          total += entry.second;
        }
        for (auto& entry : raw_row) entry.second = entry.second / total;
      }
      report.kernel.set_row(u, std::move(raw_row), Provenance::Recovered);
    }
    report.shell_max_time[k] = shell_log.max();
    report.times_accessed.merge(shell_log);
  }
  return report;
}

/// Largest absolute entry difference over the rows that `reference` flags
/// Unknown (the recovery targets).
template <class Scalar>
double max_abs_error(const TransitionKernel<Scalar>& estimate,
                     const TransitionKernel<Scalar>& reference) {
  double worst = 0;
  for (VertexId u = 0; u < reference.vertex_count(); ++u) {
    if (reference.provenance(u) != Provenance::Unknown) continue;
    for (const auto& [v, p] : reference.row(u))
      worst = std::max(worst, std::abs(to_double(Scalar(estimate.prob(u, v) - p))));
  }
  return worst;
}

/// True when every target row of `reference` is reproduced exactly.
template <class Scalar>
bool exact_match(const TransitionKernel<Scalar>& estimate,
                 const TransitionKernel<Scalar>& reference) {
  for (VertexId u = 0; u < reference.vertex_count(); ++u) {
    if (reference.provenance(u) != Provenance::Unknown) continue;
    if (!estimate.has_row(u) || estimate.row(u) != reference.row(u)) return false;
  }
  return true;
}

/// Closed-form inversion on the (1,m)-star. Vertex j (1..m) is an arm,
/// m+j the inner vertex below it and 2m+j the outer vertex below that.
///   t(j, m+j) = [P_out(5)/P_out(3) - P_in(4)/P_in(2)] / t(m+j, j)
///   t(0, j)   = P_in(2, m+j) / t(j, m+j)
///   t(j, 0)   = 1 - t(j, m+j)
template <class Scalar>
TransitionKernel<Scalar> recover_star(int m, const TransitionKernel<Scalar>& known,
                                      const HittingDistribution<Scalar>& p_in,
                                      const HittingDistribution<Scalar>& p_out) {
  if (m < 1) fail(ErrorCode::InvalidParameter, "star needs m >= 1");
  if (p_in.t_max() < 5 || p_out.t_max() < 5)
    fail(ErrorCode::FormatError, "star inversion needs distributions up to t = 5");
  const auto mm = static_cast<VertexId>(m);
  if (known.vertex_count() != 3 * mm + 1)
    fail(ErrorCode::InvalidKernel, "kernel size does not match the augmented (1,m)-star");
  TransitionKernel<Scalar> out = known;
  typename TransitionKernel<Scalar>::Row root_row;
  auto ratio = [](const Scalar& a, const Scalar& b, const char* what) {
    if (b == 0) fail(ErrorCode::ZeroDenominator, std::string("zero ") + what);
    return Scalar(a / b);
  };
  for (VertexId j = 1; j <= mm; ++j) {
    const VertexId inner = mm + j;
    const VertexId outer = 2 * mm + j;
    const Scalar back = known.prob(inner, j);
    const Scalar out_ratio = ratio(p_out.mass(5, outer), p_out.mass(3, outer), "P_out(3)");
    const Scalar in_ratio = ratio(p_in.mass(4, inner), p_in.mass(2, inner), "P_in(2)");
    const Scalar arm_out = ratio(Scalar(out_ratio - in_ratio), back, "t(m+j, j)");
    Scalar root_to_arm = ratio(p_in.mass(2, inner), arm_out, "t(j, m+j)");
    if constexpr (!scalar_traits<Scalar>::exact) {
      // round-off on a single-arm star
      if (root_to_arm > 1 && root_to_arm <= 1 + 1e-9) root_to_arm = 1;
    }
    const Scalar arm_back = Scalar(1) - arm_out;
    if (!(arm_out > 0 && arm_out < 1) || !(root_to_arm > 0 && root_to_arm <= 1))
      fail(ErrorCode::OutOfRange, "star recovery left the simplex at arm " + std::to_string(j));
    out.set_row(j, {{0, arm_back}, {inner, arm_out}}, Provenance::Recovered);
    root_row.emplace_back(j, root_to_arm);
  }
  out.set_row(0, std::move(root_row), Provenance::Recovered);
  return out;
}

}  // namespace treetomo
