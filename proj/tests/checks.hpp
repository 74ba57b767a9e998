#pragma once

// Property checks shared by the property tests and the acceptance runner.
// Each returns an empty string on success, otherwise what went wrong.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "treetomo/treetomo.hpp"

namespace checks {

using namespace treetomo;

template <class S>
bool close(const S& a, const S& b, double tol) {
  if constexpr (scalar_traits<S>::exact) {
    return a == b;
  } else {
    return std::abs(a - b) <= tol;
  }
}

template <class S>
std::string describe(const std::string& what, const S& got, const S& want) {
  return what + ": got " + format_scalar(got) + ", want " + format_scalar(want);
}

/// Nonnegativity, parity, minimal time, total mass, layer coupling,
/// monotone exhaustion and the ballistic identity.
template <class S>
std::string hitting_invariants(const AugmentedTree& aug, const TransitionKernel<S>& k, int t_max,
                               double tol = 1e-12) {
  auto in = first_hitting_joint(aug, k, Layer::Inner, t_max);
  auto out = first_hitting_joint(aug, k, Layer::Outer, t_max);
  for (const auto* d : {&in, &out}) {
    for (int t = 0; t <= t_max; ++t)
      for (VertexId v : d->vertices()) {
        const S& m = d->mass(t, v);
        if (m < 0) return "negative mass";
        const int norm = aug.full.norm(v);
        if (m != 0 && (t < norm || (t - norm) % 2 != 0))
          return "mass at t=" + std::to_string(t) + " off the parity/minimal-time support";
      }
    if (d->total() > S(1) + S(tol)) return "total mass exceeds 1";
  }
  if (in.total() + S(tol) < out.total()) return "outer mass exceeds inner mass";
  if (t_max > 0) {
    auto shorter = first_hitting_joint(aug, k, Layer::Outer, t_max - 1);
    if (shorter.total() > out.total() + S(tol)) return "outer mass decreased with t_max";
  }
  if (t_max >= aug.outer_norm())
    for (VertexId v : aug.outer_layer) {
      const S want = oracle::ballistic_weight(aug, k, v);
      if (!close(out.mass(aug.outer_norm(), v), want, tol))
        return describe("ballistic mass at " + std::to_string(v), out.mass(aug.outer_norm(), v),
                        want);
    }
  return {};
}

/// Entrywise equality of the DP and explicit path enumeration.
template <class S>
std::string matches_brute_force(const AugmentedTree& aug, const TransitionKernel<S>& k,
                                int t_max, double tol = 1e-12) {
  BruteForceCaps caps;
  caps.max_time = std::max(caps.max_time, t_max);
  for (Layer layer : {Layer::Inner, Layer::Outer}) {
    auto dp = first_hitting_joint(aug, k, layer, t_max);
    auto bf = brute_force_hitting(aug, k, layer, t_max, caps);
    for (int t = 0; t <= t_max; ++t)
      for (VertexId v : dp.vertices())
        if (!close(dp.mass(t, v), bf.mass(t, v), tol))
          return describe("layer " + std::string(to_string(layer)) + " t=" + std::to_string(t) +
                              " v=" + std::to_string(v),
                          dp.mass(t, v), bf.mass(t, v));
  }
  return {};
}

template <class S>
std::string kernel_rows(const AugmentedTree& aug, const TransitionKernel<S>& k) {
  auto diagnostics = validate_kernel(aug, k);
  if (!diagnostics.empty())
    return "row " + std::to_string(diagnostics.front().vertex) + ": " +
           std::string(to_string(diagnostics.front().violation));
  return {};
}

/// For every edge (u, w) of the base tree, splits the walks absorbed below w
/// at time 3R+4-2|u| by whether they return to shell |u| after their first
/// inner visit, and compares both parts with the library's chi sum and
/// turnaround denominator.
template <class S>
std::string decomposition(const AugmentedTree& aug, const TransitionKernel<S>& k,
                          double tol = 1e-12) {
  const int T = required_time(aug);
  auto p_in = first_hitting_joint(aug, k, Layer::Inner, T);
  auto p_out = first_hitting_joint(aug, k, Layer::Outer, T);
  for (VertexId u = 0; u < aug.base.vertex_count(); ++u) {
    for (VertexId w : aug.full.children(u)) {
      const auto plan = make_plan(aug, u, w);
      const auto split = oracle::split_exit_mass(aug, k, u, w);
      S observed(0);
      for (VertexId v : plan.exits) observed += p_out.mass(plan.hit_time, v);
      const std::string edge = "(" + std::to_string(u) + "," + std::to_string(w) + ")";
      if (!close(observed, split.total, tol)) return describe("exit mass " + edge, observed, split.total);

      const auto chi = chi_values(aug, k, plan);
      S direct(0);
      for (int l = 1; l <= plan.max_l; ++l)
        for (VertexId g : plan.exit_gates)
          direct += p_in.mass(plan.hit_time - (2 * l - 1), g) * chi.at({g, l});
      if (!close(direct, split.direct, tol)) return describe("direct part " + edge, direct, split.direct);

      const S turnaround = k.prob(u, w) * gamma_star_denominator(aug, k, plan, p_out);
      if (!close(turnaround, split.turnaround, tol))
        return describe("turnaround part " + edge, turnaround, split.turnaround);
    }
  }
  return {};
}

struct RoundTrip {
  double max_error = 0;
  bool exact = false;
  int max_time_read = -1;
  bool within_time_bound = false;
};

/// Forward-solves to exactly 3R+4 and inverts from the known rows.
template <class S>
RoundTrip round_trip(const AugmentedTree& aug, const TransitionKernel<S>& truth) {
  const int T = required_time(aug);
  auto p_in = first_hitting_joint(aug, truth, Layer::Inner, T);
  auto p_out = first_hitting_joint(aug, truth, Layer::Outer, T);
  auto report = recover_all(aug, known_part(truth), p_in, p_out);
  RoundTrip r;
  r.max_error = max_abs_error(report.kernel, truth);
  r.exact = exact_match(report.kernel, truth);
  r.max_time_read = report.max_time_read();
  r.within_time_bound = r.max_time_read <= T;
  for (const auto& [shell, t] : report.shell_max_time)
    r.within_time_bound = r.within_time_bound && t <= T - 2 * shell;
  return r;
}

}  // namespace checks
