#pragma once

// Monte Carlo probes: simulate the killed walk, tally first hits of both
// layers, and run the inversion on the empirical distributions.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <map>
#include <thread>
#include <utility>
#include <vector>

#include "treetomo/error.hpp"
#include "treetomo/hitting.hpp"
#include "treetomo/kernel.hpp"
#include "treetomo/random.hpp"
#include "treetomo/tomography.hpp"
#include "treetomo/tree.hpp"

namespace treetomo {

struct WalkSample {
  int tau_in = -1;
  VertexId place_in = kNoVertex;
  int tau_out = -1;
  VertexId place_out = kNoVertex;

  bool operator==(const WalkSample&) const = default;
};

inline constexpr std::uint64_t kDefaultStepCap = 10'000'000;

/// Cumulative transition tables for fast sampling.
class WalkSimulator {
 public:
  WalkSimulator(const AugmentedTree& aug, const TransitionKernel<double>& kernel,
                std::uint64_t step_cap = kDefaultStepCap)
      : root_(aug.root()), step_cap_(step_cap), inner_(aug.vertex_count(), 0),
        outer_(aug.vertex_count(), 0), next_(aug.vertex_count()), cumulative_(aug.vertex_count()) {
    detail::require_valid(aug, kernel);
    for (VertexId v : aug.inner_layer) inner_[v] = 1;
    for (VertexId v : aug.outer_layer) outer_[v] = 1;
    for (VertexId u = 0; u < aug.vertex_count(); ++u) {
      double acc = 0;
      for (const auto& [v, p] : kernel.row(u)) {
        acc += p;
        next_[u].push_back(v);
        cumulative_[u].push_back(acc);
      }
    }
  }

  template <class Urbg>
  WalkSample sample(Urbg& rng) const {
    WalkSample s;
    VertexId at = root_;
    if (inner_[at]) s = {0, at, -1, kNoVertex};
    for (std::uint64_t step = 1; step <= step_cap_; ++step) {
      const double x = uniform01(rng);
      const auto& cum = cumulative_[at];
      std::size_t i = 0;
      while (i + 1 < cum.size() && x >= cum[i]) ++i;
      at = next_[at][i];
      const int t = static_cast<int>(step);
      if (inner_[at] && s.tau_in < 0) {
        s.tau_in = t;
        s.place_in = at;
      }
      if (outer_[at]) {
        s.tau_out = t;
        s.place_out = at;
        return s;
      }
    }
    fail(ErrorCode::NonTermination, "walk not absorbed within the step cap");
  }

 private:
  VertexId root_;
  std::uint64_t step_cap_;
  std::vector<char> inner_;
  std::vector<char> outer_;
  std::vector<std::vector<VertexId>> next_;
  std::vector<std::vector<double>> cumulative_;
};

/// One probe: the killed walk from the root until it is absorbed on the outer
/// layer.
template <class Urbg>
WalkSample sample_walk(const AugmentedTree& aug, const TransitionKernel<double>& kernel,
                       Urbg& rng, std::uint64_t step_cap = kDefaultStepCap) {
  return WalkSimulator(aug, kernel, step_cap).sample(rng);
}

struct SampleBatch {
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  int t_cap = 0;
  std::map<std::pair<int, VertexId>, std::uint64_t> counts_in;
  std::map<std::pair<int, VertexId>, std::uint64_t> counts_out;
  std::uint64_t overflow = 0;  // walks with tau_out > t_cap

  bool operator==(const SampleBatch&) const = default;
};

inline int default_t_cap(const AugmentedTree& aug) {
  return std::max(required_time(aug), 64);
}

/// n walks; walk i draws from stream (seed, i), so the batch does not depend
/// on how the walks are split across workers.
inline SampleBatch collect_batch(const AugmentedTree& aug, const TransitionKernel<double>& kernel,
                                 std::uint64_t n, std::uint64_t seed, unsigned workers = 1,
                                 int t_cap = -1) {
  if (n == 0) fail(ErrorCode::InvalidParameter, "sample count must be positive");
  if (workers == 0) fail(ErrorCode::InvalidParameter, "worker count must be positive");
  if (t_cap < 0) t_cap = default_t_cap(aug);
  const WalkSimulator sim(aug, kernel);
  const std::size_t width = aug.vertex_count();
  const std::size_t cells = (static_cast<std::size_t>(t_cap) + 1) * width;

  struct Tally {
    std::vector<std::uint64_t> in, out;
    std::uint64_t overflow = 0;
    std::exception_ptr error;
  };
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, n));
  std::vector<Tally> tallies(workers);
  auto run = [&](unsigned id) {
    Tally& tally = tallies[id];
    try {
      tally.in.assign(cells, 0);
      tally.out.assign(cells, 0);
      const std::uint64_t begin = n * id / workers;
      const std::uint64_t end = n * (id + 1) / workers;
      for (std::uint64_t i = begin; i < end; ++i) {
        SplitMix64 rng(seed, i);
        const WalkSample s = sim.sample(rng);
        if (s.tau_in >= 0 && s.tau_in <= t_cap)
          ++tally.in[static_cast<std::size_t>(s.tau_in) * width + s.place_in];
        if (s.tau_out <= t_cap) {
          ++tally.out[static_cast<std::size_t>(s.tau_out) * width + s.place_out];
        } else {
          ++tally.overflow;
        }
      }
    } catch (...) {
      tally.error = std::current_exception();
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> threads;
    for (unsigned id = 0; id < workers; ++id) threads.emplace_back(run, id);
    for (auto& th : threads) th.join();
  }

  SampleBatch batch;
  batch.n = n;
  batch.seed = seed;
  batch.t_cap = t_cap;
  std::vector<std::uint64_t> in(cells, 0), out(cells, 0);
  for (const auto& tally : tallies) {
    if (tally.error) std::rethrow_exception(tally.error);
    for (std::size_t c = 0; c < cells; ++c) {
      in[c] += tally.in[c];
      out[c] += tally.out[c];
    }
    batch.overflow += tally.overflow;
  }
  for (std::size_t c = 0; c < cells; ++c) {
    const int t = static_cast<int>(c / width);
    const VertexId v = c % width;
    if (in[c]) batch.counts_in[{t, v}] = in[c];
    if (out[c]) batch.counts_out[{t, v}] = out[c];
  }
  return batch;
}

/// Empirical mass count(t, v) / n for both layers, t <= t_max.
template <class Scalar = double>
std::pair<HittingDistribution<Scalar>, HittingDistribution<Scalar>> empirical_joint(
    const AugmentedTree& aug, const SampleBatch& batch, int t_max) {
  if (t_max > batch.t_cap)
    fail(ErrorCode::InvalidParameter, "t_max exceeds the batch's recorded range");
  if (batch.n == 0) fail(ErrorCode::InvalidParameter, "empty batch");
  HittingDistribution<Scalar> in(Layer::Inner, aug.root(), t_max, aug.inner_layer);
  HittingDistribution<Scalar> out(Layer::Outer, aug.root(), t_max, aug.outer_layer);
  auto fill = [&](HittingDistribution<Scalar>& dist, const auto& counts) {
    for (const auto& [key, count] : counts) {
      if (key.first > t_max) continue;
      if constexpr (scalar_traits<Scalar>::exact) {
        dist.mass(key.first, key.second) =
            Scalar(mpz_class(std::to_string(count)), mpz_class(std::to_string(batch.n)));
        dist.mass(key.first, key.second).canonicalize();
      } else {
        dist.mass(key.first, key.second) =
            static_cast<double>(count) / static_cast<double>(batch.n);
      }
    }
  };
  fill(in, batch.counts_in);
  fill(out, batch.counts_out);
  return {std::move(in), std::move(out)};
}

/// Plug-in estimator: the exact inversion applied to empirical distributions,
/// with out-of-simplex rows projected back.
template <class Scalar = double>
RecoveryReport<Scalar> estimate_kernel(const AugmentedTree& aug,
                                       const TransitionKernel<Scalar>& known,
                                       const SampleBatch& batch, RecoveryOptions options = {}) {
  const int need = required_time(aug);
  if (batch.t_cap < need)
    fail(ErrorCode::FormatError, "batch records t <= " + std::to_string(batch.t_cap) +
                                     ", estimation needs t <= " + std::to_string(need));
  options.project = true;
  auto [p_in, p_out] = empirical_joint<Scalar>(aug, batch, need);
  try {
    return recover_all(aug, known, p_in, p_out, options);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ZeroDenominator)
      fail(ErrorCode::InsufficientData, std::string("empirical cell empty: ") + e.what());
    throw;
  }
}

struct ConsistencyRow {
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  double max_error = 0;
};

/// For every (n, seed): sample, estimate, and record the max absolute error
/// over the truth's Unknown rows.
inline std::vector<ConsistencyRow> consistency_curve(const AugmentedTree& aug,
                                                     const TransitionKernel<double>& truth,
                                                     const std::vector<std::uint64_t>& n_grid,
                                                     const std::vector<std::uint64_t>& seeds,
                                                     unsigned workers = 1) {
  const auto known = known_part(truth);
  std::vector<ConsistencyRow> rows;
  for (auto n : n_grid) {
    for (auto seed : seeds) {
      const auto batch = collect_batch(aug, truth, n, seed, workers);
      const auto report = estimate_kernel(aug, known, batch);
      rows.push_back({n, seed, max_abs_error(report.kernel, truth)});
    }
  }
  return rows;
}

}  // namespace treetomo
