#pragma once

#include <cstdint>
#include <utility>

#include "treetomo/treetomo.hpp"

namespace fixtures {

using namespace treetomo;

template <class S>
S ratio(long num, long den) {
  return scalar_traits<S>::from_ratio(num, den);
}

// Path 0-1-2-3 from segment(0,1); the only free parameter is t(1,2) = p.
template <class S>
std::pair<AugmentedTree, TransitionKernel<S>> segment_fixture(const S& p) {
  auto aug = spherical_augmentation(segment(0, 1), 2);
  auto kernel = kernel_with_rows<S>(aug, {{1, {{0, S(1 - p)}, {2, p}}}});
  return {std::move(aug), std::move(kernel)};
}

// (1,m)-star with every transition uniform.
template <class S>
std::pair<AugmentedTree, TransitionKernel<S>> symmetric_star(int m) {
  auto aug = spherical_augmentation(star(1, m), 2);
  typename TransitionKernel<S>::Row root;
  for (int j = 1; j <= m; ++j) root.emplace_back(static_cast<VertexId>(j), ratio<S>(1, m));
  auto kernel = kernel_with_rows<S>(aug, {{0, root}});
  return {std::move(aug), std::move(kernel)};
}

// (1,2)-star with t(0,1) = 3/10 and t(1,3) = 3/5.
template <class S>
std::pair<AugmentedTree, TransitionKernel<S>> skewed_star() {
  auto aug = spherical_augmentation(star(1, 2), 2);
  auto kernel = kernel_with_rows<S>(aug, {{0, {{1, ratio<S>(3, 10)}, {2, ratio<S>(7, 10)}}},
                                          {1, {{0, ratio<S>(2, 5)}, {3, ratio<S>(3, 5)}}},
                                          {2, {{0, ratio<S>(11, 20)}, {4, ratio<S>(9, 20)}}}});
  return {std::move(aug), std::move(kernel)};
}

template <class S>
std::pair<AugmentedTree, TransitionKernel<S>> random_instance(std::uint64_t seed, int rout,
                                                              std::size_t max_vertices,
                                                              double floor = 0.05) {
  auto aug = spherical_augmentation(random_tree(rout, max_vertices, seed), 2);
  auto kernel = random_kernel<S>(aug, seed ^ 0x5eedULL, floor);
  return {std::move(aug), std::move(kernel)};
}

}  // namespace fixtures
