#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace treetomo;
using fixtures::ratio;

namespace {

template <class S>
std::vector<Violation> violations_at(const AugmentedTree& aug, const TransitionKernel<S>& k,
                                     VertexId v) {
  std::vector<Violation> out;
  for (const auto& d : validate_kernel(aug, k))
    if (d.vertex == v) out.push_back(d.violation);
  return out;
}

TEST(Validate, SymmetricPathIsValid) {
  auto aug = spherical_augmentation(segment(0, 1), 2);
  auto k = kernel_with_rows<Rational>(aug, {{1, {{0, Rational(1, 2)}, {2, Rational(1, 2)}}}});
  EXPECT_TRUE(validate_kernel(aug, k).empty());
}

TEST(Validate, ZeroEntryIsDegenerate) {
  auto aug = spherical_augmentation(segment(0, 1), 2);
  auto k = kernel_with_rows<double>(aug, {{1, {{0, 0.0}, {2, 1.0}}}});
  EXPECT_EQ(violations_at(aug, k, 1), (std::vector{Violation::Nondegenerate}));
}

TEST(Validate, RowSumOff) {
  auto aug = spherical_augmentation(segment(0, 1), 2);
  auto k = kernel_with_rows<double>(aug, {{1, {{0, 0.4}, {2, 0.5}}}});
  EXPECT_EQ(violations_at(aug, k, 1), (std::vector{Violation::RowSum}));
  auto r = kernel_with_rows<Rational>(aug, {{1, {{0, Rational(2, 5)}, {2, Rational(1, 2)}}}});
  EXPECT_EQ(violations_at(aug, r, 1), (std::vector{Violation::RowSum}));
}

TEST(Validate, FloatTolerance) {
  auto aug = spherical_augmentation(segment(0, 1), 2);
  auto k = kernel_with_rows<double>(aug, {{1, {{0, 0.3}, {2, 0.7 + 1e-13}}}});
  EXPECT_TRUE(validate_kernel(aug, k).empty());
}

TEST(Validate, SupportAbsorptionAndShape) {
  auto aug = spherical_augmentation(segment(0, 1), 2);
  auto k = kernel_with_rows<double>(aug, {{1, {{0, 0.5}, {2, 0.5}}}});
  auto bad = k;
  bad.set_row(1, {{0, 0.5}, {3, 0.5}}, Provenance::Known);
  EXPECT_EQ(violations_at(aug, bad, 1), (std::vector{Violation::Support}));
  bad = k;
  bad.set_row(3, {{2, 1.0}}, Provenance::Known);
  EXPECT_EQ(violations_at(aug, bad, 3), (std::vector{Violation::NotAbsorbing}));
  bad = k;
  bad.clear_row(2);
  EXPECT_EQ(violations_at(aug, bad, 2), (std::vector{Violation::MissingRow}));
  EXPECT_TRUE(validate_kernel(aug, bad, true).empty());
  EXPECT_EQ(validate_kernel(aug, TransitionKernel<double>(3)).front().violation,
            Violation::SizeMismatch);
}

TEST(DefaultKernel, Segment) {
  auto aug = spherical_augmentation(segment(0, 1), 2);
  auto k = default_augmented_kernel(aug, TransitionKernel<Rational>(aug.vertex_count()));
  EXPECT_EQ(k.row(0), (TransitionKernel<Rational>::Row{{1, 1}}));
  EXPECT_EQ(k.prob(1, 0), Rational(1, 2));
  EXPECT_EQ(k.prob(1, 2), Rational(1, 2));
  EXPECT_EQ(k.prob(2, 3), Rational(1, 2));
  EXPECT_TRUE(k.row(3).empty());
  EXPECT_EQ(k.provenance(0), Provenance::Unknown);
  EXPECT_EQ(k.provenance(1), Provenance::Unknown);
  EXPECT_EQ(k.provenance(2), Provenance::Known);
  EXPECT_TRUE(validate_kernel(aug, k).empty());
}

TEST(DefaultKernel, Star) {
  auto [aug, k] = fixtures::symmetric_star<Rational>(2);
  EXPECT_EQ(k.row(3), (TransitionKernel<Rational>::Row{{1, Rational(1, 2)}, {5, Rational(1, 2)}}));
  EXPECT_EQ(k.row(4), (TransitionKernel<Rational>::Row{{2, Rational(1, 2)}, {6, Rational(1, 2)}}));
  EXPECT_TRUE(validate_kernel(aug, k).empty());
}

TEST(DefaultKernel, MissingRootRow) {
  auto aug = spherical_augmentation(star(1, 2), 2);
  try {
    default_augmented_kernel(aug, TransitionKernel<double>(aug.vertex_count()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingRow);
  }
}

TEST(DefaultKernel, InternalScopeKeepsTerminalsKnown) {
  auto aug = spherical_augmentation(star(1, 2), 2);
  auto k = random_kernel<double>(aug, 1, 0.05, RandomScope::LambdaOnly,
                                 UnknownScope::InternalLambda);
  EXPECT_EQ(k.provenance(0), Provenance::Unknown);
  EXPECT_EQ(k.provenance(1), Provenance::Known);
  EXPECT_EQ(k.provenance(2), Provenance::Known);
}

TEST(RandomKernel, Deterministic) {
  auto aug = spherical_augmentation(random_tree(3, 30, 4), 2);
  EXPECT_EQ(random_kernel<double>(aug, 9, 0.05), random_kernel<double>(aug, 9, 0.05));
  EXPECT_EQ(random_kernel<Rational>(aug, 9, 0.05), random_kernel<Rational>(aug, 9, 0.05));
  EXPECT_FALSE(random_kernel<double>(aug, 9, 0.05) == random_kernel<double>(aug, 10, 0.05));
}

TEST(RandomKernel, FloorIsRespected) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto aug = spherical_augmentation(random_tree(1 + static_cast<int>(seed % 5), 40, seed), 2);
    auto f = random_kernel<double>(aug, seed, 0.05);
    auto r = random_kernel<Rational>(aug, seed, 0.05);
    EXPECT_TRUE(validate_kernel(aug, f).empty());
    EXPECT_TRUE(validate_kernel(aug, r).empty());
    for (VertexId u = 0; u < aug.vertex_count(); ++u) {
      if (!aug.is_original(u)) continue;
      Rational sum(0);
      for (const auto& [v, p] : r.row(u)) {
        EXPECT_GE(p, Rational(1, 20));
        sum += p;
      }
      EXPECT_EQ(sum, 1);
      for (const auto& [v, p] : f.row(u)) EXPECT_GE(p, 0.05 - 1e-15);
    }
  }
}

TEST(RandomKernel, AllVerticesScopeRandomizesAddedRows) {
  auto aug = spherical_augmentation(star(1, 3), 2);
  auto k = random_kernel<Rational>(aug, 5, 0.1, RandomScope::AllVertices);
  bool asymmetric = false;
  for (VertexId u : aug.inner_layer) asymmetric |= k.row(u).front().second != Rational(1, 2);
  EXPECT_TRUE(asymmetric);
  EXPECT_TRUE(validate_kernel(aug, k).empty());
  EXPECT_EQ(k.provenance(aug.inner_layer.front()), Provenance::Known);
}

TEST(RandomKernel, InfeasibleFloor) {
  auto aug = spherical_augmentation(star(1, 3), 2);  // root degree 3
  for (double floor : {0.6, 0.34, 0.0, -0.1}) {
    try {
      random_kernel<double>(aug, 1, floor);
      FAIL() << floor;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidParameter);
    }
  }
}

TEST(Kernel, ProbAndRows) {
  auto [aug, k] = fixtures::segment_fixture<double>(0.7);
  EXPECT_DOUBLE_EQ(k.prob(1, 2), 0.7);
  EXPECT_EQ(k.prob(1, 3), 0.0);
  auto blank = known_part(k);
  EXPECT_FALSE(blank.has_row(1));
  EXPECT_TRUE(blank.has_row(2));
  try {
    blank.prob(1, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingKnownRow);
  }
}

TEST(Kernel, ConvertsBetweenModes) {
  auto [aug, k] = fixtures::skewed_star<Rational>();
  auto f = k.convert<double>();
  EXPECT_DOUBLE_EQ(f.prob(0, 1), 0.3);
  EXPECT_EQ(f.provenance(0), Provenance::Unknown);
  EXPECT_TRUE(validate_kernel(aug, f).empty());
}

}  // namespace
