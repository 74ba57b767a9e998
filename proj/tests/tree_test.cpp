#include <gtest/gtest.h>

#include <numeric>

#include "fixtures.hpp"

using namespace treetomo;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

TEST(BuildTree, SingleEdge) {
  auto t = build_tree({{0, 1}}, 0);
  EXPECT_EQ(t.vertex_count(), 2u);
  EXPECT_EQ(t.norm(1), 1);
}

TEST(BuildTree, NormsFollowDistance) {
  auto t = build_tree({{0, 1}, {1, 2}, {0, 3}}, 0);
  EXPECT_EQ(t.norms(), (std::vector<int>{0, 1, 2, 1}));
  EXPECT_EQ(t.parent(2), VertexId{1});
  EXPECT_FALSE(t.parent(0).has_value());
  EXPECT_EQ(t.terminal_vertices(), (std::vector<VertexId>{2, 3}));
}

TEST(BuildTree, RejectsCycle) {
  EXPECT_EQ(code_of([] { build_tree({{0, 1}, {1, 2}, {2, 0}}, 0); }), ErrorCode::NotATree);
}

TEST(BuildTree, RejectsMalformedEdgeSets) {
  EXPECT_EQ(code_of([] { build_tree(3, {{0, 1}}, 0); }), ErrorCode::NotATree);
  EXPECT_EQ(code_of([] { build_tree(2, {{0, 0}}, 0); }), ErrorCode::NotATree);
  EXPECT_EQ(code_of([] { build_tree(3, {{0, 1}, {0, 1}}, 0); }), ErrorCode::NotATree);
  EXPECT_EQ(code_of([] { build_tree(4, {{0, 1}, {2, 3}, {3, 2}}, 0); }), ErrorCode::NotATree);
  EXPECT_EQ(code_of([] { build_tree(2, {{0, 5}}, 0); }), ErrorCode::UnknownVertex);
  EXPECT_EQ(code_of([] { build_tree(2, {{0, 1}}, 7); }), ErrorCode::UnknownVertex);
}

TEST(BuildTree, NonZeroRoot) {
  auto t = build_tree({{0, 1}, {1, 2}}, 1);
  EXPECT_EQ(t.root(), 1u);
  EXPECT_EQ(t.norms(), (std::vector<int>{1, 0, 1}));
  EXPECT_EQ(t.terminal_vertices(), (std::vector<VertexId>{0, 2}));
}

TEST(Segment, Shapes) {
  auto a = segment(0, 1);
  EXPECT_EQ(a.vertex_count(), 2u);
  EXPECT_EQ(radii(a).outer, 1);

  auto b = segment(1, 1);
  EXPECT_EQ(b.vertex_count(), 3u);
  EXPECT_EQ(b.children(0).size(), 2u);
  EXPECT_EQ(b.terminal_vertices().size(), 2u);

  auto c = segment(2, 3);
  EXPECT_EQ(c.vertex_count(), 6u);
  EXPECT_EQ(radii(c).outer, 3);
  EXPECT_EQ(radii(c).inner, 2);
  EXPECT_EQ(c.label(3), "3");
  EXPECT_EQ(c.label(5), "-2");
}

TEST(Segment, RejectsBadLengths) {
  EXPECT_EQ(code_of([] { segment(-1, 2); }), ErrorCode::InvalidParameter);
  EXPECT_EQ(code_of([] { segment(1, 0); }), ErrorCode::InvalidParameter);
}

TEST(Star, Shapes) {
  auto s = star(1, 2);
  EXPECT_EQ(s.children(0), (std::vector<VertexId>{1, 2}));
  EXPECT_EQ(radii(s).inner, 1);
  EXPECT_EQ(radii(s).outer, 1);
  EXPECT_EQ(star(3, 4).vertex_count(), 13u);
  EXPECT_EQ(star(3, 1), segment(0, 3));
  EXPECT_EQ(code_of([] { star(0, 2); }), ErrorCode::InvalidParameter);
}

TEST(Star, ArmsAreNumberedFromOne) {
  const int m = 5;
  auto s = star(1, m);
  for (int j = 1; j <= m; ++j) EXPECT_EQ(s.parent(j), VertexId{0});
  auto deep = star(3, 2);
  EXPECT_EQ(deep.parent(5), VertexId{3});  // depth 3 on arm 1
  EXPECT_EQ(deep.parent(6), VertexId{4});
}

TEST(Radii, Examples) {
  auto r = radii(star(1, 2));
  EXPECT_EQ(std::tuple(r.inner, r.outer, r.spherical), std::tuple(1, 1, true));
  r = radii(build_tree({{0, 1}, {1, 2}, {0, 3}}, 0));
  EXPECT_EQ(std::tuple(r.inner, r.outer, r.spherical), std::tuple(1, 2, false));
  r = radii(segment(2, 3));
  EXPECT_EQ(std::tuple(r.inner, r.outer, r.spherical), std::tuple(2, 3, false));
}

TEST(Augment, AtTerminal) {
  auto t = l_augment_at(segment(0, 1), 1, 2);
  EXPECT_EQ(t, segment(0, 3));
}

TEST(Augment, RootIsNotTerminal) {
  EXPECT_EQ(code_of([] { l_augment_at(segment(0, 1), 0, 1); }), ErrorCode::NotTerminal);
  EXPECT_EQ(code_of([] { l_augment_at(segment(1, 1), 0, 1); }), ErrorCode::NotTerminal);
  EXPECT_EQ(code_of([] { l_augment_at(segment(0, 1), 1, 0); }), ErrorCode::InvalidParameter);
}

TEST(SphericalAugmentation, Segment) {
  auto aug = spherical_augmentation(segment(0, 1), 2);
  EXPECT_EQ(aug.full, segment(0, 3));
  EXPECT_EQ(aug.inner_layer, (std::vector<VertexId>{2}));
  EXPECT_EQ(aug.outer_layer, (std::vector<VertexId>{3}));
  EXPECT_EQ(aug.hull_radius, 1);
  EXPECT_EQ(aug.inner_norm(), 2);
  EXPECT_EQ(aug.outer_norm(), 3);
  EXPECT_EQ(aug.outer_child(2), VertexId{3});
}

TEST(SphericalAugmentation, StarLayersRunShellByShell) {
  auto aug = spherical_augmentation(star(1, 2), 2);
  EXPECT_EQ(aug.vertex_count(), 7u);
  EXPECT_EQ(aug.inner_layer, (std::vector<VertexId>{3, 4}));
  EXPECT_EQ(aug.outer_layer, (std::vector<VertexId>{5, 6}));
  EXPECT_EQ(aug.full.parent(3), VertexId{1});
  EXPECT_EQ(aug.full.parent(6), VertexId{4});
  EXPECT_TRUE(aug.is_original(2));
  EXPECT_FALSE(aug.is_original(3));
}

TEST(SphericalAugmentation, ShallowTerminalGetsLongerChain) {
  auto base = build_tree({{0, 1}, {1, 2}, {0, 3}}, 0);
  auto aug = spherical_augmentation(base, 2);
  std::size_t below_3 = 0;
  for (VertexId v = 0; v < aug.vertex_count(); ++v)
    if (v != 3 && aug.full.is_ancestor(3, v)) ++below_3;
  EXPECT_EQ(below_3, 3u);
  EXPECT_EQ(aug.hull_radius, 2);
}

TEST(SphericalAugmentation, Invalid) {
  EXPECT_EQ(code_of([] { spherical_augmentation(segment(0, 1), 0); }),
            ErrorCode::InvalidParameter);
  EXPECT_EQ(code_of([] { spherical_augmentation(RootedTree::from_parents({kNoVertex}, 0), 2); }),
            ErrorCode::InvalidParameter);
}

TEST(SphericalAugmentation, LabelsFollowTheBase) {
  auto aug = spherical_augmentation(segment(1, 1), 2);
  EXPECT_EQ(aug.full.label(2), "-1");
  EXPECT_EQ(aug.base.label(2), "-1");
}

class RandomTrees : public ::testing::TestWithParam<int> {};

TEST_P(RandomTrees, Invariants) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const int rout = GetParam();
    auto base = random_tree(rout, 40, seed);
    ASSERT_EQ(radii(base).outer, rout);
    ASSERT_LE(base.vertex_count(), 40u);
    EXPECT_EQ(base, random_tree(rout, 40, seed));

    for (int l : {1, 2, 3}) {
      auto aug = spherical_augmentation(base, l);
      const auto& full = aug.full;
      auto r = radii(full);
      EXPECT_TRUE(r.spherical);
      EXPECT_EQ(r.outer, rout + l);

      std::size_t total = 0;
      for (const auto& shell : full.shells()) total += shell.size();
      EXPECT_EQ(total, full.vertex_count());

      for (VertexId v = 0; v < full.vertex_count(); ++v) {
        if (v == full.root()) continue;
        int closer = 0;
        for (VertexId y : full.neighbors(v)) closer += full.norm(y) == full.norm(v) - 1;
        EXPECT_EQ(closer, 1);
      }
      for (VertexId v = 0; v < base.vertex_count(); ++v) {
        EXPECT_EQ(full.parent(v), base.parent(v));
        EXPECT_EQ(full.norm(v), base.norm(v));
        EXPECT_TRUE(aug.is_original(v));
      }
      for (VertexId v = base.vertex_count(); v < full.vertex_count(); ++v)
        EXPECT_FALSE(aug.is_original(v));
      EXPECT_EQ(aug.inner_layer, full.shell(rout + l - 1));
      EXPECT_EQ(aug.outer_layer, full.shell(rout + l));
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Radius, RandomTrees, ::testing::Range(1, 7));

}  // namespace
