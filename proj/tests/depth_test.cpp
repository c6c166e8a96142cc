#include "ent/depth.hpp"

#include <gtest/gtest.h>

using namespace ent;
using namespace ent::depth;
using blocks::BlockSequence;
using blocks::IndexSet;
using finabel::Element;
using profinite::pro_group;

namespace {

ProGroup z_product(std::vector<Coeff> block) { return pro_group(BlockSequence(IndexSet::integers(), {block})); }

CylinderSubgroup pinned(const ProGroup& k, std::int64_t lo, std::int64_t hi) {
  return profinite::cylinder(k, Window{lo, hi}, std::vector<Element>{});
}

RowFiniteEndo left_shift(const ProGroup& k) {
  return profinite::rowfinite_endo(k, blocks::shift_map(k.blocks(), 1));
}

}  // namespace

TEST(Invert, Shifts) {
  auto k = z_product({3});
  auto inv = invert(left_shift(k));
  EXPECT_EQ(inv.map(), blocks::shift_map(k.blocks(), -1));
  EXPECT_EQ(invert(profinite::identity_endo(k)), profinite::identity_endo(k));
  auto k4 = z_product({2, 2});
  EXPECT_EQ(invert(left_shift(k4)).map(), blocks::shift_map(k4.blocks(), -1));
}

TEST(Invert, NonBandedFails) {
  auto k = z_product({2});
  auto sum = profinite::rowfinite_endo(k, BandedMap{1, {{{{0, 0, 1}, {1, 0, 1}}}}});
  EXPECT_THROW(invert(sum), InversionError);
  auto zero = profinite::rowfinite_endo(k, blocks::zero_map(k.blocks()));
  EXPECT_THROW(invert(zero), InversionError);
  auto kn = pro_group(BlockSequence(IndexSet::naturals(), {{2}}));
  EXPECT_THROW(invert(profinite::identity_endo(kn)), InversionError);
}

TEST(Invert, BandedButNotShift) {
  // x_i -> x_i + x_{i+1} on (Z/3)^Z mixes with a second coordinate to become
  // invertible: (a, b)_i -> (a_i + b_{i+1}, b_i)
  auto k = z_product({3, 3});
  auto psi = profinite::rowfinite_endo(k, BandedMap{1, {{{{0, 0, 1}, {1, 1, 1}}, {{0, 1, 1}}}}});
  auto inv = invert(psi);
  EXPECT_EQ(inv.map(), (BandedMap{1, {{{{0, 0, 1}, {1, 1, 2}}, {{0, 1, 1}}}}}));
}

TEST(Invert, FiniteGroup) {
  auto k = pro_group(BlockSequence(IndexSet::finite(3), {{2}}));
  BandedMap cyc{3, {{{{1, 0, 1}}}, {{{1, 0, 1}}}, {{{-2, 0, 1}}}}};
  auto psi = profinite::rowfinite_endo(k, cyc);
  auto inv = invert(psi);
  EXPECT_TRUE(detail::is_identity_band(k.blocks(), profinite::compose(psi, inv).map()));
  EXPECT_EQ(inv.map(), (BandedMap{3, {{{{2, 0, 1}}}, {{{-1, 0, 1}}}, {{{-1, 0, 1}}}}}));
  auto k2 = z_product({2});
  EXPECT_NE(antistable_check(automorphism(left_shift(k2)), pinned(k2, 0, 1)).verdict, Verdict::unknown);
}

TEST(Antistable, Examples) {
  auto k = z_product({3});
  auto a = automorphism(left_shift(k));
  auto cert = antistable_check(a, pinned(k, 0, 1));
  EXPECT_EQ(cert.verdict, Verdict::antistable) << cert.reason;
  auto id = automorphism(profinite::identity_endo(k));
  auto not_cert = antistable_check(id, pinned(k, 0, 1));
  EXPECT_EQ(not_cert.verdict, Verdict::not_antistable) << not_cert.reason;
  auto kf = pro_group(BlockSequence(IndexSet::finite(2), {{3}}));
  auto idf = automorphism(profinite::identity_endo(kf));
  EXPECT_EQ(antistable_check(idf, pinned(kf, 0, 2)).verdict, Verdict::antistable);
  EXPECT_EQ(antistable_check(idf, pinned(kf, 0, 1)).verdict, Verdict::not_antistable);
  // the diagonal {x_0 = x_1} contains the constant sequences, which the shift fixes
  auto k2 = z_product({2});
  auto diag = profinite::cylinder(k2, Window{0, 2}, std::vector<Element>{{1, 1}});
  EXPECT_NE(antistable_check(automorphism(left_shift(k2)), diag).verdict, Verdict::antistable);
}

TEST(BaseSequence, ShiftPinsGrowingWindows) {
  auto k = z_product({3});
  auto a = automorphism(left_shift(k));
  auto base = base_sequence(a, pinned(k, 0, 1), 4);
  ASSERT_EQ(base.size(), 4u);
  for (std::int64_t n = 1; n <= 4; ++n)
    EXPECT_TRUE(profinite::same_cylinder(k, base[n - 1], pinned(k, -(n - 1), n))) << n;
  auto id = automorphism(profinite::identity_endo(k));
  for (const auto& un : base_sequence(id, pinned(k, 0, 1), 3)) EXPECT_TRUE(profinite::same_cylinder(k, un, pinned(k, 0, 1)));
  EXPECT_EQ(base_sequence(a, pinned(k, 0, 1), 1).size(), 1u);
}

TEST(PlusMinus, Shift) {
  auto k = z_product({3});
  auto a = automorphism(left_shift(k));
  auto pm = plus_minus(a, pinned(k, 0, 1));
  EXPECT_FALSE(pm.minus.open.has_value());
  EXPECT_FALSE(pm.plus.open.has_value());
  // C_n(psi, U) pins [0, n), C_n(psi^{-1}, U) pins (-n, 0]
  EXPECT_TRUE(profinite::same_cylinder(k, pm.minus.report.stages[2], pinned(k, 0, 3)));
  EXPECT_TRUE(profinite::same_cylinder(k, pm.plus.report.stages[2], pinned(k, -2, 1)));
  EXPECT_EQ(pm.minus.step_index, 3);
  EXPECT_EQ(pm.plus.step_index, 3);
  auto id = automorphism(profinite::identity_endo(k));
  auto pid = plus_minus(id, pinned(k, 0, 1));
  ASSERT_TRUE(pid.minus.open && pid.plus.open);
  EXPECT_TRUE(profinite::same_cylinder(k, *pid.minus.open, pinned(k, 0, 1)));
  EXPECT_TRUE(profinite::same_cylinder(k, *pid.plus.open, pinned(k, 0, 1)));
}

TEST(DepthValue, Examples) {
  auto k3 = z_product({3});
  EXPECT_EQ(depth_value(automorphism(left_shift(k3)), pinned(k3, 0, 1)).value(), 3);
  auto k4 = z_product({2, 2});
  EXPECT_EQ(depth_value(automorphism(left_shift(k4)), pinned(k4, 0, 1)).value(), 4);
  auto kf = pro_group(BlockSequence(IndexSet::finite(2), {{3}}));
  EXPECT_EQ(depth_value(automorphism(profinite::identity_endo(kf)), pinned(kf, 0, 2)).value(), 1);
}

TEST(DepthReport, Examples) {
  auto k3 = z_product({3});
  auto r = depth_report(left_shift(k3), {pinned(k3, 0, 1), pinned(k3, 0, 2)});
  ASSERT_EQ(r.status, Status::certified) << r.note;
  EXPECT_EQ(*r.depth, 3);
  EXPECT_EQ(*r.depth_inverse, 3);
  EXPECT_TRUE(r.invariant);
  EXPECT_EQ(r.h_top.value, EntropyValue::log_of(Integer(3)));
  EXPECT_TRUE(r.h_top_is_log_depth);
  auto k2 = z_product({2});
  auto r2 = depth_report(left_shift(k2), {pinned(k2, 0, 1)});
  EXPECT_EQ(*r2.depth, 2);
  EXPECT_EQ(r2.h_top.value, EntropyValue::log_of(Integer(2)));
  auto kf = pro_group(BlockSequence(IndexSet::finite(2), {{3}}));
  auto rf = depth_report(profinite::identity_endo(kf), {pinned(kf, 0, 2)});
  EXPECT_EQ(*rf.depth, 1);
  EXPECT_EQ(rf.h_top.value, EntropyValue::zero());
  EXPECT_TRUE(rf.h_top_is_log_depth);
  auto none = depth_report(profinite::identity_endo(k3), {pinned(k3, 0, 1)});
  EXPECT_EQ(none.status, Status::hypothesis_failure);
}

TEST(DepthProperties, FullShifts) {
  for (auto block : std::vector<std::vector<Coeff>>{{2}, {3}, {4}, {2, 2}, {6}, {2, 3}}) {
    auto k = z_product(block);
    Integer size = 1;
    for (Coeff d : block) size *= d;
    for (std::int64_t dir : {1, -1, 2}) {
      auto psi = profinite::rowfinite_endo(k, blocks::shift_map(k.blocks(), dir));
      // {x_0 = 0} misses the odd coordinates under the square of the shift
      auto cands = dir == 2 ? std::vector<CylinderSubgroup>{pinned(k, 0, 2), pinned(k, -1, 1), pinned(k, 0, 3)}
                            : std::vector<CylinderSubgroup>{pinned(k, 0, 1), pinned(k, 0, 2), pinned(k, -1, 2)};
      auto r = depth_report(psi, cands, {}, 3, 2);
      ASSERT_EQ(r.status, Status::certified) << r.note;
      Integer expected = dir == 2 ? size * size : size;
      EXPECT_EQ(*r.depth, expected);
      EXPECT_EQ(*r.depth_inverse, expected);
      EXPECT_TRUE(r.invariant);
      for (const auto& c : r.candidates) {
        ASSERT_TRUE(c.depth.has_value());
        EXPECT_EQ(c.depth->via_plus, c.depth->via_minus);
      }
      EXPECT_TRUE(r.h_top_is_log_depth);
      EXPECT_TRUE(r.infinite_depth_above_one);
      // c_n(psi) = c_n(psi^{-1})
      for (std::size_t n = 1; n <= 4; ++n)
        EXPECT_EQ(profinite::index(profinite::cotrajectory(r.map.forward, cands[0], n)),
                  profinite::index(profinite::cotrajectory(r.map.backward, cands[0], n)));
    }
  }
}
