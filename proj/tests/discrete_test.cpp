#include "ent/discrete.hpp"
#include "group_catalogue.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>

using namespace ent;
using namespace ent::discrete;
using blocks::Term;
using finabel::FiniteAbelianGroup;

namespace ent::discrete {
void PrintTo(const Entry& e, std::ostream* os) {
  *os << "@" << e.at << "(";
  for (std::size_t i = 0; i < e.value.size(); ++i) *os << (i ? "," : "") << e.value[i];
  *os << ")";
}
}  // namespace ent::discrete

namespace {

BlockSequence z_blocks(Coeff d, std::size_t k = 1) {
  return BlockSequence(blocks::IndexSet::naturals(), {std::vector<Coeff>(k, d)});
}

BandedMap single(std::vector<Term> terms) { return BandedMap{1, {{terms}}}; }

Supported e(std::int64_t i, Coeff v = 1) { return {{i, {v}}}; }

/// Naive evaluation with a map from (index, component) to value.
using Sparse = std::map<std::pair<std::int64_t, std::size_t>, Coeff>;

Sparse naive_apply(const BlockSequence& b, const BandedMap& m, const Sparse& x) {
  Sparse y;
  for (const auto& [key, v] : x)
    for (const auto& t : m.at(key.first, key.second)) {
      const std::int64_t j = key.first + t.offset;
      if (!b.index_set().contains(j)) continue;
      const Coeff d = b.modulus(j, t.component);
      auto& slot = y[{j, t.component}];
      slot = (slot + v * t.coeff) % d;
    }
  std::erase_if(y, [](const auto& kv) { return kv.second == 0; });
  return y;
}

Sparse to_sparse(const BlockSequence& b, const Supported& x) {
  Sparse s;
  for (const auto& en : x)
    for (std::size_t c = 0; c < en.value.size(); ++c)
      if (en.value[c] % b.modulus(en.at, c)) s[{en.at, c}] = en.value[c] % b.modulus(en.at, c);
  return s;
}

/// |T_n| by enumerating the span of phi^k(f) for k < n on a fixed window.
Integer oracle_order(const BlockSequence& b, const BandedMap& m, const std::vector<Supported>& gens, std::size_t n,
                     std::int64_t width) {
  Window w{0, width};
  FiniteAbelianGroup a = b.window_group(w);
  std::vector<Element> all;
  for (const auto& g : gens) {
    Sparse x = to_sparse(b, g);
    for (std::size_t k = 0; k < n; ++k) {
      Element v(a.rank(), 0);
      for (const auto& [key, val] : x) {
        EXPECT_LT(key.first, width);
        v[b.coord(w, key.first, key.second)] = val;
      }
      all.push_back(v);
      x = naive_apply(b, m, x);
    }
  }
  return Integer(oracle::span(a, all).size());
}

}  // namespace

TEST(LFGroup, Construction) {
  auto g = locally_finite_group(z_blocks(2));
  EXPECT_TRUE(g.is_abelian());
  auto alt = locally_finite_group(BlockSequence(blocks::IndexSet::naturals(), {{2}, {3}}));
  EXPECT_EQ(alt.blocks().period(), 2u);
  auto s3 = catalogue::symmetric(3);
  auto na = locally_finite_group(blocks::IndexSet::naturals(), s3.group);
  EXPECT_FALSE(na.is_abelian());
  EXPECT_THROW(BlockSequence(blocks::IndexSet::naturals(), {}), ValidationError);
  EXPECT_THROW(BlockSequence(blocks::IndexSet::naturals(), {{0}}), ValidationError);
}

TEST(BandedEndo, Validation) {
  auto g = locally_finite_group(z_blocks(2));
  EXPECT_NO_THROW(banded_endo(g, single({{1, 0, 1}})));
  EXPECT_NO_THROW(banded_endo(g, single({})));
  auto sum_rule = banded_endo(g, single({{0, 0, 1}, {1, 0, 1}}));
  EXPECT_EQ(evaluate(sum_rule, e(3)), (Supported{{3, {1}}, {4, {1}}}));
  // Z/2 -> Z/4 with coefficient 1 is ill-defined
  auto mixed = locally_finite_group(BlockSequence(blocks::IndexSet::naturals(), {{2}, {4}}));
  EXPECT_THROW(banded_endo(mixed, BandedMap{2, {{{{1, 0, 1}}}, {{{1, 0, 2}}}}}), ValidationError);
  EXPECT_NO_THROW(banded_endo(mixed, BandedMap{2, {{{{1, 0, 2}}}, {{{1, 0, 1}}}}}));
  EXPECT_THROW(banded_endo(g, BandedMap{1, {{{{0, 3, 1}}}}}), ValidationError);
}

TEST(Trajectory, ShiftZeroIdentity) {
  auto g = locally_finite_group(z_blocks(2));
  auto beta = banded_endo(g, single({{1, 0, 1}}));
  auto t3 = trajectory(beta, {e(0)}, 3);
  EXPECT_EQ(t3.sub.order(), 8);
  EXPECT_EQ(t3.sub.order(), oracle_order(g.blocks(), beta.map(), {e(0)}, 3, 4));
  auto zero = banded_endo(g, single({}));
  EXPECT_EQ(trajectory(zero, {e(0)}, 5).sub.order(), 2);
  auto id = banded_endo(g, blocks::identity_map(g.blocks()));
  EXPECT_EQ(trajectory(id, {e(0), e(2)}, 6).sub.order(), 4);
}

TEST(TrajectoryLimits, SpecCases) {
  auto g = locally_finite_group(z_blocks(2));
  auto beta = banded_endo(g, single({{1, 0, 1}}));
  auto r = trajectory_limits(beta, {e(0)});
  ASSERT_TRUE(r.certified());
  EXPECT_EQ(r.alpha, 2);
  EXPECT_EQ(r.t_mod_phi_t, 2);
  EXPECT_EQ(r.ker_cap_t, 1);
  for (std::size_t n = 1; n <= 10; ++n)
    EXPECT_EQ(trajectory(beta, {e(0)}, n).sub.order(), oracle_order(g.blocks(), beta.map(), {e(0)}, n, 12));

  auto zero = banded_endo(g, single({}));
  auto z = trajectory_limits(zero, {e(0)});
  ASSERT_TRUE(z.certified());
  EXPECT_EQ(z.alpha, 1);
  EXPECT_EQ(z.t_mod_phi_t, 2);
  EXPECT_EQ(z.ker_cap_t, 2);

  auto id = banded_endo(g, blocks::identity_map(g.blocks()));
  auto i = trajectory_limits(id, {e(0)});
  ASSERT_TRUE(i.certified());
  EXPECT_EQ(i.alpha, 1);
  EXPECT_EQ(i.t_mod_phi_t, 1);
  EXPECT_EQ(i.ker_cap_t, 1);
}

TEST(TrajectoryLimits, BudgetGivesInconclusive) {
  auto g = locally_finite_group(z_blocks(2));
  auto beta = banded_endo(g, single({{1, 0, 1}}));
  auto r = trajectory_limits(beta, {e(0)}, StabilizationPolicy{2, 3});
  EXPECT_EQ(r.status, Status::inconclusive);
  auto res = algebraic_entropy(beta, {e(0)}, AlgMethod::limit, StabilizationPolicy{2, 3});
  EXPECT_FALSE(res.certified());
  EXPECT_EQ(res.budget, 2u);
}

TEST(AlgebraicEntropy, SpecCases) {
  auto g = locally_finite_group(z_blocks(2));
  auto zero = banded_endo(g, single({}));
  EXPECT_EQ(algebraic_entropy(zero, {e(0)}, AlgMethod::limitfree).value, EntropyValue::zero());
  auto id = banded_endo(g, blocks::identity_map(g.blocks()));
  EXPECT_EQ(algebraic_entropy(id, {e(0)}, AlgMethod::limit).value, EntropyValue::zero());
  auto beta = banded_endo(g, single({{1, 0, 1}}));
  for (auto m : {AlgMethod::limit, AlgMethod::limitfree}) {
    auto r = algebraic_entropy(beta, {e(0)}, m);
    ASSERT_TRUE(r.certified());
    EXPECT_EQ(r.value, EntropyValue::log_of(Integer(2)));
  }
  EXPECT_EQ(algebraic_entropy(beta, {}, AlgMethod::limit).value, EntropyValue::zero());
}

TEST(HAlg, Families) {
  auto g = locally_finite_group(z_blocks(2));
  auto beta = banded_endo(g, single({{1, 0, 1}}));
  // every finite F gives log 2 for the Bernoulli shift over Z/2
  auto r = h_alg(beta, {{e(0)}, {e(0), e(1)}});
  ASSERT_TRUE(r.certified());
  EXPECT_EQ(r.value, EntropyValue::log_of(Integer(2)));
  auto r2 = trajectory_limits(beta, {e(0), e(1)});
  EXPECT_EQ(r2.alpha, 2);
  EXPECT_EQ(r2.orders[0], 4);
  auto zero = banded_endo(g, single({}));
  EXPECT_EQ(h_alg(zero, {{e(0)}, {e(1), e(4)}}).value, EntropyValue::zero());
  auto id = banded_endo(g, blocks::identity_map(g.blocks()));
  EXPECT_EQ(h_alg(id, {{e(0)}, {e(1), e(4)}}).value, EntropyValue::zero());
  // shift on Z/3 x Z/3 blocks: log 9
  auto g9 = locally_finite_group(z_blocks(3, 2));
  auto beta9 = banded_endo(g9, blocks::shift_map(g9.blocks(), 1));
  auto r9 = h_alg(beta9, {{{{0, {1, 0}}}}, {{{0, {1, 0}}}, {{0, {0, 1}}}}});
  EXPECT_EQ(r9.value, EntropyValue::log_of(Integer(9)));
}

TEST(YuzvinskiGap, ZeroShiftIdentity) {
  for (Coeff m : {2, 3, 4, 8, 16}) {
    auto g = locally_finite_group(z_blocks(m));
    auto zero = banded_endo(g, single({}));
    EXPECT_EQ(yuzvinski_gap(zero, {e(0)}).value, EntropyValue::log_of(Integer(m)));
    EXPECT_EQ(algebraic_entropy(zero, {e(0)}, AlgMethod::limitfree).value, EntropyValue::zero());
  }
  auto g = locally_finite_group(z_blocks(2));
  auto beta = banded_endo(g, single({{1, 0, 1}}));
  EXPECT_EQ(yuzvinski_gap(beta, {e(0)}).value, algebraic_entropy(beta, {e(0)}, AlgMethod::limit).value);
  auto id = banded_endo(g, blocks::identity_map(g.blocks()));
  EXPECT_EQ(yuzvinski_gap(id, {e(0)}).value, EntropyValue::zero());
}

TEST(TrajectoryProperties, RandomBandedAgainstEnumeration) {
  std::mt19937_64 rng(7);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const Coeff d = std::vector<Coeff>{2, 3, 4}[rng() % 3];
    const std::size_t k = 1 + rng() % 2;
    auto g = locally_finite_group(z_blocks(d, k));
    BandedMap m{1, {std::vector<std::vector<Term>>(k)}};
    for (std::size_t c = 0; c < k; ++c)
      for (std::int64_t o = 0; o <= 1; ++o)
        for (std::size_t c2 = 0; c2 < k; ++c2)
          if (rng() % 2) m.terms[0][c].push_back({o, c2, static_cast<Coeff>(rng() % static_cast<std::uint64_t>(d))});
    auto phi = banded_endo(g, m);
    std::vector<Supported> gens;
    Element v(k);
    for (auto& x : v) x = static_cast<Coeff>(rng() % static_cast<std::uint64_t>(d));
    gens.push_back({{0, v}});
    auto r = trajectory_limits(phi, gens, StabilizationPolicy{12, 3});
    for (std::size_t n = 0; n + 1 < r.orders.size(); ++n) {
      EXPECT_EQ(r.orders[n + 1], r.alphas[n] * r.orders[n]);
      EXPECT_EQ(r.f_indices[n], r.alphas[n] * r.kernel_orders[n]);
      if (n + 1 < r.alphas.size()) EXPECT_EQ(r.alphas[n] % r.alphas[n + 1], 0);
    }
    const std::size_t width = 8;
    for (std::size_t n = 1; n <= std::min<std::size_t>(r.orders.size(), 5); ++n) {
      if (g.blocks().window_group({0, static_cast<std::int64_t>(width)}).order() > 70000) break;
      EXPECT_EQ(r.orders[n - 1], oracle_order(g.blocks(), phi.map(), gens, n, width));
      ++checked;
    }
    if (r.certified()) {
      EXPECT_EQ(entropy_from(r, AlgMethod::limit, {}).value, entropy_from(r, AlgMethod::limitfree, {}).value);
      if (r.ker_cap_t == 1) EXPECT_EQ(EntropyValue::log_of(r.t_mod_phi_t), EntropyValue::log_of(r.alpha));
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(CayleyBlocks, ShiftOfS3) {
  auto s3 = catalogue::symmetric(3);
  auto g = locally_finite_group(blocks::IndexSet::naturals(), s3.group);
  std::vector<std::size_t> id(6);
  std::iota(id.begin(), id.end(), 0);
  auto shift = banded_endo(g, {BlockEndo{1, id}});
  std::vector<Supported> f;
  for (std::size_t x = 0; x < 6; ++x) f.push_back({{0, {static_cast<Coeff>(x)}}});
  auto r = trajectory_limits(shift, f);
  ASSERT_TRUE(r.certified());
  EXPECT_EQ(r.alpha, 6);
  EXPECT_EQ(r.ker_cap_t, 1);
  EXPECT_EQ(trajectory_order(shift, f, 3), 216);

  auto zero = banded_endo(g, std::vector<BlockEndo>{});
  auto z = trajectory_limits(zero, f);
  ASSERT_TRUE(z.certified());
  EXPECT_EQ(z.alpha, 1);
  EXPECT_EQ(z.t_mod_phi_t, 6);
  EXPECT_EQ(z.ker_cap_t, 6);
  EXPECT_EQ(yuzvinski_gap(zero, f).value, EntropyValue::log_of(Integer(6)));
  EXPECT_EQ(algebraic_entropy(zero, f, AlgMethod::limitfree).value, EntropyValue::zero());
}

TEST(CayleyBlocks, NormalityAndValidation) {
  auto s3 = catalogue::symmetric(3);
  auto g = locally_finite_group(blocks::IndexSet::naturals(), s3.group);
  // conjugation by (0 1 2) at offset 0
  const auto c = s3.index_of(catalogue::cycle(3, {0, 1, 2}));
  std::vector<std::size_t> conj(6);
  for (std::size_t x = 0; x < 6; ++x)
    conj[x] = s3.group.multiply(s3.group.multiply(c, x), s3.group.inverse(c));
  auto phi = banded_endo(g, {BlockEndo{0, conj}});
  const auto t = static_cast<Coeff>(s3.index_of(catalogue::cycle(3, {0, 1})));
  EXPECT_THROW(trajectory_limits(phi, {{{0, {t}}}}), gengroup::NormalityError);

  std::vector<std::size_t> id(6);
  std::iota(id.begin(), id.end(), 0);
  EXPECT_THROW(banded_endo(g, {BlockEndo{0, id}, BlockEndo{1, id}}), ValidationError);
  std::vector<std::size_t> bad(6, 1);
  EXPECT_THROW(banded_endo(g, {BlockEndo{0, bad}}), ValidationError);
}
