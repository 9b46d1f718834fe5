#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace btristd;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Matrix m(r, c);
  for (double& v : m.data()) v = n(rng);
  return m;
}

}  // namespace

TEST(SliceSequence, PairOneTwo) {
  std::mt19937_64 rng(1);
  const auto t = oracle::random_tensor({4, 4, 3, 5}, rng);
  const auto slices = slice_sequence(t, {0, 1});
  ASSERT_EQ(slices.size(), 15u);
  for (std::size_t p = 0; p < 5; ++p)
    for (std::size_t s = 0; s < 3; ++s)
      for (std::size_t j = 0; j < 4; ++j)
        for (std::size_t i = 0; i < 4; ++i) ASSERT_EQ(slices[s + 3 * p](i, j), t(i, j, s, p));
}

TEST(SliceSequence, MixedPairAndReassembly) {
  std::mt19937_64 rng(2);
  const auto t = oracle::random_tensor({2, 3, 4, 5}, rng);
  const auto slices = slice_sequence(t, {1, 3});
  ASSERT_EQ(slices.size(), 8u);
  ASSERT_EQ(slices[0].rows(), 3u);
  ASSERT_EQ(slices[0].cols(), 5u);
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t p = 0; p < 5; ++p)
        for (std::size_t j = 0; j < 3; ++j) ASSERT_EQ(slices[i + 2 * k](j, p), t(i, j, k, p));
}

TEST(SliceSequence, SingleSlice) {
  const DenseTensor t({2, 2, 1, 1}, std::vector<double>{1, 2, 3, 4});
  const auto slices = slice_sequence(t, {0, 1});
  ASSERT_EQ(slices.size(), 1u);
  EXPECT_EQ(slices[0], Matrix(2, 2, std::vector<double>{1, 2, 3, 4}));
  EXPECT_THROW(slice_sequence(t, {1, 1}), Error);
  EXPECT_THROW(slice_sequence(t, {2, 1}), Error);
}

TEST(EnergyRatio, KnownValues) {
  Matrix r1(3, 2);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) r1(i, j) = (i + 1.0) * (j + 2.0);
  EXPECT_NEAR(energy_ratio(r1), 1.0, 1e-14);
  EXPECT_NEAR(energy_ratio(Matrix::identity(4)), 0.25, 1e-14);
  Matrix rot(2, 2, std::vector<double>{0.6, 0.8, -0.8, 0.6});
  EXPECT_NEAR(energy_ratio(rot), 0.5, 1e-14);
  EXPECT_EQ(energy_ratio(Matrix(3, 3)), 0.0);
}

TEST(EnergyRatio, SvdOracleAndOrthogonalInvariance) {
  std::mt19937_64 rng(3);
  const auto m = random_matrix(5, 4, rng);
  // Direct oracle: sigma_1^2 is the top eigenvalue of m^T m (power iteration).
  const Matrix g = matmul(transpose(m), m);
  std::vector<double> v(4, 1.0);
  double lambda = 0.0;
  for (int it = 0; it < 2000; ++it) {
    std::vector<double> w(4, 0.0);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) w[i] += g(i, j) * v[j];
    double n = 0.0;
    for (double x : w) n += x * x;
    n = std::sqrt(n);
    lambda = n;
    for (std::size_t i = 0; i < 4; ++i) v[i] = w[i] / n;
  }
  double trace = 0.0;
  for (std::size_t i = 0; i < 4; ++i) trace += g(i, i);
  EXPECT_NEAR(energy_ratio(m), lambda / trace, 1e-10);

  const auto q = svd(random_matrix(5, 5, rng)).U;
  EXPECT_NEAR(energy_ratio(matmul(q, m)), energy_ratio(m), 1e-12);
}

TEST(DirectionConsistency, KnownValues) {
  std::mt19937_64 rng(4);
  const auto m = random_matrix(4, 3, rng);
  Matrix scaled = m;
  for (double& v : scaled.data()) v *= 2.5;
  EXPECT_NEAR(direction_consistency(m, scaled).value, 1.0, 1e-12);
  EXPECT_NEAR(direction_consistency(m, m, Side::Right).value, 1.0, 1e-12);
  Matrix neg = m;
  for (double& v : neg.data()) v = -v;
  EXPECT_NEAR(direction_consistency(m, neg).value, 1.0, 1e-12);

  Matrix a(2, 2), b(2, 2);
  a(0, 0) = 1.0;
  a(0, 1) = 2.0;
  b(1, 0) = 3.0;
  b(1, 1) = 1.0;
  EXPECT_NEAR(direction_consistency(a, b).value, 0.0, 1e-14);
  EXPECT_FALSE(direction_consistency(a, b).unstable);
  EXPECT_TRUE(direction_consistency(Matrix::identity(3), Matrix::identity(3)).unstable);
  EXPECT_THROW(direction_consistency(Matrix(2, 2), a), Error);
  EXPECT_THROW(direction_consistency(Matrix(2, 3, 1.0), a), Error);
}

TEST(DirectionConsistency, SvdOracle) {
  std::mt19937_64 rng(5);
  const auto m1 = random_matrix(5, 3, rng), m2 = random_matrix(5, 3, rng);
  // Leading left vector via power iteration on m m^T.
  auto lead = [](const Matrix& m) {
    const Matrix g = matmul(m, transpose(m));
    std::vector<double> v(g.rows(), 1.0);
    for (int it = 0; it < 5000; ++it) {
      std::vector<double> w(v.size(), 0.0);
      for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) w[i] += g(i, j) * v[j];
      double n = 0.0;
      for (double x : w) n += x * x;
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / std::sqrt(n);
    }
    return v;
  };
  const auto u1 = lead(m1), u2 = lead(m2);
  double c = 0.0;
  for (std::size_t i = 0; i < u1.size(); ++i) c += u1[i] * u2[i];
  EXPECT_NEAR(direction_consistency(m1, m2).value, std::abs(c), 1e-8);
}

TEST(Analyze, SeparableTensor) {
  std::mt19937_64 rng(6);
  const auto mm = oracle::random_tensor({4, 3}, rng, 0.1, 1.0);
  const auto nn = oracle::random_tensor({3, 5}, rng, 0.1, 1.0);
  const std::vector<std::size_t> none;
  const auto t = contract(mm, nn, none, none);
  const auto rep = analyze(t);
  ASSERT_EQ(rep.pairs.size(), 6u);
  const auto& p12 = rep.at({0, 1});
  const double expect = energy_ratio(unfold(mm, {{0}, {1}}));
  ASSERT_EQ(p12.energy_ratios.size(), 15u);
  ASSERT_EQ(p12.direction_cos.size(), 14u);
  for (double e : p12.energy_ratios) EXPECT_NEAR(e, expect, 1e-12);
  for (double c : p12.direction_cos) EXPECT_NEAR(c, 1.0, 1e-12);
  EXPECT_NEAR(p12.mean_cos, 1.0, 1e-12);
}

TEST(Analyze, DegenerateSlicesExcluded) {
  DenseTensor t({2, 2, 2, 1});
  t(0, 0, 1, 0) = 1.0;
  const auto rep = analyze(t).at({0, 1});
  EXPECT_EQ(rep.energy_ratios[0], 0.0);
  EXPECT_EQ(rep.energy_ratios[1], 1.0);
  EXPECT_EQ(rep.mean_energy, 1.0);
  EXPECT_EQ(rep.direction_cos[0], 0.0);
  EXPECT_EQ(rep.mean_cos, 0.0);
}

TEST(Analyze, PermutationConsistent) {
  std::mt19937_64 rng(7);
  const auto t = oracle::random_tensor({3, 4, 2, 5}, rng);
  // Swapping modes 2 and 3 maps pair (0,1) to (0,1) with the remaining modes
  // reordered, so compare a pair whose remaining modes keep their order.
  const std::vector<std::size_t> perm{1, 0, 2, 3};
  const auto tp = permute(t, perm);
  const auto a = analyze(t).at({0, 2});
  const auto b = analyze(tp).at({1, 2});
  EXPECT_EQ(a.energy_ratios.size(), b.energy_ratios.size());
  for (std::size_t k = 0; k < a.energy_ratios.size(); ++k) EXPECT_NEAR(a.energy_ratios[k], b.energy_ratios[k], 1e-12);
  for (std::size_t k = 0; k < a.direction_cos.size(); ++k) EXPECT_NEAR(a.direction_cos[k], b.direction_cos[k], 1e-10);
}

TEST(Analyze, NoiseHasNoDominantPair) {
  std::mt19937_64 rng(8);
  const auto t = oracle::random_tensor({8, 8, 6, 9}, rng);
  const auto rep = analyze(t);
  double lo = 1.0, hi = 0.0;
  for (const auto& p : rep.pairs) {
    lo = std::min(lo, p.mean_energy);
    hi = std::max(hi, p.mean_energy);
    for (double e : p.energy_ratios) {
      EXPECT_GT(e, 0.0);
      EXPECT_LE(e, 1.0 + 1e-12);
    }
    for (double c : p.direction_cos) {
      EXPECT_GE(c, 0.0);
      EXPECT_LE(c, 1.0);
    }
  }
  EXPECT_LT(hi, 2.0 * lo);
}
