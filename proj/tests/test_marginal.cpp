#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "jmpoly/marginal.hpp"

using namespace jmpoly;

TEST(UniformBox, Examples) {
  EXPECT_NEAR(uniform_box_moments({{0.0, 1.0}}, 4)(MultiIndex{2}), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(uniform_box_moments({{-1.0, 1.0}}, 4)(MultiIndex{1}), 0.0, 1e-15);
  EXPECT_NEAR(uniform_box_moments({{0.0, 1.0}, {0.0, 1.0}}, 4)(MultiIndex{1, 1}), 0.25, 1e-15);
  EXPECT_THROW(uniform_box_moments({{1.0, 1.0}}, 2), std::exception);
}

TEST(UniformBox, FactorisesAndIsComplete) {
  const auto g = uniform_box_moments({{0.0, 2.0}, {-1.0, 3.0}}, 6);
  const auto g1 = uniform_box_moments({{0.0, 2.0}}, 6);
  const auto g2 = uniform_box_moments({{-1.0, 3.0}}, 6);
  EXPECT_EQ(g.values().size(), 28u);
  for (const auto& [beta, v] : g.values()) {
    EXPECT_NEAR(v, g1(MultiIndex{beta[0]}) * g2(MultiIndex{beta[1]}), 1e-12);
  }
  EXPECT_DOUBLE_EQ(g(MultiIndex{0, 0}), 1.0);
  EXPECT_THROW(g(MultiIndex{4, 3}), std::out_of_range);
}

TEST(UniformSimplex, Examples) {
  const auto g = uniform_simplex_moments(2, 4);
  EXPECT_NEAR(g(MultiIndex{1, 0}), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(g(MultiIndex{1, 1}), 1.0 / 12.0, 1e-15);
  for (std::size_t p = 1; p <= 3; ++p) EXPECT_DOUBLE_EQ(uniform_simplex_moments(p, 2)(MultiIndex(p)), 1.0);
}

TEST(ExplicitMoments, Examples) {
  const auto box = uniform_box_moments({{0.0, 1.0}}, 4);
  const auto wrapped = explicit_moments(box.values(), 1, 4);
  for (const auto& [beta, v] : box.values()) EXPECT_EQ(wrapped(beta), v);

  auto missing = box.values();
  missing.erase(MultiIndex{3});
  EXPECT_THROW(explicit_moments(missing, 1, 4), std::exception);

  auto heavy = box.values();
  heavy[MultiIndex{0}] = 2.0;
  EXPECT_THROW(explicit_moments(heavy, 1, 4), std::exception);
}

TEST(ExplicitMoments, CsvRoundTrip) {
  std::istringstream in("# beta,value\n0,1\n1,0.5\n\n2,0.3333333333333333\n");
  const auto table = read_moment_csv(in, 1);
  const auto g = explicit_moments(table, 1, 2);
  EXPECT_DOUBLE_EQ(g(MultiIndex{1}), 0.5);
  std::istringstream bad("0,1,2\n");
  EXPECT_THROW(read_moment_csv(bad, 1), std::invalid_argument);
  std::istringstream headed("beta1,value\n0,1\n1,1e-3\n");
  EXPECT_DOUBLE_EQ(read_moment_csv(headed, 1).at(MultiIndex{1}), 1e-3);
  std::istringstream late("0,1\nbeta1,value\n");
  EXPECT_THROW(read_moment_csv(late, 1), std::invalid_argument);
}

namespace {

void expect_hankel_psd(const MarginalMoments& g, std::size_t p) {
  for (std::size_t j = 0; j < p; ++j) {
    for (int d = 0; d <= 4; ++d) {
      Eigen::MatrixXd h(d + 1, d + 1);
      for (int a = 0; a <= d; ++a) {
        for (int b = 0; b <= d; ++b) {
          MultiIndex beta(p);
          beta[j] = a + b;
          h(a, b) = g(beta);
        }
      }
      EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues().minCoeff(), -1e-12);
    }
  }
}

}  // namespace

TEST(MarginalProperty, HankelMatricesArePsd) {
  expect_hankel_psd(uniform_box_moments({{0.0, 1.0}}, 8), 1);
  expect_hankel_psd(uniform_box_moments({{-2.0, 1.0}, {0.5, 4.0}}, 8), 2);
  expect_hankel_psd(uniform_simplex_moments(2, 8), 2);
  expect_hankel_psd(uniform_simplex_moments(3, 8), 3);
}

TEST(MarginalProperty, UniformBoxAgreesWithMonteCarlo) {
  const std::size_t p = 2;
  const auto g = uniform_box_moments({{0.0, 1.0}, {0.0, 1.0}}, 4);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int samples = 1000000;
  const auto basis = enumerate_basis(0, p, 4);
  std::vector<double> sum(basis.size(), 0.0), sq(basis.size(), 0.0);
  for (int s = 0; s < samples; ++s) {
    const double y1 = unit(rng), y2 = unit(rng);
    for (std::size_t b = 0; b < basis.size(); ++b) {
      const double v = std::pow(y1, basis[b][0]) * std::pow(y2, basis[b][1]);
      sum[b] += v;
      sq[b] += v * v;
    }
  }
  for (std::size_t b = 0; b < basis.size(); ++b) {
    const double mean = sum[b] / samples;
    const double se = std::sqrt(std::max(0.0, sq[b] / samples - mean * mean) / samples);
    EXPECT_LE(std::abs(mean - g(basis[b])), 3.0 * se + 1e-15) << "beta index " << b;
  }
}
