#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>

#include "minexp/cli/demo.hpp"
#include "minexp/prony.hpp"
#include "support/instances.hpp"

using namespace minexp;

namespace {

std::vector<Complex> line_samples(const ExponentialModel& m, const Point& delta, std::size_t count) {
  std::vector<Complex> out;
  for (std::size_t s = 0; s < count; ++s) {
    Point x = delta;
    for (auto& v : x) v *= static_cast<double>(s);
    out.push_back(evaluate(m, x));
  }
  return out;
}

std::size_t nearest(const std::vector<Complex>& v, Complex z) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (std::abs(v[k] - z) < std::abs(v[best] - z)) best = k;
  return best;
}

}  // namespace

TEST(DetectSparsity, ConstantSequence) {
  std::size_t calls = 0;
  const auto r = detect_sparsity([&](std::size_t) { ++calls; return Complex(3.0); }, 8);
  EXPECT_EQ(r.rank, 1u);
  EXPECT_EQ(calls, 3u);
}

TEST(DetectSparsity, FourTermsUseNineSamples) {
  const auto inst = minexp::testing::univariate_instance(4, 17);
  std::size_t calls = 0;
  const auto r = detect_sparsity(
      [&](std::size_t s) {
        ++calls;
        Complex v{};
        for (std::size_t j = 0; j < 4; ++j)
          v += inst.coefficients[j] * std::pow(inst.nodes[j], static_cast<double>(s));
        return v;
      },
      8);
  EXPECT_EQ(r.rank, 4u);
  EXPECT_EQ(calls, 9u);
}

TEST(DetectSparsity, ReferenceCollisionLine) {
  const auto m = cli::reference_model();
  std::size_t calls = 0;
  const auto r = detect_sparsity(
      [&](std::size_t s) {
        ++calls;
        const Point x = {0.03 * static_cast<double>(s), 0.0};
        return evaluate(m, x);
      },
      8);
  EXPECT_EQ(r.rank, 3u);
  EXPECT_EQ(calls, 7u);
}

TEST(DetectSparsity, GivesUpBeyondMaxTerms) {
  const auto inst = minexp::testing::univariate_instance(5, 3);
  auto supplier = [&](std::size_t s) {
    Complex v{};
    for (std::size_t j = 0; j < 5; ++j)
      v += inst.coefficients[j] * std::pow(inst.nodes[j], static_cast<double>(s));
    return v;
  };
  try {
    detect_sparsity(supplier, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSparsityUndetected);
  }
}

TEST(CertifyRank, NeedsOddLength) {
  const std::vector<Complex> v = {1.0, 1.0};
  EXPECT_THROW(certify_rank(v), Error);
  const std::vector<Complex> ok = {1.0, 2.0, 4.0};
  ASSERT_TRUE(certify_rank(ok).has_value());
  EXPECT_EQ(certify_rank(ok)->rank, 1u);
}

TEST(FitNodes, SingleTerm) {
  const double e = std::numbers::e;
  const std::vector<Complex> f = {2.0, 2.0 * e, 2.0 * e * e};
  for (auto method : {NodeMethod::kGeneralizedEig, NodeMethod::kHankelPolynomial}) {
    const auto nodes = fit_nodes(f, 1, method);
    ASSERT_EQ(nodes.size(), 1u);
    EXPECT_NEAR(std::abs(nodes[0] - e), 0.0, 1e-13);
  }
}

TEST(FitNodes, ReferenceBaseLine) {
  const auto f = line_samples(cli::reference_model(), {0.01, 0.01}, 8);
  const auto logs = take_logs(fit_nodes(f, 4), cli::reference_window());
  const std::vector<Complex> published = {{0.005, 0.03142}, {0.016, 0.5404}, {-0.004, 1.005},
                                          {-0.125, 0.3456}};
  for (auto p : published) {
    const Complex got = logs[nearest(logs, p)];
    EXPECT_NEAR(got.real(), p.real(), 5e-4 * std::abs(p.real()));
    EXPECT_NEAR(got.imag(), p.imag(), 5e-4 * std::abs(p.imag()));
  }
}

TEST(FitNodes, BothMethodsMatchPlantedNodes) {
  const auto inst = minexp::testing::univariate_instance(3, 8);
  for (auto method : {NodeMethod::kGeneralizedEig, NodeMethod::kHankelPolynomial}) {
    const auto nodes = fit_nodes(inst.samples, 3, method);
    for (auto z : inst.nodes) EXPECT_LT(std::abs(nodes[nearest(nodes, z)] - z), 1e-10);
  }
}

TEST(FitNodes, OverestimatedRankIsMismatch) {
  const auto inst = minexp::testing::univariate_instance(2, 9);
  std::vector<Complex> f(inst.samples.begin(), inst.samples.end());
  for (std::size_t s = f.size(); s < 6; ++s) {
    Complex v{};
    for (std::size_t j = 0; j < 2; ++j)
      v += inst.coefficients[j] * std::pow(inst.nodes[j], static_cast<double>(s));
    f.push_back(v);
  }
  for (auto method : {NodeMethod::kGeneralizedEig, NodeMethod::kHankelPolynomial}) {
    try {
      fit_nodes(f, 3, method);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kRankMismatch);
    }
  }
}

TEST(TakeLogs, Conventions) {
  const std::vector<Complex> nodes = {1.0, std::exp(Complex(0.005, 0.03142)), -1.0};
  const auto logs = take_logs(nodes);
  EXPECT_EQ(logs[0], Complex(0.0));
  EXPECT_NEAR(std::abs(logs[1] - Complex(0.005, 0.03142)), 0.0, 1e-15);
  EXPECT_NEAR(logs[2].imag(), std::numbers::pi, 1e-15);
  const std::vector<Complex> zero = {0.0};
  EXPECT_THROW(take_logs(zero), Error);
}

TEST(FitCoefficients, SingleUnitNode) {
  const std::vector<Complex> logs = {0.0};
  const std::vector<Complex> f = {5.0, 5.0};
  for (auto mode : {CoefficientMode::kLeastSquares, CoefficientMode::kSquare}) {
    const auto fit = fit_coefficients(logs, f, mode);
    EXPECT_NEAR(std::abs(fit.coefficients[0] - 5.0), 0.0, 1e-14);
  }
}

TEST(FitCoefficients, ReferenceFirstCoefficient) {
  const auto f = line_samples(cli::reference_model(), {0.01, 0.01}, 8);
  const auto fit = fit_univariate(f, 4, NodeMethod::kGeneralizedEig, CoefficientMode::kLeastSquares,
                                  cli::reference_window());
  const Complex want = std::polar(1.7, 2.0 * std::numbers::pi * 0.1);
  const Complex got = fit.coefficients[nearest(fit.logs, Complex(0.005, 0.03142))];
  EXPECT_NEAR(std::abs(got), 1.7, 5e-4 * 1.7);
  EXPECT_NEAR(std::arg(got) / (2.0 * std::numbers::pi), 0.1, 5e-4 * 0.1);
  EXPECT_LT(std::abs(got - want) / std::abs(want), 1e-8);
}

TEST(FitCoefficients, SquareOffsetMatchesLeastSquares) {
  const auto inst = minexp::testing::univariate_instance(4, 12);
  std::vector<Complex> logs;
  for (auto z : inst.nodes) logs.push_back(std::log(z));
  const auto ls = fit_coefficients(logs, inst.samples, CoefficientMode::kLeastSquares);
  for (std::size_t k = 0; k <= 4; ++k) {
    const auto sq = fit_coefficients(logs, inst.samples, CoefficientMode::kSquare, k);
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_LT(std::abs(sq.coefficients[j] - inst.coefficients[j]) / std::abs(inst.coefficients[j]), 1e-8);
      EXPECT_LT(std::abs(ls.coefficients[j] - inst.coefficients[j]) / std::abs(inst.coefficients[j]), 1e-8);
    }
  }
  EXPECT_FALSE(ls.ill_conditioned);
}

TEST(ClusterNodes, MergesWithinTolerance) {
  const std::vector<Complex> nodes = {1.0, Complex(1.0, 1e-9), -1.0, Complex(-1.0, 2e-3)};
  const auto g = cluster_nodes(nodes, 1e-6);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[0], (std::vector<std::size_t>{0, 1}));
}
