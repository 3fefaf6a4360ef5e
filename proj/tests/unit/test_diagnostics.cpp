#include <doctest.h>

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <random>

#include "namesim/diagnostics.hpp"
#include "namesim/error.hpp"
#include "namesim/random.hpp"

using namespace namesim;

namespace {

Matrix normal_sample(std::size_t n, std::size_t p, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = z(rng);
  return X;
}

// Direct double sum over (x_i - m)' S^{-1} (x_j - m) with S the 1/n covariance.
std::pair<double, double> mardia_oracle(const Matrix& X) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd Xc = X;
  Xc.rowwise() -= Xc.colwise().mean();
  const Eigen::MatrixXd Sinv = (Xc.transpose() * Xc / static_cast<double>(n)).inverse();
  double b1 = 0.0, b2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double g = Xc.row(i) * Sinv * Xc.row(j).transpose();
      b1 += g * g * g;
      if (i == j) b2 += g * g;
    }
  }
  return {b1 / static_cast<double>(n * n), b2 / static_cast<double>(n)};
}

double step(double u) { return u >= 0.0 ? 1.0 : 0.0; }

// Hoeffding's D as 30 times the mean of the symmetric kernel over all ordered
// 5-tuples of distinct indices. Only valid without ties: the midrank form used
// for tied data is not this U-statistic.
double hoeffding_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  auto psi = [](const std::vector<double>& v, std::size_t a, std::size_t b, std::size_t c) {
    return step(v[a] - v[b]) - step(v[a] - v[c]);
  };
  double sum = 0.0;
  double count = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t d = 0; d < n; ++d)
          for (std::size_t e = 0; e < n; ++e) {
            const std::array<std::size_t, 5> idx{a, b, c, d, e};
            bool distinct = true;
            for (int s = 0; s < 5 && distinct; ++s)
              for (int t = s + 1; t < 5; ++t)
                if (idx[s] == idx[t]) distinct = false;
            if (!distinct) continue;
            sum += 0.25 * psi(x, a, b, c) * psi(x, a, d, e) * psi(y, a, b, c) * psi(y, a, d, e);
            count += 1.0;
          }
  return 30.0 * sum / count;
}

}  // namespace

TEST_CASE("mardia statistics match the direct double sum") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Matrix X = normal_sample(6, 2, seed);
    X.col(1) += 0.7 * X.col(0).cwiseAbs2();
    const auto [b1, b2] = mardia_oracle(X);
    const auto r = mardia_tests(X);
    CHECK(r.b1p == doctest::Approx(b1).epsilon(1e-10));
    CHECK(r.b2p == doctest::Approx(b2).epsilon(1e-10));
    CHECK(r.skew_df == doctest::Approx(4.0));
    CHECK(r.skew_statistic == doctest::Approx(6.0 * b1 / 6.0).epsilon(1e-10));
    CHECK(r.kurtosis_z == doctest::Approx((b2 - 8.0) / std::sqrt(64.0 / 6.0)).epsilon(1e-10));
  }
}

TEST_CASE("mardia in one dimension reduces to squared moment skewness") {
  const Matrix X = normal_sample(40, 1, 9).array().exp().matrix();
  const auto r = mardia_tests(X);
  const auto m = univariate_moments(X);
  CHECK(r.b1p == doctest::Approx(m[0].skewness * m[0].skewness).epsilon(1e-10));
  CHECK(r.b2p == doctest::Approx(m[0].excess_kurtosis + 3.0).epsilon(1e-10));
}

TEST_CASE("mahalanobis distances: hand computed case and sum identity") {
  // Points (1,0), (-1,0), (0,2), (0,-2): mean 0, biased covariance diag(0.5, 2).
  Matrix X(4, 2);
  X << 1, 0, -1, 0, 0, 2, 0, -2;
  const auto qq = mahalanobis_qq(X);
  REQUIRE(qq.size() == 4);
  for (const auto& q : qq) CHECK(q.observed == doctest::Approx(2.0));

  const Matrix Y = normal_sample(200, 3, 4);
  double total = 0.0;
  for (const auto& q : mahalanobis_qq(Y)) total += q.observed;
  CHECK(total == doctest::Approx(200.0 * 3.0).epsilon(1e-10));
  const auto qy = mahalanobis_qq(Y);
  for (std::size_t i = 1; i < qy.size(); ++i) {
    CHECK(qy[i - 1].observed <= qy[i].observed);
    CHECK(qy[i - 1].theoretical < qy[i].theoretical);
  }
}

TEST_CASE("mardia statistics are affine invariant") {
  const Matrix X = normal_sample(50, 3, 17);
  Eigen::Matrix3d A;
  A << 2, 0.5, 0, -1, 3, 0.2, 0.1, 0.1, 0.5;
  Matrix Y = X * A.transpose();
  Y.rowwise() += Eigen::RowVector3d(5, -2, 7);
  const auto a = mardia_tests(X);
  const auto b = mardia_tests(Y);
  CHECK(a.b1p == doctest::Approx(b.b1p).epsilon(1e-8));
  CHECK(a.b2p == doctest::Approx(b.b2p).epsilon(1e-8));
}

TEST_CASE("mardia rejects singular or undersized samples") {
  Matrix X = normal_sample(20, 2, 3);
  X.col(1) = 2.0 * X.col(0);
  CHECK_THROWS_AS(mardia_tests(X), NumericalError);
  CHECK_THROWS_AS(mardia_tests(normal_sample(3, 2, 1)), InvalidArgument);
}

TEST_CASE("normal samples look normal") {
  const auto r = normality_report(normal_sample(2000, 4, 21));
  CHECK(r.mardia.skew_p_value > 0.001);
  CHECK(r.mardia.kurtosis_p_value > 0.001);
  for (const auto& m : r.per_variable) {
    CHECK(std::abs(m.skewness) < 0.25);
    CHECK(std::abs(m.excess_kurtosis) < 0.5);
  }
}

TEST_CASE("hoeffding D agrees with the five-tuple definition") {
  Rng rng(77);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> x(9), y(9);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = z(rng);
      y[i] = x[i] * (trial - 2) + z(rng);
    }
    CHECK(hoeffding_d(x, y) == doctest::Approx(hoeffding_oracle(x, y)).epsilon(1e-10));
  }
}

TEST_CASE("hoeffding D with ties uses midranks") {
  // Reference values from exact rational arithmetic.
  const std::vector<double> x{0, 1, 1, 2, 3, 3, 3, 0}, y{1, 0, 2, 2, 3, 1, 3, 0};
  CHECK(hoeffding_d(x, y) == doctest::Approx(11.0 / 448.0).epsilon(1e-12));
  CHECK(hoeffding_d(y, x) == doctest::Approx(11.0 / 448.0).epsilon(1e-12));
  const std::vector<double> t{1, 1, 2, 3, 4};
  CHECK(hoeffding_d(t, t) == doctest::Approx(9.0 / 32.0).epsilon(1e-12));
  std::vector<double> tx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) tx[i] = 10.0 - 2.0 * x[i] * x[i] * x[i];  // decreasing
  CHECK(hoeffding_d(tx, y) == doctest::Approx(11.0 / 448.0).epsilon(1e-12));
}

TEST_CASE("hoeffding D: identity, monotone invariance, independence") {
  std::vector<double> x(30);
  Rng rng(5);
  std::normal_distribution<double> z(0.0, 1.0);
  for (auto& v : x) v = z(rng);
  CHECK(hoeffding_d(x, x) == doctest::Approx(1.0));

  std::vector<double> y(x.size()), fx(x.size()), gy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = x[i] + z(rng);
    fx[i] = std::exp(x[i]);
    gy[i] = y[i] * y[i] * y[i];
  }
  CHECK(hoeffding_d(fx, gy) == doctest::Approx(hoeffding_d(x, y)).epsilon(1e-12));
  CHECK_THROWS_AS(hoeffding_d(std::vector<double>(4, 0.0), std::vector<double>(4, 0.0)), InvalidArgument);
}

TEST_CASE("independence tests on independent columns") {
  const auto res = independence_tests(normal_sample(3000, 3, 8));
  REQUIRE(res.size() == 3);
  for (const auto& r : res) {
    CHECK(std::abs(r.pearson_r) < 0.06);
    CHECK(std::abs(r.hoeffding_d) < 0.01);
    CHECK(r.p_value > 0.0);
    CHECK(r.p_value <= 1.0);
  }
  Matrix X = normal_sample(500, 2, 9);
  X.col(1) = X.col(0) + 0.1 * X.col(1);
  const auto dep = independence_tests(X);
  CHECK(dep[0].pearson_r > 0.9);
  CHECK(dep[0].p_value < 1e-10);
  CHECK(dep[0].hoeffding_d > 0.3);
}

TEST_CASE("shepard data: perfect and degenerate fits") {
  // Collinear points at 0,1,3 with delta equal to their distances.
  Matrix X(3, 2);
  X << 0, 0, 1, 0, 3, 0;
  DissimilarityMatrix delta(3, std::vector<double>{1.0, 3.0, 2.0}, std::nullopt, "test");
  const auto s = shepard(delta, X);
  CHECK(s.pearson_r == doctest::Approx(1.0));
  REQUIRE(s.bins.size() == 3);
  for (const auto& b : s.bins) {
    CHECK(b.lo == b.hi);
    CHECK(b.min == doctest::Approx(b.lo));
    CHECK(b.max == doctest::Approx(b.lo));
    CHECK(b.q3 - b.q1 == doctest::Approx(0.0));
  }

  Matrix E(3, 1);
  E << 0, 1, 2;
  DissimilarityMatrix flat(3, std::vector<double>{1.5, 0.5, 2.5}, std::nullopt, "test");
  Matrix same(3, 2);
  same << 0, 0, 1, 0, 0.5, std::sqrt(0.75);  // equilateral: all d equal
  CHECK(shepard(flat, same).pearson_r == doctest::Approx(0.0));
  const auto binned = shepard(flat, E, 4);
  CHECK(binned.bins.size() == 3);  // one bin is empty
  CHECK(binned.bins.front().lo == doctest::Approx(0.5));
  CHECK(binned.bins.back().hi == doctest::Approx(2.5));
  CHECK_THROWS_AS(shepard(flat, Matrix(2, 1)), InvalidArgument);
}

TEST_CASE("quantiles follow linear interpolation") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(quantile_sorted(v, 0.0) == 1.0);
  CHECK(quantile_sorted(v, 1.0) == 4.0);
  CHECK(quantile_sorted(v, 0.5) == doctest::Approx(2.5));
  CHECK(quantile_sorted(v, 0.25) == doctest::Approx(1.75));
}

TEST_CASE("KS statistic") {
  const std::vector<double> a{1, 2, 3, 4, 5};
  CHECK(ks_statistic(a, a) == 0.0);
  CHECK(ks_statistic(a, {11, 12, 13}) == 1.0);
  CHECK(ks_statistic({1, 2, 3, 4}, {3, 4, 5, 6}) == doctest::Approx(0.5));
  // Ties across samples are handled at each distinct value.
  CHECK(ks_statistic({1, 1, 2}, {1, 2, 2}) == doctest::Approx(1.0 / 3.0));

  const auto cmp = compare_distance_distributions(a, a, 10);
  CHECK(cmp.ks_statistic == 0.0);
  REQUIRE(cmp.qq_pairs.size() == 10);
  for (const auto& [u, w] : cmp.qq_pairs) CHECK(u == w);
}

TEST_CASE("histogram counts cover every value") {
  const Matrix X = normal_sample(500, 1, 2);
  std::vector<double> v(X.data(), X.data() + X.size());
  const auto h = histogram_fd(v);
  std::size_t total = 0;
  for (const auto& b : h) {
    total += b.count;
    CHECK(b.lo < b.hi);
  }
  CHECK(total == 500);
  CHECK(h.size() > 5);
  CHECK(histogram_fd(std::vector<double>(10, 3.0)).size() == 1);
}
