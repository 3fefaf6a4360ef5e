#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>

#include <random>

#include "namesim/error.hpp"
#include "namesim/model.hpp"
#include "test_util.hpp"

using namespace namesim;

namespace {

Eigen::MatrixXd random_spd(std::size_t p, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd A(p, p);
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) A(i, j) = z(rng);
  return A * A.transpose() + 0.5 * Eigen::MatrixXd::Identity(p, p);
}

}  // namespace

TEST_CASE("fit_covariance is the unbiased estimate") {
  Matrix X(4, 2);
  X << 1, 2, 3, 4, 5, 0, 7, 2;
  const auto m = fit_covariance(X);
  // Column means 4 and 2; deviations (-3,0),(-1,2),(1,-2),(3,0).
  CHECK(m.sigma(0, 0) == doctest::Approx(20.0 / 3.0));
  CHECK(m.sigma(1, 1) == doctest::Approx(8.0 / 3.0));
  CHECK(m.sigma(0, 1) == doctest::Approx(-4.0 / 3.0));
  CHECK(m.metadata.centering_offset == std::vector<double>{4.0, 2.0});
  CHECK(m.metadata.ridge == 0.0);

  const auto d = fit_covariance(X, true);
  CHECK(d.sigma(0, 1) == 0.0);
  CHECK(d.sigma(0, 0) == doctest::Approx(20.0 / 3.0));

  CHECK_THROWS_AS(fit_covariance(Matrix(2, 2)), InvalidArgument);
}

TEST_CASE("ridge repair only touches near-singular matrices") {
  Eigen::MatrixXd ok = random_spd(3, 1);
  const Eigen::MatrixXd before = ok;
  CHECK(ridge_repair(ok) == 0.0);
  CHECK(ok == before);

  Matrix X(5, 2);
  X << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10;  // rank one
  const auto m = fit_covariance(X);
  const double trace = 2.5 + 10.0;
  CHECK(m.metadata.ridge == doctest::Approx(1e-8 * trace / 2.0));
  Eigen::LLT<Eigen::MatrixXd> llt(m.sigma);
  CHECK(llt.info() == Eigen::Success);

  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
  CHECK(ridge_repair(zero) == 0.0);
}

TEST_CASE("pooled covariance weights groups by degrees of freedom") {
  const Eigen::MatrixXd a = random_spd(3, 2), b = random_spd(3, 3);
  const auto pooled = pooled_covariance({{5, a}, {11, b}});
  CHECK((pooled - (4.0 * a + 10.0 * b) / 14.0).norm() < 1e-12);
  CHECK_THROWS_AS(pooled_covariance({{1, a}}), InvalidArgument);
  CHECK_THROWS_AS(pooled_covariance({}), InvalidArgument);
}

TEST_CASE("group covariance about a fixed center") {
  Matrix rows(3, 1);
  rows << 1, 2, 3;
  CHECK(group_covariance(rows)(0, 0) == doctest::Approx(1.0));
  Eigen::RowVectorXd c(1);
  c << 0.0;
  CHECK(group_covariance(rows, c)(0, 0) == doctest::Approx(14.0 / 2.0));
}

TEST_CASE("sampler reproduces covariance and is thread independent") {
  GaussianModel model;
  model.p = 4;
  model.sigma = random_spd(4, 7);
  const Matrix a = sample_mvn(model, 20000, 99, 1);
  const Matrix b = sample_mvn(model, 20000, 99, 4);
  CHECK(a == b);
  CHECK(sample_mvn(model, 100, 100, 1) != a.topRows(100));

  const Eigen::MatrixXd S = group_covariance(a);
  const double rel = (S - model.sigma).norm() / model.sigma.norm();
  CHECK(rel < 0.05);
  CHECK(a.colwise().mean().norm() < 0.1);

  model.metadata.diagonal = true;
  model.sigma = Eigen::MatrixXd(model.sigma.diagonal().asDiagonal());
  const Matrix d = sample_mvn(model, 20000, 5);
  const Eigen::MatrixXd Sd = group_covariance(d);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(Sd(i, i) == doctest::Approx(model.sigma(i, i)).epsilon(0.05));

  Eigen::MatrixXd bad = -Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(MvnSampler{bad}, NumericalError);
}

TEST_CASE("relative eigenvalues solve the generalized problem") {
  const Eigen::MatrixXd S = random_spd(5, 11), E = random_spd(5, 12) * 0.1;
  const auto r = relative_eigen(E, S);
  // Oracle: eigenvalues of S^{-1} E.
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ge(E, S);
  REQUIRE(r.gammas.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(r.gammas[k] == doctest::Approx(ge.eigenvalues()(4 - static_cast<Eigen::Index>(k))).epsilon(1e-9));
    const Eigen::VectorXd v = r.directions.col(static_cast<Eigen::Index>(k));
    CHECK((E * v - r.gammas[k] * S * v).norm() < 1e-9 * (1.0 + E.norm()));
    CHECK(v.dot(S * v) == doctest::Approx(1.0));
  }
  for (std::size_t k = 1; k < 5; ++k) CHECK(r.gammas[k - 1] >= r.gammas[k]);
  CHECK(r.gamma1 == r.gammas.front());

  const auto self = relative_eigen(S, S);
  for (double g : self.gammas) CHECK(g == doctest::Approx(1.0));
}

TEST_CASE("calibration with identical variants yields zero error covariance") {
  // Variant rows sit exactly on top of their base row.
  Embedding emb;
  emb.X = Matrix(10, 2);
  Rng rng(3);
  std::normal_distribution<double> z(0.0, 1.0);
  for (Eigen::Index i = 0; i < 6; ++i) emb.X.row(i) << z(rng), z(rng);
  emb.X.row(6) = emb.X.row(0);
  emb.X.row(7) = emb.X.row(0);
  emb.X.row(8) = emb.X.row(3);
  emb.X.row(9) = emb.X.row(3);
  const auto res = calibrate_from_embedding(emb, 6, {0, 3}, {{6, 7}, {8, 9}}, GroupCenter::group_mean);
  REQUIRE(res.model.sigma_e);
  CHECK(res.model.sigma_e->norm() == 0.0);
  CHECK(res.report.gamma1 == doctest::Approx(0.0));
  CHECK(res.model.metadata.gamma1 == doctest::Approx(0.0));

  const auto base = calibrate_from_embedding(emb, 6, {0, 3}, {{6, 7}, {8, 9}}, GroupCenter::base_vector);
  CHECK(base.model.sigma_e->norm() == 0.0);
}

TEST_CASE("end-to-end calibration on a small corpus") {
  const auto corpus = sample_names(load_corpus(test::fixture_corpus(), CorpusFormat::name_frequency_csv), 30, 1);
  CalibrationOptions opts;
  opts.base_count = 3;
  opts.variants_per_base = 8;
  opts.p = 3;
  opts.seed = 42;
  opts.optimizer_options.max_iters = 300;
  const auto a = calibrate_error_model(corpus, opts);
  const auto b = calibrate_error_model(corpus, opts);
  CHECK(a.model.sigma == b.model.sigma);
  CHECK(*a.model.sigma_e == *b.model.sigma_e);
  CHECK(a.labels.size() == corpus.size() + 24);
  CHECK(a.report.gamma1 > 0.0);
  CHECK(a.model.metadata.metric_label == "lv");

  opts.base_count = corpus.size() + 1;
  CHECK_THROWS_AS(calibrate_error_model(corpus, opts), InvalidArgument);
}

TEST_CASE("model JSON round trip") {
  test::TempDir dir;
  GaussianModel m;
  m.p = 3;
  m.sigma = random_spd(3, 4);
  m.sigma_e = random_spd(3, 5) * 0.01;
  m.metadata.n = 123;
  m.metadata.seed = 0xFFFFFFFFFFFFFFFFull;
  m.metadata.gamma1 = 0.125;
  m.metadata.metric_label = "qgram(q=2)";
  m.metadata.centering_offset = {0.1, -0.2, 0.3};
  save_model(m, dir / "model.json");
  const auto r = load_model(dir / "model.json");
  CHECK(r.p == 3);
  CHECK(r.sigma == m.sigma);
  CHECK(*r.sigma_e == *m.sigma_e);
  CHECK(r.metadata.seed == m.metadata.seed);
  CHECK(r.metadata.gamma1 == m.metadata.gamma1);
  CHECK(r.metadata.centering_offset == m.metadata.centering_offset);
  CHECK(!r.metadata.ks_statistic);

  test::write_text(dir / "bad.json", "{\"dimension\": 2, \"sigma\": [[1]]}");
  CHECK_THROWS_AS(load_model(dir / "bad.json"), InvalidArgument);
  CHECK_THROWS_AS(load_model(dir / "missing.json"), IoError);
}

TEST_CASE("worked examples for pooling and relative eigenvalues") {
  Eigen::MatrixXd s1(1, 1), s2(1, 1);
  s1 << 2.0;
  s2 << 4.0;
  CHECK(pooled_covariance({{3, s1}, {5, s2}})(0, 0) == doctest::Approx(20.0 / 6.0).epsilon(1e-12));
  CHECK(pooled_covariance({{7, s2}})(0, 0) == 4.0);

  const Eigen::MatrixXd S = random_spd(4, 31);
  for (double g : relative_eigen(0.1 * S, S).gammas) CHECK(g == doctest::Approx(0.1).epsilon(1e-10));

  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(2, 2);
  E.diagonal() << 0.05, 0.3;
  const auto r = relative_eigen(E, Eigen::MatrixXd::Identity(2, 2));
  CHECK(r.gammas[0] == doctest::Approx(0.3));
  CHECK(r.gammas[1] == doctest::Approx(0.05));
}

TEST_CASE("relative eigenvalues are invariant under congruence") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd S = random_spd(4, 100 + seed), E = 0.2 * random_spd(4, 200 + seed);
    Eigen::MatrixXd A = random_spd(4, 300 + seed);
    A(0, 1) += 1.0;  // not symmetric, still invertible
    const auto a = relative_eigen(E, S);
    const Eigen::MatrixXd AE = A * E * A.transpose(), AS = A * S * A.transpose();
    const auto b = relative_eigen(0.5 * (AE + AE.transpose()), 0.5 * (AS + AS.transpose()));
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(a.gammas[k] - b.gammas[k]) < 1e-9 * std::max(1.0, a.gammas[k]));
  }
}

TEST_CASE("pooled covariance of PSD inputs is symmetric PSD") {
  std::vector<CovarianceGroup> groups;
  for (std::uint64_t seed = 0; seed < 5; ++seed) groups.push_back({3 + seed, random_spd(3, seed + 40)});
  const auto P = pooled_covariance(groups);
  CHECK((P - P.transpose()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P);
  CHECK(eig.eigenvalues().minCoeff() >= 0.0);
}

TEST_CASE("sampler factor and identity covariance") {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
  D.diagonal() << 4.0, 9.0;
  const MvnSampler s(D);
  CHECK(s.factor()(0, 0) == doctest::Approx(2.0));
  CHECK(s.factor()(1, 1) == doctest::Approx(3.0));
  CHECK(s.factor()(1, 0) == 0.0);

  GaussianModel m;
  m.p = 3;
  m.sigma = Eigen::MatrixXd::Identity(3, 3);
  const auto X = sample_mvn(m, 100000, 12);
  CHECK((group_covariance(X) - m.sigma).norm() / m.sigma.norm() < 0.02);
}

TEST_CASE("identical rows give a zero covariance") {
  Matrix X = Matrix::Constant(5, 2, 1.5);
  const auto m = fit_covariance(X);
  CHECK(m.sigma.norm() == 0.0);
  CHECK(m.metadata.ridge == 0.0);
}
