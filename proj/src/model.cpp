#include "namesim/model.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <cmath>
#include <fstream>

#include "namesim/error.hpp"
#include "namesim/parallel.hpp"

namespace namesim {

namespace {

constexpr std::size_t kSampleBlock = 4096;

void check_finite(const Matrix& X) {
  if (!X.allFinite()) throw InvalidArgument("sample contains non-finite values");
}

void check_symmetric(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) throw InvalidArgument(std::string(what) + " is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidArgument(std::string(what) + " is not symmetric");
  }
}

}  // namespace

double ridge_repair(Eigen::MatrixXd& cov) {
  const auto p = static_cast<double>(cov.rows());
  if (p == 0) return 0.0;
  const double trace = cov.trace();
  if (!(trace > 0.0)) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() >= 1e-10 * trace / p) return 0.0;
  const double eps = 1e-8 * trace / p;
  cov.diagonal().array() += eps;
  return eps;
}

Eigen::MatrixXd group_covariance(const Matrix& rows, const std::optional<Eigen::RowVectorXd>& center) {
  if (rows.rows() < 2) throw InvalidArgument("covariance needs at least 2 rows");
  Eigen::MatrixXd dev = rows;
  const Eigen::RowVectorXd c = center ? *center : Eigen::RowVectorXd(rows.colwise().mean());
  if (c.size() != rows.cols()) throw InvalidArgument("center has wrong dimension");
  dev.rowwise() -= c;
  Eigen::MatrixXd cov = dev.transpose() * dev / static_cast<double>(rows.rows() - 1);
  return 0.5 * (cov + cov.transpose());
}

GaussianModel fit_covariance(const Matrix& X, bool diagonal) {
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());
  if (p < 1) throw InvalidArgument("sample has no columns");
  if (n < p + 1) throw InvalidArgument("covariance fit needs n >= p + 1");
  check_finite(X);

  GaussianModel model;
  model.p = p;
  model.sigma = group_covariance(X);
  if (diagonal) model.sigma = Eigen::MatrixXd(model.sigma.diagonal().asDiagonal());
  model.metadata.n = n;
  model.metadata.diagonal = diagonal;
  const Eigen::RowVectorXd mean = X.colwise().mean();
  model.metadata.centering_offset.assign(mean.data(), mean.data() + mean.size());
  model.metadata.ridge = ridge_repair(model.sigma);
  return model;
}

Eigen::MatrixXd pooled_covariance(const std::vector<CovarianceGroup>& groups) {
  if (groups.empty()) throw InvalidArgument("pooled covariance needs at least one group");
  const auto p = groups.front().cov.rows();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(p, p);
  double dof = 0.0;
  for (const auto& g : groups) {
    if (g.n < 2) throw InvalidArgument("every pooled group needs n >= 2");
    if (g.cov.rows() != p || g.cov.cols() != p) throw InvalidArgument("pooled groups differ in dimension");
    check_symmetric(g.cov, "group covariance");
    acc += static_cast<double>(g.n - 1) * g.cov;
    dof += static_cast<double>(g.n - 1);
  }
  return acc / dof;
}

MvnSampler::MvnSampler(const Eigen::MatrixXd& cov, bool diagonal) : diagonal_(diagonal) {
  check_symmetric(cov, "covariance");
  const auto p = cov.rows();
  if (diagonal) {
    factor_ = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
      if (!(cov(i, i) > 0.0)) throw NumericalError("covariance is not positive definite");
      factor_(i, i) = std::sqrt(cov(i, i));
    }
    return;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  factor_ = llt.matrixL();
  if (!factor_.allFinite() || factor_.diagonal().minCoeff() <= 0.0) {
    throw NumericalError("covariance is not positive definite");
  }
}

void MvnSampler::draw(Rng& rng, std::normal_distribution<double>& normal, double* out, double* scratch) const {
  const auto p = factor_.rows();
  for (Eigen::Index c = 0; c < p; ++c) scratch[c] = normal(rng);
  if (diagonal_) {
    for (Eigen::Index r = 0; r < p; ++r) out[r] = factor_(r, r) * scratch[r];
    return;
  }
  for (Eigen::Index r = 0; r < p; ++r) {
    double s = 0.0;
    for (Eigen::Index c = 0; c <= r; ++c) s += factor_(r, c) * scratch[c];
    out[r] = s;
  }
}

Matrix sample_mvn(const GaussianModel& model, std::size_t count, std::uint64_t seed, unsigned threads) {
  const MvnSampler sampler(model.sigma, model.metadata.diagonal);
  const auto p = static_cast<Eigen::Index>(model.p);
  Matrix out(static_cast<Eigen::Index>(count), p);
  const std::uint64_t stream = derive_seed(seed, tag_hash("sample_mvn"));
  for_each_chunk(count, kSampleBlock, threads, [&](std::size_t block, std::size_t begin, std::size_t end) {
    Rng rng(derive_seed(stream, block));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> scratch(static_cast<std::size_t>(p));
    for (std::size_t i = begin; i < end; ++i) {
      sampler.draw(rng, normal, out.data() + i * static_cast<std::size_t>(p), scratch.data());
    }
  });
  return out;
}

RelativeEigenReport relative_eigen(const Eigen::MatrixXd& sigma_e, const Eigen::MatrixXd& sigma_s) {
  check_symmetric(sigma_e, "sigma_e");
  check_symmetric(sigma_s, "sigma_s");
  if (sigma_e.rows() != sigma_s.rows()) throw InvalidArgument("covariances differ in dimension");
  const auto p = sigma_s.rows();

  RelativeEigenReport report;
  Eigen::MatrixXd reference = sigma_s;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref_eig(reference);
  if (ref_eig.eigenvalues().minCoeff() <= 0.0) {
    report.ridge = ridge_repair(reference);
    ref_eig.compute(reference);
    if (ref_eig.eigenvalues().minCoeff() <= 0.0) throw NumericalError("sigma_s is singular beyond ridge repair");
  }
  const Eigen::MatrixXd inv_sqrt =
      ref_eig.eigenvectors() * ref_eig.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
      ref_eig.eigenvectors().transpose();
  Eigen::MatrixXd M = inv_sqrt * sigma_e * inv_sqrt;
  M = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
  if (eig.info() != Eigen::Success) throw NumericalError("relative eigen decomposition failed");

  const double tiny = 1e-12 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  report.directions.resize(p, p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const Eigen::Index src = p - 1 - k;  // ascending -> descending
    double g = eig.eigenvalues()(src);
    if (g < 0.0 && g > -tiny) g = 0.0;
    report.gammas.push_back(g);
    report.directions.col(k) = inv_sqrt * eig.eigenvectors().col(src);
  }
  report.gamma1 = report.gammas.front();
  return report;
}

CalibrationResult calibrate_from_embedding(const Embedding& embedding, std::size_t name_count,
                                           const std::vector<std::size_t>& base_rows,
                                           const std::vector<std::vector<std::size_t>>& variant_rows,
                                           GroupCenter center, bool diagonal) {
  if (name_count > embedding.n()) throw InvalidArgument("name count exceeds embedding rows");
  if (base_rows.size() != variant_rows.size() || base_rows.empty()) {
    throw InvalidArgument("need one variant group per base name");
  }
  const Matrix& X = embedding.X;
  CalibrationResult result;
  result.embedding = embedding;
  result.base_rows = base_rows;
  result.variant_rows = variant_rows;

  result.model = fit_covariance(X.topRows(static_cast<Eigen::Index>(name_count)), diagonal);

  std::vector<CovarianceGroup> groups;
  for (std::size_t k = 0; k < base_rows.size(); ++k) {
    const auto& rows = variant_rows[k];
    if (base_rows[k] >= embedding.n()) throw InvalidArgument("base row out of range");
    Matrix block(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r] >= embedding.n()) throw InvalidArgument("variant row out of range");
      block.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(rows[r]));
    }
    std::optional<Eigen::RowVectorXd> c;
    if (center == GroupCenter::base_vector) c = X.row(static_cast<Eigen::Index>(base_rows[k]));
    groups.push_back({rows.size(), group_covariance(block, c)});
  }
  Eigen::MatrixXd sigma_e = pooled_covariance(groups);
  if (diagonal) sigma_e = Eigen::MatrixXd(sigma_e.diagonal().asDiagonal());
  result.model.metadata.ridge_e = ridge_repair(sigma_e);
  result.model.sigma_e = sigma_e;
  result.report = relative_eigen(sigma_e, result.model.sigma);
  result.model.metadata.gamma1 = result.report.gamma1;
  return result;
}

CalibrationResult calibrate_error_model(const NameCorpus& corpus_sample, const CalibrationOptions& opts) {
  if (opts.base_count < 1 || opts.base_count > corpus_sample.size()) {
    throw InvalidArgument("base count must lie in [1, corpus size]");
  }
  if (opts.variants_per_base < 2) throw InvalidArgument("need at least 2 variants per base");
  opts.metric.validate();

  // Bases are drawn among names long enough to edit.
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < corpus_sample.size(); ++i)
    if (to_scalars(corpus_sample[i]).size() >= 2) eligible.push_back(i);
  if (eligible.size() < opts.base_count) throw InvalidArgument("not enough names with at least 2 characters");
  Rng rng(derive_seed(opts.seed, tag_hash("calibrate_bases")));
  for (std::size_t i = 0; i < opts.base_count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, eligible.size() - 1);
    std::swap(eligible[i], eligible[pick(rng)]);
  }
  eligible.resize(opts.base_count);

  std::vector<std::string> labels = corpus_sample.names();
  std::vector<std::vector<std::size_t>> variant_rows;
  for (std::size_t k = 0; k < eligible.size(); ++k) {
    const auto set = generate_edit_variants(corpus_sample[eligible[k]], opts.variants_per_base, opts.ops,
                                            opts.alphabet, derive_seed(opts.seed, tag_hash("calibrate_variants") + k));
    std::vector<std::size_t> rows;
    for (const auto& v : set.variants) {
      rows.push_back(labels.size());
      labels.push_back(v);
    }
    variant_rows.push_back(std::move(rows));
  }

  std::vector<std::u32string> scalars;
  scalars.reserve(labels.size());
  for (const auto& s : labels) scalars.push_back(to_scalars(s));
  const auto delta = pairwise_matrix(scalars, opts.metric, opts.optimizer_options.threads);

  OptimizerOptions optimizer_options = opts.optimizer_options;
  optimizer_options.seed = derive_seed(opts.seed, tag_hash("calibrate_embed"));
  const Embedding embedding = embed(delta, opts.p, opts.optimizer, optimizer_options);

  CalibrationResult result =
      calibrate_from_embedding(embedding, corpus_sample.size(), eligible, variant_rows, opts.center, opts.diagonal);
  result.labels = std::move(labels);
  result.model.metadata.seed = opts.seed;
  result.model.metadata.metric_label = opts.metric.label();
  return result;
}

namespace {

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, std::size_t p, const char* what) {
  if (!j.is_array() || j.size() != p) throw InvalidArgument(std::string(what) + " must be a p x p array");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (std::size_t r = 0; r < p; ++r) {
    if (!j[r].is_array() || j[r].size() != p) throw InvalidArgument(std::string(what) + " must be a p x p array");
    for (std::size_t c = 0; c < p; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
  }
  return m;
}

template <typename T>
nlohmann::ordered_json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

void save_model(const GaussianModel& model, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["dimension"] = model.p;
  j["sigma"] = matrix_json(model.sigma);
  j["sigma_e"] = model.sigma_e ? matrix_json(*model.sigma_e) : nlohmann::ordered_json(nullptr);
  const auto& m = model.metadata;
  j["metadata"] = {{"n", m.n},
                   {"seed", m.seed},
                   {"ridge_applied", m.ridge},
                   {"ridge_applied_e", m.ridge_e},
                   {"diagonal", m.diagonal},
                   {"metric_label", m.metric_label},
                   {"centering_offset", m.centering_offset},
                   {"variance_convention", m.variance_convention},
                   {"gamma1", optional_json(m.gamma1)},
                   {"ks_statistic", optional_json(m.ks_statistic)},
                   {"ks_threshold", optional_json(m.ks_threshold)}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17) << j.dump(2) << '\n';
  if (!out) throw IoError("error writing " + path.string());
}

GaussianModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    GaussianModel model;
    model.p = j.at("dimension").get<std::size_t>();
    if (model.p < 1) throw InvalidArgument("model dimension must be >= 1");
    model.sigma = matrix_from_json(j.at("sigma"), model.p, "sigma");
    if (j.contains("sigma_e") && !j["sigma_e"].is_null()) model.sigma_e = matrix_from_json(j["sigma_e"], model.p, "sigma_e");
    if (j.contains("metadata")) {
      const auto& m = j["metadata"];
      auto& md = model.metadata;
      md.n = m.value("n", std::size_t{0});
      md.seed = m.value("seed", std::uint64_t{0});
      md.ridge = m.value("ridge_applied", 0.0);
      md.ridge_e = m.value("ridge_applied_e", 0.0);
      md.diagonal = m.value("diagonal", false);
      md.metric_label = m.value("metric_label", std::string{});
      md.variance_convention = m.value("variance_convention", md.variance_convention);
      if (m.contains("centering_offset")) md.centering_offset = m["centering_offset"].get<std::vector<double>>();
      if (m.contains("gamma1") && !m["gamma1"].is_null()) md.gamma1 = m["gamma1"].get<double>();
      if (m.contains("ks_statistic") && !m["ks_statistic"].is_null()) md.ks_statistic = m["ks_statistic"].get<double>();
      if (m.contains("ks_threshold") && !m["ks_threshold"].is_null()) md.ks_threshold = m["ks_threshold"].get<double>();
    }
    check_symmetric(model.sigma, "sigma");
    if (model.sigma_e) check_symmetric(*model.sigma_e, "sigma_e");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("malformed model file " + path.string() + ": " + e.what());
  }
}

}  // namespace namesim
