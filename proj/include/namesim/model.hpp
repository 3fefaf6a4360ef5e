#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "namesim/corpus.hpp"
#include "namesim/embed.hpp"
#include "namesim/metrics.hpp"
#include "namesim/random.hpp"

namespace namesim {

struct FitMetadata {
  std::size_t n = 0;
  /// Column means subtracted before estimation; the model mean is fixed at 0.
  std::vector<double> centering_offset;
  /// Diagonal ridge added to sigma / sigma_e (0 when none was needed).
  double ridge = 0.0;
  double ridge_e = 0.0;
  bool diagonal = false;
  std::uint64_t seed = 0;
  std::string metric_label;
  std::string variance_convention = "unbiased (n-1)";
  std::optional<double> gamma1;
  /// KS statistic between source dissimilarities and simulated distances,
  /// measured at fit time, and the bound it is checked against.
  std::optional<double> ks_statistic;
  std::optional<double> ks_threshold;
};

/// Zero-mean Gaussian model of name-like vectors with an optional error
/// covariance.
struct GaussianModel {
  std::size_t p = 0;
  Eigen::MatrixXd sigma;
  std::optional<Eigen::MatrixXd> sigma_e;
  FitMetadata metadata;
};

/// If the smallest eigenvalue is below 1e-10 * trace / p, adds 1e-8 * trace / p
/// to the diagonal. Returns the added amount.
double ridge_repair(Eigen::MatrixXd& cov);

/// Unbiased covariance about the column means. `diagonal` keeps variances only.
GaussianModel fit_covariance(const Matrix& X, bool diagonal = false);

struct CovarianceGroup {
  std::size_t n = 0;
  Eigen::MatrixXd cov;
};

/// sum_k (n_k - 1) cov_k / (sum_k n_k - k).
Eigen::MatrixXd pooled_covariance(const std::vector<CovarianceGroup>& groups);

/// Unbiased covariance of rows about `center` (or about the row mean).
Eigen::MatrixXd group_covariance(const Matrix& rows, const std::optional<Eigen::RowVectorXd>& center = std::nullopt);

/// Draws from N(0, sigma) through a lower-triangular factor computed once.
class MvnSampler {
 public:
  /// Throws NumericalError when the covariance is not positive definite.
  explicit MvnSampler(const Eigen::MatrixXd& cov, bool diagonal = false);

  std::size_t dimension() const { return static_cast<std::size_t>(factor_.rows()); }
  /// Writes one draw (length p) to `out`; `scratch` must hold p values.
  void draw(Rng& rng, std::normal_distribution<double>& normal, double* out, double* scratch) const;
  const Eigen::MatrixXd& factor() const { return factor_; }

 private:
  Eigen::MatrixXd factor_;
  bool diagonal_ = false;
};

/// count x p rows i.i.d. N(0, sigma). Rows are generated in fixed blocks with
/// per-block streams, so output does not depend on `threads`.
Matrix sample_mvn(const GaussianModel& model, std::size_t count, std::uint64_t seed, unsigned threads = 0);

struct RelativeEigenReport {
  /// Descending relative eigenvalues of sigma_e with respect to sigma_s.
  std::vector<double> gammas;
  double gamma1 = 0.0;
  /// Columns v with sigma_e v = gamma sigma_s v, normalized so v' sigma_s v = 1.
  Eigen::MatrixXd directions;
  double ridge = 0.0;
};

RelativeEigenReport relative_eigen(const Eigen::MatrixXd& sigma_e, const Eigen::MatrixXd& sigma_s);

enum class GroupCenter { group_mean, base_vector };

struct CalibrationOptions {
  std::size_t base_count = 20;
  std::size_t variants_per_base = 50;
  std::size_t p = 6;
  Metric metric;
  Optimizer optimizer = Optimizer::gradient_descent;
  OptimizerOptions optimizer_options;
  std::vector<EditKind> ops = all_edit_kinds();
  std::u32string alphabet = default_alphabet();
  GroupCenter center = GroupCenter::group_mean;
  bool diagonal = false;
  std::uint64_t seed = 0;
};

struct CalibrationResult {
  GaussianModel model;
  RelativeEigenReport report;
  /// Corpus names first, then variants grouped by base.
  std::vector<std::string> labels;
  Embedding embedding;
  std::vector<std::size_t> base_rows;
  std::vector<std::vector<std::size_t>> variant_rows;
};

/// Error covariance from an existing joint embedding: rows [0, name_count) are
/// names, `variant_rows[k]` are the variants of name row `base_rows[k]`.
CalibrationResult calibrate_from_embedding(const Embedding& embedding, std::size_t name_count,
                                           const std::vector<std::size_t>& base_rows,
                                           const std::vector<std::vector<std::size_t>>& variant_rows,
                                           GroupCenter center, bool diagonal = false);

/// Picks base names, generates edit variants, embeds names and variants jointly
/// and pools the per-base variant covariances into sigma_e.
CalibrationResult calibrate_error_model(const NameCorpus& corpus_sample, const CalibrationOptions& opts);

void save_model(const GaussianModel& model, const std::filesystem::path& path);
GaussianModel load_model(const std::filesystem::path& path);

}  // namespace namesim
