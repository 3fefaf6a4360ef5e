#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "namesim/embed.hpp"
#include "namesim/metrics.hpp"

namespace namesim {

/// Five-number summary of embedded distances for one dissimilarity bin.
struct ShepardBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

struct ShepardData {
  /// (delta_ij, d_ij) in condensed order.
  std::vector<std::pair<double, double>> pairs;
  /// Non-empty bins in ascending delta order.
  std::vector<ShepardBin> bins;
  double pearson_r = 0.0;
};

/// Integer-valued dissimilarities get one bin per distinct value; otherwise the
/// delta range is cut into `bin_count` equal-width bins.
ShepardData shepard(const DissimilarityMatrix& delta, const Matrix& X, std::size_t bin_count = 20);

/// Pearson correlation; 0 when either variance is 0.
double pearson(std::span<const double> x, std::span<const double> y);

/// Linear-interpolation quantile of sorted data (R type 7).
double quantile_sorted(std::span<const double> sorted, double level);

struct MardiaResult {
  double b1p = 0.0;
  double skew_statistic = 0.0;  // n b1p / 6
  double skew_df = 0.0;         // p(p+1)(p+2)/6
  double skew_p_value = 0.0;
  double b2p = 0.0;
  double kurtosis_z = 0.0;  // (b2p - p(p+2)) / sqrt(8p(p+2)/n)
  double kurtosis_p_value = 0.0;
};

struct UnivariateMoments {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

struct QQPoint {
  double observed = 0.0;
  double theoretical = 0.0;
};

struct NormalityReport {
  std::size_t n = 0;
  std::size_t p = 0;
  MardiaResult mardia;
  std::vector<UnivariateMoments> per_variable;
  /// Ascending squared Mahalanobis distances against chi-square(p) quantiles.
  std::vector<QQPoint> mahalanobis_sq;
  std::string convention;
};

/// Classical (uncorrected) Mardia statistics on covariance-whitened rows using
/// the biased 1/n covariance. Requires n > p + 1 and a nonsingular covariance.
MardiaResult mardia_tests(const Matrix& X);

/// Moment skewness and excess kurtosis per column (biased moments).
std::vector<UnivariateMoments> univariate_moments(const Matrix& X);

/// Squared Mahalanobis distances (biased covariance) sorted ascending, paired
/// with chi-square(p) quantiles at (i - 0.5) / n.
std::vector<QQPoint> mahalanobis_qq(const Matrix& X);

NormalityReport normality_report(const Matrix& X);

/// Hoeffding's D (30x scaling, range [-0.5, 1]) with midranks for ties.
/// Requires n >= 5.
double hoeffding_d(std::span<const double> x, std::span<const double> y);

struct PairIndependence {
  std::size_t a = 0, b = 0;
  double pearson_r = 0.0;
  double t_statistic = 0.0;
  double p_value = 0.0;
  double hoeffding_d = 0.0;
};

/// One entry per column pair a < b.
std::vector<PairIndependence> independence_tests(const Matrix& X);

struct DistributionComparison {
  /// (quantile of a, quantile of b) at levels (i - 0.5) / q.
  std::vector<std::pair<double, double>> qq_pairs;
  double ks_statistic = 0.0;
};

/// Two-sample sup-norm distance between empirical CDFs.
double ks_statistic(std::vector<double> a, std::vector<double> b);

DistributionComparison compare_distance_distributions(std::span<const double> a, std::span<const double> b,
                                                      std::size_t quantile_count = 100);

/// Condensed all-pairs Euclidean distances of the rows of X.
std::vector<double> euclidean_pairwise(const Matrix& X, unsigned threads = 0);
void euclidean_pairwise(const Matrix& X, std::span<double> out, unsigned threads = 0);

struct HistogramBin {
  double lo = 0.0, hi = 0.0;
  std::size_t count = 0;
};

/// Freedman-Diaconis bin width (falls back to a single bin for zero IQR).
std::vector<HistogramBin> histogram_fd(std::span<const double> values);

void write_shepard_pairs_csv(const ShepardData& data, const std::filesystem::path& path);
void write_shepard_bins_csv(const ShepardData& data, const std::filesystem::path& path);
void write_qq_csv(const std::vector<QQPoint>& qq, const std::filesystem::path& path);
void write_qq_csv(const std::vector<std::pair<double, double>>& qq, const std::filesystem::path& path);
void write_normality_json(const NormalityReport& report, const std::vector<PairIndependence>& independence,
                          const std::filesystem::path& path);
void write_histograms_csv(const Matrix& X, const std::filesystem::path& path);

}  // namespace namesim
