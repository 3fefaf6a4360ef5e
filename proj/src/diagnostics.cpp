#include "namesim/diagnostics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "namesim/error.hpp"
#include "namesim/parallel.hpp"

namespace namesim {

namespace {

void check_same_size(const DissimilarityMatrix& delta, const Matrix& X) {
  if (static_cast<std::size_t>(X.rows()) != delta.size()) {
    throw InvalidArgument("embedding has " + std::to_string(X.rows()) + " points, dissimilarities have " +
                          std::to_string(delta.size()));
  }
}

ShepardBin summarize(double lo, double hi, std::vector<double>& dists) {
  std::sort(dists.begin(), dists.end());
  ShepardBin bin;
  bin.lo = lo;
  bin.hi = hi;
  bin.count = dists.size();
  bin.min = dists.front();
  bin.q1 = quantile_sorted(dists, 0.25);
  bin.median = quantile_sorted(dists, 0.5);
  bin.q3 = quantile_sorted(dists, 0.75);
  bin.max = dists.back();
  return bin;
}

Eigen::MatrixXd centered(const Matrix& X) {
  Eigen::MatrixXd Xc = X;
  Xc.rowwise() -= Xc.colwise().mean();
  return Xc;
}

// Rows z_i with z_i' z_j = (x_i - mean)' S^{-1} (x_j - mean), S = Xc'Xc / n.
Eigen::MatrixXd whiten(const Matrix& X) {
  if (!X.allFinite()) throw InvalidArgument("sample contains non-finite values");
  const Eigen::MatrixXd Xc = centered(X);
  const Eigen::MatrixXd S = Xc.transpose() * Xc / static_cast<double>(X.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  const double largest = eig.eigenvalues().maxCoeff();
  if (!(largest > 0.0) || eig.eigenvalues().minCoeff() <= 1e-12 * largest) {
    throw NumericalError("sample covariance is singular");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) throw NumericalError("sample covariance is singular");
  // Z' = L^{-1} Xc'
  return llt.matrixL().solve(Xc.transpose()).transpose();
}

}  // namespace

double quantile_sorted(std::span<const double> sorted, double level) {
  if (sorted.empty()) throw InvalidArgument("quantile of empty data");
  level = std::clamp(level, 0.0, 1.0);
  const double h = level * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("pearson: length mismatch");
  if (x.empty()) return 0.0;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

ShepardData shepard(const DissimilarityMatrix& delta, const Matrix& X, std::size_t bin_count) {
  check_same_size(delta, X);
  if (bin_count < 1) throw InvalidArgument("bin count must be at least 1");
  const std::size_t n = delta.size();
  const std::vector<double> dist = euclidean_pairwise(X);

  ShepardData out;
  out.pairs.reserve(dist.size());
  for (std::size_t k = 0; k < dist.size(); ++k) out.pairs.emplace_back(delta.values()[k], dist[k]);
  out.pearson_r = pearson(delta.values(), dist);
  if (n < 2) return out;

  const auto& values = delta.values();
  const bool integral = std::all_of(values.begin(), values.end(), [](double v) { return v == std::floor(v); });
  if (integral) {
    std::map<double, std::vector<double>> groups;
    for (std::size_t k = 0; k < values.size(); ++k) groups[values[k]].push_back(dist[k]);
    for (auto& [v, ds] : groups) out.bins.push_back(summarize(v, v, ds));
    return out;
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  const double width = (hi - lo) / static_cast<double>(bin_count);
  std::vector<std::vector<double>> groups(width > 0.0 ? bin_count : 1);
  for (std::size_t k = 0; k < values.size(); ++k) {
    std::size_t b = 0;
    if (width > 0.0) b = std::min(bin_count - 1, static_cast<std::size_t>((values[k] - lo) / width));
    groups[b].push_back(dist[k]);
  }
  for (std::size_t b = 0; b < groups.size(); ++b) {
    if (groups[b].empty()) continue;
    const double blo = lo + width * static_cast<double>(b);
    const double bhi = width > 0.0 ? (b + 1 == groups.size() ? hi : blo + width) : hi;
    out.bins.push_back(summarize(blo, bhi, groups[b]));
  }
  return out;
}

MardiaResult mardia_tests(const Matrix& X) {
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());
  if (p < 1 || n <= p + 1) throw InvalidArgument("Mardia tests need n > p + 1");
  const Eigen::MatrixXd Z = whiten(X);

  double skew_sum = 0.0, kurt_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto zi = Z.row(static_cast<Eigen::Index>(i));
    const double gii = zi.squaredNorm();
    skew_sum += gii * gii * gii;
    kurt_sum += gii * gii;
    double off = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double g = zi.dot(Z.row(static_cast<Eigen::Index>(j)));
      off += g * g * g;
    }
    skew_sum += 2.0 * off;
  }
  const double nd = static_cast<double>(n), pd = static_cast<double>(p);
  MardiaResult r;
  r.b1p = skew_sum / (nd * nd);
  r.b2p = kurt_sum / nd;
  r.skew_statistic = nd * r.b1p / 6.0;
  r.skew_df = pd * (pd + 1.0) * (pd + 2.0) / 6.0;
  r.skew_p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(r.skew_df), r.skew_statistic));
  r.kurtosis_z = (r.b2p - pd * (pd + 2.0)) / std::sqrt(8.0 * pd * (pd + 2.0) / nd);
  r.kurtosis_p_value = 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal(), std::abs(r.kurtosis_z)));
  return r;
}

std::vector<UnivariateMoments> univariate_moments(const Matrix& X) {
  std::vector<UnivariateMoments> out;
  const double n = static_cast<double>(X.rows());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const Eigen::VectorXd col = X.col(c);
    const Eigen::ArrayXd dev = col.array() - col.mean();
    const double m2 = dev.square().sum() / n;
    const double m3 = dev.cube().sum() / n;
    const double m4 = dev.square().square().sum() / n;
    UnivariateMoments m;
    if (m2 > 0.0) {
      m.skewness = m3 / std::pow(m2, 1.5);
      m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    out.push_back(m);
  }
  return out;
}

std::vector<QQPoint> mahalanobis_qq(const Matrix& X) {
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());
  if (p < 1 || n <= p) throw InvalidArgument("Mahalanobis distances need n > p");
  const Eigen::MatrixXd Z = whiten(X);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = Z.row(static_cast<Eigen::Index>(i)).squaredNorm();
  std::sort(d2.begin(), d2.end());
  const boost::math::chi_squared chi(static_cast<double>(p));
  std::vector<QQPoint> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = {d2[i], boost::math::quantile(chi, (static_cast<double>(i) + 0.5) / static_cast<double>(n))};
  }
  return out;
}

NormalityReport normality_report(const Matrix& X) {
  NormalityReport r;
  r.n = static_cast<std::size_t>(X.rows());
  r.p = static_cast<std::size_t>(X.cols());
  r.mardia = mardia_tests(X);
  r.per_variable = univariate_moments(X);
  r.mahalanobis_sq = mahalanobis_qq(X);
  r.convention =
      "classical uncorrected Mardia statistics; biased (1/n) covariance for Mardia and Mahalanobis; "
      "moment skewness and excess kurtosis per variable";
  return r;
}

namespace {

std::vector<double> midranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double hoeffding_d(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("hoeffding_d: length mismatch");
  const std::size_t n = x.size();
  if (n < 5) throw InvalidArgument("Hoeffding's D needs at least 5 observations");
  const auto R = midranks(x);
  const auto S = midranks(y);

  double d1 = 0.0, d2 = 0.0, d3 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // Bivariate rank: points strictly below-left count 1, ties on one axis 1/2,
    // ties on both 1/4.
    double q = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const bool xl = x[j] < x[i], xe = x[j] == x[i];
      const bool yl = y[j] < y[i], ye = y[j] == y[i];
      if (xl && yl) q += 1.0;
      else if ((xe && yl) || (xl && ye)) q += 0.5;
      else if (xe && ye) q += 0.25;
    }
    d1 += (q - 1.0) * (q - 2.0);
    d2 += (R[i] - 1.0) * (R[i] - 2.0) * (S[i] - 1.0) * (S[i] - 2.0);
    d3 += (R[i] - 2.0) * (S[i] - 2.0) * (q - 1.0);
  }
  const double nd = static_cast<double>(n);
  const double num = (nd - 2.0) * (nd - 3.0) * d1 + d2 - 2.0 * (nd - 2.0) * d3;
  const double den = nd * (nd - 1.0) * (nd - 2.0) * (nd - 3.0) * (nd - 4.0);
  return 30.0 * num / den;
}

std::vector<PairIndependence> independence_tests(const Matrix& X) {
  const auto n = static_cast<std::size_t>(X.rows());
  if (n < 5) throw InvalidArgument("independence tests need at least 5 observations");
  std::vector<PairIndependence> out;
  std::vector<std::vector<double>> cols(static_cast<std::size_t>(X.cols()), std::vector<double>(n));
  for (Eigen::Index c = 0; c < X.cols(); ++c)
    for (std::size_t i = 0; i < n; ++i) cols[static_cast<std::size_t>(c)][i] = X(static_cast<Eigen::Index>(i), c);

  const boost::math::students_t t_dist(static_cast<double>(n) - 2.0);
  for (std::size_t a = 0; a < cols.size(); ++a) {
    for (std::size_t b = a + 1; b < cols.size(); ++b) {
      PairIndependence r;
      r.a = a;
      r.b = b;
      r.pearson_r = pearson(cols[a], cols[b]);
      if (std::abs(r.pearson_r) >= 1.0) {
        r.t_statistic = std::copysign(std::numeric_limits<double>::infinity(), r.pearson_r);
        r.p_value = 0.0;
      } else {
        r.t_statistic = r.pearson_r * std::sqrt((static_cast<double>(n) - 2.0) / (1.0 - r.pearson_r * r.pearson_r));
        r.p_value = 2.0 * boost::math::cdf(boost::math::complement(t_dist, std::abs(r.t_statistic)));
      }
      r.hoeffding_d = hoeffding_d(cols[a], cols[b]);
      out.push_back(r);
    }
  }
  return out;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("KS statistic needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double worst = 0.0;
  while (i < a.size() || j < b.size()) {
    const double v = j >= b.size() || (i < a.size() && a[i] <= b[j]) ? a[i] : b[j];
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    worst = std::max(worst, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return worst;
}

DistributionComparison compare_distance_distributions(std::span<const double> a, std::span<const double> b,
                                                      std::size_t quantile_count) {
  if (a.empty() || b.empty()) throw InvalidArgument("distance distributions must be non-empty");
  if (quantile_count < 1) throw InvalidArgument("quantile count must be at least 1");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  DistributionComparison out;
  for (std::size_t i = 1; i <= quantile_count; ++i) {
    const double level = (static_cast<double>(i) - 0.5) / static_cast<double>(quantile_count);
    out.qq_pairs.emplace_back(quantile_sorted(sa, level), quantile_sorted(sb, level));
  }
  out.ks_statistic = ks_statistic(std::move(sa), std::move(sb));
  return out;
}

std::vector<double> euclidean_pairwise(const Matrix& X, unsigned threads) {
  std::vector<double> out(pair_count(static_cast<std::size_t>(X.rows())));
  euclidean_pairwise(X, out, threads);
  return out;
}

void euclidean_pairwise(const Matrix& X, std::span<double> out, unsigned threads) {
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());
  if (out.size() != pair_count(n)) throw InvalidArgument("pairwise output has the wrong length");
  if (n < 2) return;
  const double* x = X.data();
  for_each_chunk(n - 1, 32, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double* dst = out.data() + condensed_index(n, i, i + 1);
      const double* xi = x + i * p;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double* xj = x + j * p;
        double s = 0.0;
        for (std::size_t c = 0; c < p; ++c) {
          const double d = xi[c] - xj[c];
          s += d * d;
        }
        *dst++ = std::sqrt(s);
      }
    }
  });
}

std::vector<HistogramBin> histogram_fd(std::span<const double> values) {
  if (values.empty()) return {};
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front(), hi = sorted.back();
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double width = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
  std::size_t bins = 1;
  if (width > 0.0 && hi > lo) bins = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil((hi - lo) / width)), 1, 1000);
  const double step = bins == 1 ? (hi - lo) : (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo = lo + step * static_cast<double>(b);
    out[b].hi = b + 1 == bins ? hi : lo + step * static_cast<double>(b + 1);
  }
  for (double v : sorted) {
    std::size_t b = step > 0.0 ? static_cast<std::size_t>((v - lo) / step) : 0;
    ++out[std::min(b, bins - 1)].count;
  }
  return out;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  return out;
}

}  // namespace

void write_shepard_pairs_csv(const ShepardData& data, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "delta,dist\n";
  for (const auto& [d, e] : data.pairs) out << d << ',' << e << '\n';
  if (!out) throw IoError("error writing " + path.string());
}

void write_shepard_bins_csv(const ShepardData& data, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "bin_lo,bin_hi,min,q1,med,q3,max\n";
  for (const auto& b : data.bins) {
    out << b.lo << ',' << b.hi << ',' << b.min << ',' << b.q1 << ',' << b.median << ',' << b.q3 << ',' << b.max << '\n';
  }
  if (!out) throw IoError("error writing " + path.string());
}

void write_qq_csv(const std::vector<QQPoint>& qq, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "observed,theoretical\n";
  for (const auto& q : qq) out << q.observed << ',' << q.theoretical << '\n';
  if (!out) throw IoError("error writing " + path.string());
}

void write_qq_csv(const std::vector<std::pair<double, double>>& qq, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "observed,theoretical\n";
  for (const auto& [a, b] : qq) out << a << ',' << b << '\n';
  if (!out) throw IoError("error writing " + path.string());
}

void write_normality_json(const NormalityReport& report, const std::vector<PairIndependence>& independence,
                          const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["n"] = report.n;
  j["p"] = report.p;
  j["convention"] = report.convention;
  j["mardia"] = {{"b1p", report.mardia.b1p},
                 {"skew_statistic", report.mardia.skew_statistic},
                 {"skew_df", report.mardia.skew_df},
                 {"skew_p_value", report.mardia.skew_p_value},
                 {"b2p", report.mardia.b2p},
                 {"kurtosis_z", report.mardia.kurtosis_z},
                 {"kurtosis_p_value", report.mardia.kurtosis_p_value}};
  auto& vars = j["per_variable"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < report.per_variable.size(); ++c) {
    vars.push_back({{"variable", "v" + std::to_string(c + 1)},
                    {"skewness", report.per_variable[c].skewness},
                    {"excess_kurtosis", report.per_variable[c].excess_kurtosis}});
  }
  auto& pairs = j["independence"] = nlohmann::ordered_json::array();
  for (const auto& r : independence) {
    pairs.push_back({{"a", "v" + std::to_string(r.a + 1)},
                     {"b", "v" + std::to_string(r.b + 1)},
                     {"pearson_r", r.pearson_r},
                     {"t_statistic", std::isfinite(r.t_statistic) ? nlohmann::ordered_json(r.t_statistic) : nullptr},
                     {"p_value", r.p_value},
                     {"hoeffding_d", r.hoeffding_d}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("error writing " + path.string());
}

void write_histograms_csv(const Matrix& X, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "variable,bin_lo,bin_hi,count\n";
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const Eigen::VectorXd col = X.col(c);
    for (const auto& b : histogram_fd(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())))) {
      out << 'v' << (c + 1) << ',' << b.lo << ',' << b.hi << ',' << b.count << '\n';
    }
  }
  if (!out) throw IoError("error writing " + path.string());
}

}  // namespace namesim
