#include "namesim/bench.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "namesim/diagnostics.hpp"
#include "namesim/error.hpp"
#include "namesim/metrics.hpp"

namespace namesim {

std::string to_string(BenchApproach a) {
  return a == BenchApproach::string_metric ? "string_metric" : "euclidean";
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("slope needs at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("log-log slope needs positive values");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw InvalidArgument("slope needs distinct sizes");
  return (n * sxy - sx * sy) / den;
}

namespace {

using Clock = std::chrono::steady_clock;

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

template <typename Fn>
std::pair<double, double> time_median(std::size_t reps, Fn&& fn) {
  double checksum = fn();  // warmup, discarded
  std::vector<double> seconds;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    const double c = fn();
    const auto t1 = Clock::now();
    seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    if (c != checksum) throw NumericalError("benchmark checksum changed between repetitions");
  }
  std::sort(seconds.begin(), seconds.end());
  const std::size_t m = seconds.size() / 2;
  const double median = seconds.size() % 2 ? seconds[m] : 0.5 * (seconds[m - 1] + seconds[m]);
  return {std::max(median, 1e-9), checksum};
}

}  // namespace

BenchReport run_benchmark(const NameCorpus& corpus, const GaussianModel& model, const BenchOptions& opts) {
  if (opts.sizes.empty()) throw InvalidArgument("benchmark needs at least one size");
  if (opts.reps < 3) throw InvalidArgument("benchmark needs at least 3 repetitions");
  std::vector<std::size_t> sizes = opts.sizes;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  if (sizes.front() < 2) throw InvalidArgument("benchmark sizes must be >= 2");
  const std::size_t max_n = sizes.back();
  if (max_n > corpus.size()) {
    throw InvalidArgument("benchmark size " + std::to_string(max_n) + " exceeds corpus size " + std::to_string(corpus.size()));
  }

  // Nested samples: the first N of one seeded draw.
  const NameCorpus names = sample_names(corpus, max_n, derive_seed(opts.seed, tag_hash("bench_names")));
  std::vector<std::u32string> all_scalars;
  for (const auto& s : names.names()) all_scalars.push_back(to_scalars(s));
  const Matrix all_vectors = sample_mvn(model, max_n, derive_seed(opts.seed, tag_hash("bench_vectors")), 1);
  const Metric lv{MetricKind::levenshtein};

  BenchReport report;
  report.threads = opts.threads;
  report.max_n = max_n;
  std::vector<double> ns, t_string, t_euclid;
  for (const std::size_t n : sizes) {
    const std::vector<std::u32string> scalars(all_scalars.begin(), all_scalars.begin() + static_cast<std::ptrdiff_t>(n));
    const Matrix X = all_vectors.topRows(static_cast<Eigen::Index>(n));

    // One output buffer per size, reused by every run of both approaches, so
    // allocation and page faults stay out of the timings.
    std::vector<double> buffer(pair_count(n));
    const auto [ts, cs] = time_median(opts.reps, [&] {
      pairwise_values(scalars, lv, buffer, opts.threads);
      return sum(buffer);
    });
    const auto [te, ce] = time_median(opts.reps, [&] {
      euclidean_pairwise(X, buffer, opts.threads);
      return sum(buffer);
    });

    // Untimed references written independently of the timed kernels.
    double ref_s = 0.0, ref_e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        ref_s += levenshtein(scalars[i], scalars[j]);
        ref_e += (X.row(static_cast<Eigen::Index>(i)) - X.row(static_cast<Eigen::Index>(j))).norm();
      }
    }
    if (cs != ref_s) throw NumericalError("string-metric checksum differs from reference");
    if (std::abs(ce - ref_e) > 1e-9 * std::max(1.0, std::abs(ref_e))) {
      throw NumericalError("euclidean checksum differs from reference");
    }

    report.rows.push_back({n, BenchApproach::string_metric, lv.label(), "", ts, opts.reps, cs});
    report.rows.push_back({n, BenchApproach::euclidean, "euclidean", "p=" + std::to_string(model.p), te, opts.reps, ce});
    ns.push_back(static_cast<double>(n));
    t_string.push_back(ts);
    t_euclid.push_back(te);
  }
  report.checksums_verified = true;
  if (ns.size() >= 2) {
    report.slope_string = loglog_slope(ns, t_string);
    report.slope_euclidean = loglog_slope(ns, t_euclid);
  }
  report.speedup_at_max_n = t_string.back() / t_euclid.back();
  return report;
}

void write_bench_csv(const BenchReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(10);
  out << "N,approach,label,param,seconds_median,reps,checksum,log10_N,log10_seconds\n";
  for (const auto& r : report.rows) {
    out << r.n << ',' << to_string(r.approach) << ',' << r.label << ',' << r.param << ',' << r.seconds_median << ','
        << r.reps << ',' << std::setprecision(17) << r.checksum << std::setprecision(10) << ','
        << std::log10(static_cast<double>(r.n)) << ',' << std::log10(r.seconds_median) << '\n';
  }
  if (!out) throw IoError("error writing " + path.string());
}

void write_bench_json(const BenchReport& report, const std::filesystem::path& path) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr); };
  nlohmann::ordered_json j;
  j["slopes"] = {{"string_metric", opt(report.slope_string)}, {"euclidean", opt(report.slope_euclidean)}};
  j["max_n"] = report.max_n;
  j["speedup_at_max_n"] = report.speedup_at_max_n;
  j["checksums_verified"] = report.checksums_verified;
  j["threads"] = report.threads;
  j["timing"] = "median of repetitions after one discarded warmup";
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("error writing " + path.string());
}

}  // namespace namesim
