#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "namesim/corpus.hpp"
#include "namesim/model.hpp"

namespace namesim {

enum class BenchApproach { string_metric, euclidean };
std::string to_string(BenchApproach a);

struct BenchRow {
  std::size_t n = 0;
  BenchApproach approach = BenchApproach::string_metric;
  std::string label;
  std::string param;
  double seconds_median = 0.0;
  std::size_t reps = 0;
  /// Sum of all computed distances; equals the untimed reference sum.
  double checksum = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  /// Least-squares slope of log(seconds) on log(N); empty with fewer than two sizes.
  std::optional<double> slope_string;
  std::optional<double> slope_euclidean;
  std::size_t max_n = 0;
  double speedup_at_max_n = 0.0;
  bool checksums_verified = false;
  unsigned threads = 1;
};

struct BenchOptions {
  std::vector<std::size_t> sizes{512, 1024, 2048, 4096};
  std::size_t reps = 5;
  std::uint64_t seed = 0;
  /// 1 is the fair single-threaded mode; anything else is reported as such.
  unsigned threads = 1;
};

/// Times full condensed all-pairs Levenshtein over N sampled names against
/// all-pairs Euclidean over N vectors drawn from `model`. One warmup run is
/// discarded; the median of `reps` timed runs is reported. Throws if a timed
/// checksum disagrees with its reference computation.
BenchReport run_benchmark(const NameCorpus& corpus, const GaussianModel& model, const BenchOptions& opts);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

void write_bench_csv(const BenchReport& report, const std::filesystem::path& path);
void write_bench_json(const BenchReport& report, const std::filesystem::path& path);

}  // namespace namesim
