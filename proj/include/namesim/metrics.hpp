#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "namesim/corpus.hpp"

namespace namesim {

// String dissimilarities over Unicode scalar values. All are symmetric and
// return 0 for identical inputs.

std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// Insert/delete-only edit distance: |a| + |b| - 2 * LCS(a, b).
std::size_t lcs_distance(std::u32string_view a, std::u32string_view b);

/// L1 distance between q-gram count profiles. No padding: strings shorter than
/// q have an empty profile.
std::size_t qgram_distance(std::u32string_view a, std::u32string_view b, std::size_t q = 2);

/// 1 - |A ∩ B| / |A ∪ B| over q-gram sets; 0 when both sets are empty.
double jaccard_dissimilarity(std::u32string_view a, std::u32string_view b, std::size_t q = 2);

/// 1 - Jaro-Winkler similarity. prefix_scale must lie in [0, 0.25]; the
/// common-prefix bonus counts at most 4 characters.
double jaro_winkler(std::u32string_view a, std::u32string_view b, double prefix_scale = 0.1);

enum class MetricKind { levenshtein, lcs, qgram, jaccard, jaro_winkler };

/// A dissimilarity selector plus its parameters.
struct Metric {
  MetricKind kind = MetricKind::levenshtein;
  std::size_t q = 2;
  double prefix_scale = 0.1;

  /// Throws InvalidArgument on out-of-range parameters.
  void validate() const;
  double operator()(std::u32string_view a, std::u32string_view b) const;
  bool integer_valued() const { return kind != MetricKind::jaccard && kind != MetricKind::jaro_winkler; }
  /// Short label, e.g. "lv", "qgram(q=2)", "jw(p=0.1)".
  std::string label() const;
  /// Accepts lv|levenshtein, lcs, qgram, jaccard, jw|jaro_winkler.
  static Metric parse(std::string_view name, std::size_t q = 2, double prefix_scale = 0.1);
  std::string_view short_name() const;
};

/// Position of pair (i, j), i < j, in the row-major strict upper triangle.
constexpr std::size_t condensed_index(std::size_t n, std::size_t i, std::size_t j) {
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

constexpr std::size_t pair_count(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

/// Symmetric, zero-diagonal dissimilarities stored as the condensed upper
/// triangle, with optional per-pair weights (0 marks a missing value).
class DissimilarityMatrix {
 public:
  DissimilarityMatrix() = default;
  /// Validates lengths, non-negativity and finiteness.
  DissimilarityMatrix(std::size_t n, std::vector<double> values,
                      std::optional<std::vector<double>> weights, std::string metric_label);

  std::size_t size() const { return n_; }
  const std::vector<double>& values() const { return values_; }
  const std::optional<std::vector<double>>& weights() const { return weights_; }
  const std::string& metric_label() const { return metric_label_; }

  double operator()(std::size_t i, std::size_t j) const;
  double weight(std::size_t k) const { return weights_ ? (*weights_)[k] : 1.0; }
  bool has_weights() const { return weights_.has_value(); }

  friend bool operator==(const DissimilarityMatrix&, const DissimilarityMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
  std::optional<std::vector<double>> weights_;
  std::string metric_label_;
};

/// All-pairs dissimilarities. Rows are split into fixed chunks so the result
/// does not depend on `threads` (0 = available parallelism).
DissimilarityMatrix pairwise_matrix(const std::vector<std::u32string>& names, const Metric& metric,
                                    unsigned threads = 0);
/// Same values written into a caller-owned condensed buffer of pair_count(n).
void pairwise_values(const std::vector<std::u32string>& names, const Metric& metric, std::span<double> out,
                     unsigned threads = 0);
DissimilarityMatrix pairwise_matrix(const NameCorpus& corpus, const Metric& metric,
                                    unsigned threads = 0);

/// Binary "NSDM" format, little-endian throughout.
void write_dissimilarity(const DissimilarityMatrix& delta, const std::filesystem::path& path);
DissimilarityMatrix read_dissimilarity(const std::filesystem::path& path);

/// CSV export `i,j,delta` (plus `,weight` when weights are present).
void write_dissimilarity_csv(const DissimilarityMatrix& delta, const std::filesystem::path& path);
/// Reads `i,j,delta[,weight]` rows for an n-point matrix. Pairs that never
/// appear get weight 0.
DissimilarityMatrix read_dissimilarity_csv(const std::filesystem::path& path, std::size_t n,
                                           std::string metric_label);

}  // namespace namesim
