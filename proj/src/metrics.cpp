#include "namesim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "namesim/binary_io.hpp"
#include "namesim/error.hpp"
#include "namesim/parallel.hpp"

namespace namesim {

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  if (b.empty()) return a.size();
  // Single row over the shorter string.
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + cost});
      diag = up;
    }
  }
  return row[b.size()];
}

std::size_t lcs_distance(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(up, row[j - 1]);
      diag = up;
    }
  }
  return a.size() + b.size() - 2 * row[b.size()];
}

namespace {

std::vector<std::u32string_view> sorted_grams(std::u32string_view s, std::size_t q) {
  std::vector<std::u32string_view> grams;
  if (s.size() >= q) {
    grams.reserve(s.size() - q + 1);
    for (std::size_t i = 0; i + q <= s.size(); ++i) grams.push_back(s.substr(i, q));
  }
  std::sort(grams.begin(), grams.end());
  return grams;
}

void check_q(std::size_t q) {
  if (q < 1) throw InvalidArgument("q-gram size must be at least 1");
}

}  // namespace

std::size_t qgram_distance(std::u32string_view a, std::u32string_view b, std::size_t q) {
  check_q(q);
  const auto ga = sorted_grams(a, q);
  const auto gb = sorted_grams(b, q);
  // Multiset symmetric difference size == L1 distance of count profiles.
  std::size_t common = 0;
  for (std::size_t i = 0, j = 0; i < ga.size() && j < gb.size();) {
    if (ga[i] < gb[j]) {
      ++i;
    } else if (gb[j] < ga[i]) {
      ++j;
    } else {
      ++common, ++i, ++j;
    }
  }
  return ga.size() + gb.size() - 2 * common;
}

double jaccard_dissimilarity(std::u32string_view a, std::u32string_view b, std::size_t q) {
  check_q(q);
  auto ga = sorted_grams(a, q);
  auto gb = sorted_grams(b, q);
  ga.erase(std::unique(ga.begin(), ga.end()), ga.end());
  gb.erase(std::unique(gb.begin(), gb.end()), gb.end());
  if (ga.empty() && gb.empty()) return 0.0;
  std::size_t common = 0;
  for (std::size_t i = 0, j = 0; i < ga.size() && j < gb.size();) {
    if (ga[i] < gb[j]) {
      ++i;
    } else if (gb[j] < ga[i]) {
      ++j;
    } else {
      ++common, ++i, ++j;
    }
  }
  const std::size_t unite = ga.size() + gb.size() - common;
  return 1.0 - static_cast<double>(common) / static_cast<double>(unite);
}

double jaro_winkler(std::u32string_view a, std::u32string_view b, double prefix_scale) {
  if (!(prefix_scale >= 0.0 && prefix_scale <= 0.25)) {
    throw InvalidArgument("Jaro-Winkler prefix scale must lie in [0, 0.25]");
  }
  if (a == b) return 0.0;
  if (a.empty() || b.empty()) return 1.0;

  const std::size_t longest = std::max(a.size(), b.size());
  const std::size_t window = longest / 2 > 0 ? longest / 2 - 1 : 0;

  std::vector<char> a_matched(a.size(), 0), b_matched(b.size(), 0);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t lo = i > window ? i - window : 0;
    const std::size_t hi = std::min(b.size(), i + window + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (!b_matched[j] && a[i] == b[j]) {
        a_matched[i] = b_matched[j] = 1;
        ++matches;
        break;
      }
    }
  }
  if (matches == 0) return 1.0;

  std::size_t half_transpositions = 0;
  for (std::size_t i = 0, j = 0; i < a.size(); ++i) {
    if (!a_matched[i]) continue;
    while (!b_matched[j]) ++j;
    if (a[i] != b[j]) ++half_transpositions;
    ++j;
  }
  const double m = static_cast<double>(matches);
  const double t = static_cast<double>(half_transpositions) / 2.0;
  const double jaro = (m / static_cast<double>(a.size()) + m / static_cast<double>(b.size()) + (m - t) / m) / 3.0;

  std::size_t prefix = 0;
  while (prefix < 4 && prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
  const double similarity = jaro + static_cast<double>(prefix) * prefix_scale * (1.0 - jaro);
  return std::max(0.0, 1.0 - similarity);
}

void Metric::validate() const {
  if ((kind == MetricKind::qgram || kind == MetricKind::jaccard) && q < 1) {
    throw InvalidArgument("q-gram size must be at least 1");
  }
  if (kind == MetricKind::jaro_winkler && !(prefix_scale >= 0.0 && prefix_scale <= 0.25)) {
    throw InvalidArgument("Jaro-Winkler prefix scale must lie in [0, 0.25]");
  }
}

double Metric::operator()(std::u32string_view a, std::u32string_view b) const {
  switch (kind) {
    case MetricKind::levenshtein: return static_cast<double>(levenshtein(a, b));
    case MetricKind::lcs: return static_cast<double>(lcs_distance(a, b));
    case MetricKind::qgram: return static_cast<double>(qgram_distance(a, b, q));
    case MetricKind::jaccard: return jaccard_dissimilarity(a, b, q);
    case MetricKind::jaro_winkler: return jaro_winkler(a, b, prefix_scale);
  }
  return 0.0;
}

std::string_view Metric::short_name() const {
  switch (kind) {
    case MetricKind::levenshtein: return "lv";
    case MetricKind::lcs: return "lcs";
    case MetricKind::qgram: return "qgram";
    case MetricKind::jaccard: return "jaccard";
    case MetricKind::jaro_winkler: return "jw";
  }
  return "?";
}

std::string Metric::label() const {
  std::ostringstream out;
  out << short_name();
  if (kind == MetricKind::qgram || kind == MetricKind::jaccard) out << "(q=" << q << ")";
  if (kind == MetricKind::jaro_winkler) out << "(p=" << prefix_scale << ")";
  return out.str();
}

Metric Metric::parse(std::string_view name, std::size_t q, double prefix_scale) {
  Metric m;
  m.q = q;
  m.prefix_scale = prefix_scale;
  if (name == "lv" || name == "levenshtein") {
    m.kind = MetricKind::levenshtein;
  } else if (name == "lcs") {
    m.kind = MetricKind::lcs;
  } else if (name == "qgram" || name == "qgrams") {
    m.kind = MetricKind::qgram;
  } else if (name == "jaccard") {
    m.kind = MetricKind::jaccard;
  } else if (name == "jw" || name == "jaro_winkler") {
    m.kind = MetricKind::jaro_winkler;
  } else {
    throw InvalidArgument("unknown metric '" + std::string(name) + "'");
  }
  m.validate();
  return m;
}

DissimilarityMatrix::DissimilarityMatrix(std::size_t n, std::vector<double> values,
                                         std::optional<std::vector<double>> weights,
                                         std::string metric_label)
    : n_(n), values_(std::move(values)), weights_(std::move(weights)), metric_label_(std::move(metric_label)) {
  if (values_.size() != pair_count(n_)) {
    throw InvalidArgument("condensed matrix length does not match n(n-1)/2");
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("dissimilarities must be finite and >= 0");
  }
  if (weights_) {
    if (weights_->size() != values_.size()) throw InvalidArgument("weights length mismatch");
    for (double w : *weights_) {
      if (!std::isfinite(w) || w < 0.0) throw InvalidArgument("weights must be finite and >= 0");
    }
  }
}

double DissimilarityMatrix::operator()(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  if (i > j) std::swap(i, j);
  return values_[condensed_index(n_, i, j)];
}

void pairwise_values(const std::vector<std::u32string>& names, const Metric& metric, std::span<double> out,
                     unsigned threads) {
  metric.validate();
  const std::size_t n = names.size();
  if (out.size() != pair_count(n)) throw InvalidArgument("pairwise output has the wrong length");
  if (n < 2) return;
  for_each_chunk(n - 1, 16, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double* dst = out.data() + condensed_index(n, i, i + 1);
      for (std::size_t j = i + 1; j < n; ++j) *dst++ = metric(names[i], names[j]);
    }
  });
}

DissimilarityMatrix pairwise_matrix(const std::vector<std::u32string>& names, const Metric& metric,
                                    unsigned threads) {
  const std::size_t n = names.size();
  if (n < 2) throw InvalidArgument("pairwise matrix needs at least 2 names");
  std::vector<double> values(pair_count(n));
  pairwise_values(names, metric, values, threads);
  return DissimilarityMatrix(n, std::move(values), std::nullopt, metric.label());
}

DissimilarityMatrix pairwise_matrix(const NameCorpus& corpus, const Metric& metric, unsigned threads) {
  std::vector<std::u32string> names;
  names.reserve(corpus.size());
  for (const auto& name : corpus.names()) names.push_back(to_scalars(name));
  return pairwise_matrix(names, metric, threads);
}

namespace {
constexpr std::uint16_t kNsdmVersion = 1;
}

void write_dissimilarity(const DissimilarityMatrix& delta, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write("NSDM", 4);
  binio::put<std::uint16_t>(out, kNsdmVersion);
  binio::put<std::uint64_t>(out, delta.size());
  binio::put_string(out, delta.metric_label());
  binio::put_f64s(out, delta.values());
  binio::put<std::uint8_t>(out, delta.has_weights() ? 1 : 0);
  if (delta.has_weights()) binio::put_f64s(out, *delta.weights());
  if (!out) throw IoError("error writing " + path.string());
}

DissimilarityMatrix read_dissimilarity(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  binio::expect_magic(in, "NSDM");
  if (binio::get<std::uint16_t>(in) != kNsdmVersion) throw IoError("unsupported NSDM version");
  const auto n = binio::get<std::uint64_t>(in);
  if (n > (std::uint64_t{1} << 24)) throw IoError("implausible point count in " + path.string());
  std::string label = binio::get_string(in);
  std::vector<double> values(pair_count(n));
  binio::get_f64s(in, values);
  std::optional<std::vector<double>> weights;
  const auto present = binio::get<std::uint8_t>(in);
  if (present > 1) throw IoError("bad weight presence byte");
  if (present == 1) {
    weights.emplace(values.size());
    binio::get_f64s(in, *weights);
  }
  return DissimilarityMatrix(n, std::move(values), std::move(weights), std::move(label));
}

void write_dissimilarity_csv(const DissimilarityMatrix& delta, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  out << (delta.has_weights() ? "i,j,delta,weight\n" : "i,j,delta\n");
  const std::size_t n = delta.size();
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      out << i << ',' << j << ',' << delta.values()[k];
      if (delta.has_weights()) out << ',' << (*delta.weights())[k];
      out << '\n';
    }
  }
  if (!out) throw IoError("error writing " + path.string());
}

DissimilarityMatrix read_dissimilarity_csv(const std::filesystem::path& path, std::size_t n,
                                           std::string metric_label) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> values(pair_count(n), 0.0);
  std::vector<double> weights(pair_count(n), 0.0);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.starts_with("i,")) continue;
    std::istringstream fields(line);
    std::size_t i = 0, j = 0;
    double d = 0.0, w = 1.0;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(fields >> i >> c1 >> j >> c2 >> d) || c1 != ',' || c2 != ',') {
      throw InvalidArgument("malformed dissimilarity row " + std::to_string(line_no));
    }
    if (fields >> c3) {
      if (c3 != ',' || !(fields >> w)) throw InvalidArgument("malformed weight on row " + std::to_string(line_no));
    }
    if (i == j || i >= n || j >= n) throw InvalidArgument("pair index out of range on row " + std::to_string(line_no));
    if (i > j) std::swap(i, j);
    const std::size_t k = condensed_index(n, i, j);
    values[k] = d;
    weights[k] = w;
  }
  return DissimilarityMatrix(n, std::move(values), std::move(weights), std::move(metric_label));
}

}  // namespace namesim
