#include <doctest.h>

#include <map>
#include <set>

#include "namesim/error.hpp"
#include "namesim/metrics.hpp"
#include "test_util.hpp"

using namespace namesim;
using namesim::test::random_word;

namespace {

// Full (|a|+1) x (|b|+1) edit table.
std::size_t levenshtein_table(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) t[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) t[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      t[i][j] = std::min({t[i - 1][j] + 1, t[i][j - 1] + 1, t[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
  return t[a.size()][b.size()];
}

bool is_subsequence(const std::u32string& s, const std::u32string& of) {
  std::size_t k = 0;
  for (char32_t c : of)
    if (k < s.size() && s[k] == c) ++k;
  return k == s.size();
}

// Enumerates all 2^|a| subsequences of a.
std::size_t lcs_brute(const std::u32string& a, const std::u32string& b) {
  std::size_t best = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << a.size()); ++mask) {
    std::u32string sub;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (mask & (std::size_t{1} << i)) sub.push_back(a[i]);
    if (sub.size() > best && is_subsequence(sub, b)) best = sub.size();
  }
  return best;
}

std::map<std::u32string, int> profile(const std::u32string& s, std::size_t q) {
  std::map<std::u32string, int> m;
  for (std::size_t i = 0; i + q <= s.size(); ++i) ++m[s.substr(i, q)];
  return m;
}

}  // namespace

TEST_CASE("levenshtein examples") {
  CHECK(levenshtein(U"SMITH", U"SMITH") == 0);
  CHECK(levenshtein(U"SMITH", U"SMYTH") == 1);
  CHECK(levenshtein_table(U"KITTEN", U"SITTING") == 3);
  CHECK(levenshtein(U"KITTEN", U"SITTING") == 3);
  CHECK(levenshtein(U"", U"ABC") == 3);
  CHECK(levenshtein(U"É", U"E") == 1);  // scalar values, not bytes
}

TEST_CASE("lcs_distance examples") {
  CHECK(lcs_distance(U"ABC", U"ABC") == 0);
  CHECK(lcs_brute(U"ABC", U"AC") == 2);
  CHECK(lcs_distance(U"ABC", U"AC") == 1);
  CHECK(lcs_brute(U"AB", U"CD") == 0);
  CHECK(lcs_distance(U"AB", U"CD") == 4);
}

TEST_CASE("qgram_distance examples") {
  CHECK(qgram_distance(U"NIGHT", U"NIGHT", 2) == 0);
  std::size_t l1 = 0;
  auto pa = profile(U"NIGHT", 2), pb = profile(U"NACHT", 2);
  std::set<std::u32string> keys;
  for (auto& [k, v] : pa) keys.insert(k);
  for (auto& [k, v] : pb) keys.insert(k);
  for (auto& k : keys) l1 += static_cast<std::size_t>(std::abs(pa[k] - pb[k]));
  CHECK(l1 == 6);
  CHECK(qgram_distance(U"NIGHT", U"NACHT", 2) == 6);
  CHECK(qgram_distance(U"A", U"B", 2) == 0);
  CHECK_THROWS_AS(qgram_distance(U"A", U"B", 0), InvalidArgument);
}

TEST_CASE("jaccard_dissimilarity examples") {
  CHECK(jaccard_dissimilarity(U"SMITH", U"SMITH", 2) == 0.0);
  CHECK(jaccard_dissimilarity(U"NIGHT", U"NACHT", 2) == doctest::Approx(6.0 / 7.0).epsilon(1e-12));
  CHECK(jaccard_dissimilarity(U"ABAB", U"CDCD", 2) == 1.0);
  CHECK(jaccard_dissimilarity(U"A", U"B", 2) == 0.0);
  CHECK_THROWS_AS(jaccard_dissimilarity(U"A", U"B", 0), InvalidArgument);
}

TEST_CASE("jaro_winkler examples") {
  CHECK(jaro_winkler(U"MARTHA", U"MARTHA") == 0.0);
  CHECK(jaro_winkler(U"ABC", U"XYZ") == 1.0);
  // m = 6, t = 1, common prefix 3.
  const double jaro = (1.0 + 1.0 + 5.0 / 6.0) / 3.0;
  const double expected = 1.0 - (jaro + 3 * 0.1 * (1.0 - jaro));
  CHECK(expected == doctest::Approx(0.0389).epsilon(1e-4 / 0.0389));
  CHECK(jaro_winkler(U"MARTHA", U"MARHTA", 0.1) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(jaro_winkler(U"MARTHA", U"MARHTA", 0.1) - 0.0389) < 1e-4);
  // DWAYNE/DUANE: m = 4, t = 0, prefix 1.
  const double j2 = (4.0 / 6.0 + 4.0 / 5.0 + 1.0) / 3.0;
  CHECK(jaro_winkler(U"DWAYNE", U"DUANE") == doctest::Approx(1.0 - (j2 + 0.1 * (1.0 - j2))));
  CHECK_THROWS_AS(jaro_winkler(U"A", U"B", 0.3), InvalidArgument);
  CHECK_THROWS_AS(jaro_winkler(U"A", U"B", -0.1), InvalidArgument);
}

TEST_CASE("metric properties on random strings") {
  std::mt19937_64 rng(11);
  const Metric metrics[] = {Metric::parse("lv"), Metric::parse("lcs"), Metric::parse("qgram"),
                            Metric::parse("jaccard"), Metric::parse("jw")};
  for (int trial = 0; trial < 400; ++trial) {
    const auto a = random_word(rng, 7), b = random_word(rng, 7), c = random_word(rng, 7);
    for (const auto& m : metrics) {
      CHECK(m(a, a) == 0.0);
      CHECK(m(a, b) == m(b, a));
      CHECK(m(a, b) >= 0.0);
    }
    const auto lv = [](auto& x, auto& y) { return levenshtein(x, y); };
    const auto lc = [](auto& x, auto& y) { return lcs_distance(x, y); };
    CHECK(lv(a, c) <= lv(a, b) + lv(b, c));
    CHECK(lc(a, c) <= lc(a, b) + lc(b, c));
    CHECK(lc(a, b) >= lv(a, b));
    CHECK(lv(a, b) == levenshtein_table(a, b));
    CHECK(a.size() + b.size() - 2 * lcs_brute(a, b) == lc(a, b));
  }
}

TEST_CASE("pairwise_matrix matches the sequential loop for any worker count") {
  std::mt19937_64 rng(5);
  std::vector<std::u32string> names;
  for (int i = 0; i < 97; ++i) names.push_back(random_word(rng, 9, 6));
  for (const auto& metric : {Metric::parse("lv"), Metric::parse("jw")}) {
    std::vector<double> expected;
    for (std::size_t i = 0; i < names.size(); ++i)
      for (std::size_t j = i + 1; j < names.size(); ++j) expected.push_back(metric(names[i], names[j]));
    for (unsigned threads : {1u, 3u, 8u}) {
      const auto delta = pairwise_matrix(names, metric, threads);
      CHECK(delta.values() == expected);  // bit-exact
      CHECK(delta.metric_label() == metric.label());
    }
  }
}

TEST_CASE("pairwise_matrix small cases") {
  const auto twin = NameCorpus::from_raw({"LEE", "LEE "}, std::nullopt, "t");
  CHECK_THROWS_AS(pairwise_matrix(twin, Metric{}), InvalidArgument);  // collapses to one name

  const std::vector<std::u32string> same = {U"LEE", U"LEE"};
  CHECK(pairwise_matrix(same, Metric{}).values() == std::vector<double>{0.0});

  const auto corpus = NameCorpus::from_raw({"SMITH", "SMYTH", "JONES"}, std::nullopt, "t");
  const auto delta = pairwise_matrix(corpus, Metric{});
  REQUIRE(delta.values().size() == 3);
  CHECK(delta(0, 1) == 1.0);
  CHECK(delta(2, 0) == static_cast<double>(levenshtein(U"SMITH", U"JONES")));
  CHECK(delta(1, 2) == static_cast<double>(levenshtein(U"SMYTH", U"JONES")));
  CHECK(pair_count(5000) == 12'497'500);
}

TEST_CASE("dissimilarity matrix validation and file formats") {
  CHECK_THROWS_AS(DissimilarityMatrix(3, {1.0, 2.0}, std::nullopt, "x"), InvalidArgument);
  CHECK_THROWS_AS(DissimilarityMatrix(2, {-1.0}, std::nullopt, "x"), InvalidArgument);
  CHECK_THROWS_AS(DissimilarityMatrix(2, {1.0}, std::vector<double>{-0.5}, "x"), InvalidArgument);

  namesim::test::TempDir dir;
  const DissimilarityMatrix plain(4, {1, 2, 3, 4, 5, 6.25}, std::nullopt, "lv");
  const DissimilarityMatrix weighted(3, {0.1, 0.2, 0.3}, std::vector<double>{1, 0, 2}, "jw(p=0.1)");
  for (const auto& m : {plain, weighted}) {
    write_dissimilarity(m, dir / "m.nsdm");
    CHECK(read_dissimilarity(dir / "m.nsdm") == m);
    write_dissimilarity_csv(m, dir / "m.csv");
    const auto back = read_dissimilarity_csv(dir / "m.csv", m.size(), m.metric_label());
    CHECK(back.values() == m.values());
  }
  const auto bytes = namesim::test::read_bytes(dir / "m.nsdm");
  CHECK(bytes.substr(0, 4) == "NSDM");
  // magic + u16 + u64 + (u32 + 9 label bytes) + 3 f64 + presence + 3 f64
  CHECK(bytes.size() == 4 + 2 + 8 + 4 + 9 + 24 + 1 + 24);

  namesim::test::write_text(dir / "partial.csv", "i,j,delta\n0,2,4.5\n");
  const auto partial = read_dissimilarity_csv(dir / "partial.csv", 3, "lv");
  CHECK(partial(0, 2) == 4.5);
  CHECK(partial.weight(condensed_index(3, 0, 1)) == 0.0);
  CHECK(partial.weight(condensed_index(3, 0, 2)) == 1.0);

  namesim::test::write_text(dir / "junk.nsdm", "NOPE");
  CHECK_THROWS_AS(read_dissimilarity(dir / "junk.nsdm"), IoError);
}
