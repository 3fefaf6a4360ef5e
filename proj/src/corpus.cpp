#include "namesim/corpus.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "namesim/error.hpp"
#include "namesim/random.hpp"

namespace namesim {

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

std::string nfc(const icu::UnicodeString& text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  icu::UnicodeString out = normalizer->normalize(text, status);
  if (U_FAILURE(status)) throw InvalidArgument("Unicode normalization failed");
  std::string utf8;
  out.toUTF8String(utf8);
  return utf8;
}

std::uint64_t parse_frequency(std::string_view field, std::size_t line_no) {
  field = trim(field);
  std::uint64_t value = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc{} || ptr != end || value == 0) {
    throw InvalidArgument("malformed frequency on line " + std::to_string(line_no) + ": '" +
                          std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::u32string to_scalars(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) throw InvalidArgument("input is not valid UTF-8");
    out.push_back(static_cast<char32_t>(c));
  }
  return out;
}

std::string to_utf8(std::u32string_view scalars) {
  std::string out;
  out.reserve(scalars.size());
  for (char32_t c : scalars) {
    uint8_t buf[U8_MAX_LENGTH];
    int32_t len = 0;
    UBool error = false;
    U8_APPEND(buf, len, U8_MAX_LENGTH, static_cast<UChar32>(c), error);
    if (error) throw InvalidArgument("invalid Unicode scalar value");
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(len));
  }
  return out;
}

std::string normalize_name(std::string_view raw) {
  raw = trim(raw);
  to_scalars(raw);  // validates
  const auto text = icu::UnicodeString::fromUTF8(icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  const std::string composed = nfc(text);
  icu::UnicodeString upper =
      icu::UnicodeString::fromUTF8(icu::StringPiece(composed.data(), static_cast<int32_t>(composed.size())));
  upper.toUpper(icu::Locale::getRoot());
  // Case mapping can leave decomposed sequences behind (e.g. final sigma rules).
  return std::string(trim(nfc(upper)));
}

CorpusFormat parse_corpus_format(std::string_view text) {
  if (text == "plain") return CorpusFormat::plain;
  if (text == "name_frequency_csv" || text == "csv") return CorpusFormat::name_frequency_csv;
  throw InvalidArgument("unknown corpus format '" + std::string(text) + "'");
}

std::string_view to_string(CorpusFormat format) {
  return format == CorpusFormat::plain ? "plain" : "name_frequency_csv";
}

NameCorpus NameCorpus::from_raw(const std::vector<std::string>& raw_names,
                                std::optional<std::vector<std::uint64_t>> frequencies,
                                std::string source_label) {
  if (frequencies && frequencies->size() != raw_names.size()) {
    throw InvalidArgument("frequency count does not match name count");
  }
  NameCorpus corpus;
  corpus.source_label_ = std::move(source_label);
  if (frequencies) corpus.frequencies_.emplace();

  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < raw_names.size(); ++i) {
    std::string name = normalize_name(raw_names[i]);
    if (name.empty()) continue;
    std::uint64_t freq = 0;
    if (frequencies) {
      freq = (*frequencies)[i];
      if (freq == 0) throw InvalidArgument("frequencies must be positive");
    }
    auto [it, inserted] = seen.try_emplace(name, corpus.names_.size());
    if (inserted) {
      corpus.names_.push_back(std::move(name));
      if (frequencies) corpus.frequencies_->push_back(freq);
    } else if (frequencies) {
      (*corpus.frequencies_)[it->second] += freq;
    }
  }
  if (corpus.names_.empty()) throw InvalidArgument("corpus is empty after normalization");
  return corpus;
}

NameCorpus NameCorpus::select(const std::vector<std::size_t>& indices,
                              std::string source_label) const {
  NameCorpus out;
  out.source_label_ = std::move(source_label);
  if (frequencies_) out.frequencies_.emplace();
  std::vector<bool> used(names_.size(), false);
  for (std::size_t idx : indices) {
    if (idx >= names_.size() || used[idx]) throw InvalidArgument("invalid corpus selection");
    used[idx] = true;
    out.names_.push_back(names_[idx]);
    if (frequencies_) out.frequencies_->push_back((*frequencies_)[idx]);
  }
  return out;
}

NameCorpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file " + path.string());

  std::vector<std::string> names;
  std::vector<std::uint64_t> freqs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (trim(line).empty()) continue;
    if (format == CorpusFormat::plain) {
      names.push_back(line);
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw InvalidArgument("expected 'name,frequency' on line " + std::to_string(line_no));
    }
    names.push_back(line.substr(0, comma));
    freqs.push_back(parse_frequency(std::string_view(line).substr(comma + 1), line_no));
  }
  if (in.bad()) throw IoError("error reading " + path.string());

  std::optional<std::vector<std::uint64_t>> frequencies;
  if (format == CorpusFormat::name_frequency_csv) frequencies = std::move(freqs);
  return NameCorpus::from_raw(names, std::move(frequencies), path.filename().string());
}

void write_corpus(const NameCorpus& corpus, const std::filesystem::path& path,
                  CorpusFormat format) {
  if (format == CorpusFormat::name_frequency_csv && !corpus.frequencies()) {
    throw InvalidArgument("corpus has no frequencies to write");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus file " + path.string());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    out << corpus[i];
    if (format == CorpusFormat::name_frequency_csv) out << ',' << (*corpus.frequencies())[i];
    out << '\n';
  }
  if (!out) throw IoError("error writing " + path.string());
}

NameCorpus sample_names(const NameCorpus& corpus, std::size_t k, std::uint64_t seed) {
  if (k < 1 || k > corpus.size()) {
    throw InvalidArgument("sample size " + std::to_string(k) + " outside [1, " +
                          std::to_string(corpus.size()) + "]");
  }
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, tag_hash("sample_names")));
  // Partial Fisher-Yates; the first k slots are the sample in draw order.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  order.resize(k);
  return corpus.select(order, corpus.source_label() + " [sample k=" + std::to_string(k) + "]");
}

std::string_view to_string(EditKind kind) {
  switch (kind) {
    case EditKind::insert: return "insert";
    case EditKind::remove: return "delete";
    case EditKind::substitute: return "substitute";
    case EditKind::transpose: return "transpose";
  }
  return "?";
}

EditKind parse_edit_kind(std::string_view text) {
  if (text == "insert" || text == "ins") return EditKind::insert;
  if (text == "delete" || text == "del") return EditKind::remove;
  if (text == "substitute" || text == "sub") return EditKind::substitute;
  if (text == "transpose" || text == "trans") return EditKind::transpose;
  throw InvalidArgument("unknown edit kind '" + std::string(text) + "'");
}

std::u32string apply_edit(std::u32string_view name, const EditOp& op) {
  std::u32string out(name);
  const std::size_t n = name.size();
  switch (op.kind) {
    case EditKind::insert:
      if (op.position > n) throw InvalidArgument("insert position out of range");
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(op.position), op.character);
      break;
    case EditKind::remove:
      if (op.position >= n) throw InvalidArgument("delete position out of range");
      out.erase(op.position, 1);
      break;
    case EditKind::substitute:
      if (op.position >= n) throw InvalidArgument("substitute position out of range");
      out[op.position] = op.character;
      break;
    case EditKind::transpose:
      if (op.position + 1 >= n) throw InvalidArgument("transpose position out of range");
      std::swap(out[op.position], out[op.position + 1]);
      break;
  }
  return out;
}

std::string apply_edit(std::string_view utf8_name, const EditOp& op) {
  return to_utf8(apply_edit(to_scalars(utf8_name), op));
}

namespace {

// Positions at which `kind` yields a string different from `name`.
std::vector<std::size_t> valid_positions(std::u32string_view name, EditKind kind,
                                         std::u32string_view alphabet) {
  std::vector<std::size_t> positions;
  const std::size_t n = name.size();
  switch (kind) {
    case EditKind::insert:
      for (std::size_t i = 0; i <= n; ++i) positions.push_back(i);
      break;
    case EditKind::remove:
      for (std::size_t i = 0; i < n; ++i) positions.push_back(i);
      break;
    case EditKind::substitute:
      for (std::size_t i = 0; i < n; ++i) {
        const bool other = std::any_of(alphabet.begin(), alphabet.end(),
                                       [&](char32_t c) { return c != name[i]; });
        if (other) positions.push_back(i);
      }
      break;
    case EditKind::transpose:
      for (std::size_t i = 0; i + 1 < n; ++i)
        if (name[i] != name[i + 1]) positions.push_back(i);
      break;
  }
  return positions;
}

std::set<std::u32string> enumerate_variants(std::u32string_view name,
                                            const std::vector<EditKind>& kinds,
                                            std::u32string_view alphabet) {
  std::set<std::u32string> all;
  for (EditKind kind : kinds) {
    for (std::size_t pos : valid_positions(name, kind, alphabet)) {
      if (kind == EditKind::insert || kind == EditKind::substitute) {
        for (char32_t c : alphabet) {
          if (kind == EditKind::substitute && c == name[pos]) continue;
          all.insert(apply_edit(name, EditOp{kind, pos, c}));
        }
      } else {
        all.insert(apply_edit(name, EditOp{kind, pos, 0}));
      }
    }
  }
  return all;
}

}  // namespace

ErrorVariantSet generate_edit_variants(std::string_view name, std::size_t count,
                                       const std::vector<EditKind>& ops,
                                       std::u32string_view alphabet, std::uint64_t seed) {
  const std::u32string base = to_scalars(name);
  if (base.size() < 2) throw InvalidArgument("name must have at least 2 characters");
  if (count < 1) throw InvalidArgument("variant count must be at least 1");
  if (alphabet.empty()) throw InvalidArgument("alphabet must not be empty");
  if (ops.empty()) throw InvalidArgument("no edit kinds allowed");

  std::vector<std::pair<EditKind, std::vector<std::size_t>>> applicable;
  for (EditKind kind : std::set<EditKind>(ops.begin(), ops.end())) {
    auto positions = valid_positions(base, kind, alphabet);
    if (!positions.empty()) applicable.emplace_back(kind, std::move(positions));
  }
  if (applicable.empty()) throw InvalidArgument("no allowed edit applies to '" + std::string(name) + "'");

  const std::size_t distinct_total =
      enumerate_variants(base, std::vector<EditKind>(ops.begin(), ops.end()), alphabet).size();

  Rng rng(derive_seed(seed, tag_hash("edit_variants")));
  ErrorVariantSet result;
  result.base_name = std::string(name);
  std::set<std::u32string> produced;

  while (result.variants.size() < count) {
    std::uniform_int_distribution<std::size_t> pick_kind(0, applicable.size() - 1);
    const auto& [kind, positions] = applicable[pick_kind(rng)];
    std::uniform_int_distribution<std::size_t> pick_pos(0, positions.size() - 1);
    EditOp op{kind, positions[pick_pos(rng)], 0};
    if (kind == EditKind::insert || kind == EditKind::substitute) {
      std::u32string choices;
      for (char32_t c : alphabet)
        if (kind == EditKind::insert || c != base[op.position]) choices.push_back(c);
      std::uniform_int_distribution<std::size_t> pick_char(0, choices.size() - 1);
      op.character = choices[pick_char(rng)];
    }
    std::u32string variant = apply_edit(base, op);
    if (produced.contains(variant) && produced.size() < distinct_total) continue;
    produced.insert(variant);
    result.variants.push_back(to_utf8(variant));
    result.edit_ops.push_back(op);
  }
  return result;
}

}  // namespace namesim
