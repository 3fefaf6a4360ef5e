#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace namesim {

/// Decodes UTF-8 into Unicode scalar values. Throws InvalidArgument on
/// ill-formed input.
std::u32string to_scalars(std::string_view utf8);
std::string to_utf8(std::u32string_view scalars);

/// NFC, uppercase, surrounding whitespace trimmed. May return an empty string.
std::string normalize_name(std::string_view raw);

enum class CorpusFormat { plain, name_frequency_csv };

CorpusFormat parse_corpus_format(std::string_view text);
std::string_view to_string(CorpusFormat format);

/// An ordered set of normalized, unique, non-empty names with optional
/// per-name frequencies.
class NameCorpus {
 public:
  NameCorpus() = default;

  /// Normalizes every name, drops entries that normalize to empty and
  /// collapses duplicates onto their first occurrence (summing frequencies).
  /// Throws InvalidArgument if nothing survives or frequencies are malformed.
  static NameCorpus from_raw(const std::vector<std::string>& raw_names,
                             std::optional<std::vector<std::uint64_t>> frequencies,
                             std::string source_label);

  const std::vector<std::string>& names() const { return names_; }
  const std::optional<std::vector<std::uint64_t>>& frequencies() const { return frequencies_; }
  const std::string& source_label() const { return source_label_; }
  std::size_t size() const { return names_.size(); }
  const std::string& operator[](std::size_t i) const { return names_[i]; }

  /// Subset in the given index order. Indices must be distinct and in range.
  NameCorpus select(const std::vector<std::size_t>& indices, std::string source_label) const;

  friend bool operator==(const NameCorpus&, const NameCorpus&) = default;

 private:
  std::vector<std::string> names_;
  std::optional<std::vector<std::uint64_t>> frequencies_;
  std::string source_label_;
};

NameCorpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
void write_corpus(const NameCorpus& corpus, const std::filesystem::path& path,
                  CorpusFormat format);

/// Uniform sample of k names without replacement, in sampling order.
NameCorpus sample_names(const NameCorpus& corpus, std::size_t k, std::uint64_t seed);

enum class EditKind : std::uint8_t { insert, remove, substitute, transpose };

std::string_view to_string(EditKind kind);
EditKind parse_edit_kind(std::string_view text);

/// One single-character edit. `character` is meaningful for insert and
/// substitute only. Transpose swaps positions `position` and `position + 1`.
struct EditOp {
  EditKind kind{};
  std::size_t position = 0;
  char32_t character = 0;

  friend bool operator==(const EditOp&, const EditOp&) = default;
};

/// Applies `op` to a string of scalar values. Throws InvalidArgument if the
/// position is out of range for the kind.
std::u32string apply_edit(std::u32string_view name, const EditOp& op);
std::string apply_edit(std::string_view utf8_name, const EditOp& op);

struct ErrorVariantSet {
  std::string base_name;
  std::vector<std::string> variants;
  std::vector<EditOp> edit_ops;
};

inline const std::u32string& default_alphabet() {
  static const std::u32string alphabet = U"ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  return alphabet;
}

inline std::vector<EditKind> all_edit_kinds() {
  return {EditKind::insert, EditKind::remove, EditKind::substitute, EditKind::transpose};
}

/// Draws `count` single-edit variants of `name`. Each draw picks an allowed,
/// applicable edit kind uniformly, then a position uniformly, then (for insert
/// and substitute) a character uniformly from the alphabet. No-op edits are
/// never produced. Variants repeat only once every distinct single-edit
/// variant has been emitted.
ErrorVariantSet generate_edit_variants(std::string_view name, std::size_t count,
                                       const std::vector<EditKind>& ops,
                                       std::u32string_view alphabet, std::uint64_t seed);

}  // namespace namesim
