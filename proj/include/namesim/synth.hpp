#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "namesim/embed.hpp"
#include "namesim/model.hpp"
#include "namesim/random.hpp"

namespace namesim {

/// Number of records generated per entity. All three laws are constructions of
/// this library, not taken from observed ER data.
struct DupDist {
  enum class Kind { fixed, poisson, zipf };
  Kind kind = Kind::fixed;
  std::size_t k = 1;         // fixed
  double lambda = 0.0;       // poisson: count = 1 + Poisson(lambda)
  double s = 1.0;            // zipf exponent
  std::size_t max_dup = 1;   // zipf truncation

  /// "fixed:3", "poisson:1.5", "zipf:1.1:20".
  static DupDist parse(const std::string& text);
  std::string to_string() const;
  void validate() const;
  /// Draws the count for entity `index` (zipf ignores the rng).
  std::size_t draw(Rng& rng, std::uint64_t index) const;
};

struct GenerateOptions {
  std::size_t entities = 1000;
  DupDist dups;
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  /// Called with the number of entities emitted so far.
  std::function<void(std::size_t)> progress;
};

/// Receives records in record-id order.
class RecordSink {
 public:
  virtual ~RecordSink() = default;
  virtual void begin(std::size_t p, std::size_t entity_count) { (void)p, (void)entity_count; }
  virtual void record(std::uint64_t record_id, std::uint64_t entity_id, const double* values) = 0;
  virtual void finish(std::uint64_t record_count) { (void)record_count; }
};

struct GenerationSummary {
  std::uint64_t entity_count = 0;
  std::uint64_t record_count = 0;
};

/// Streams the dataset through the sinks. Entities are processed in fixed
/// blocks, each with its own RNG stream, so output is identical for any
/// thread count; memory is bounded by one batch of blocks.
GenerationSummary generate_streaming(const GaussianModel& model, const GenerateOptions& opts,
                                     const std::vector<RecordSink*>& sinks);

struct SyntheticDataset {
  /// Row e is entity e.
  Matrix entities;
  /// Row r is record r.
  Matrix records;
  std::vector<std::uint64_t> record_entity;

  std::size_t p() const { return static_cast<std::size_t>(entities.cols()); }
  std::size_t entity_count() const { return static_cast<std::size_t>(entities.rows()); }
  std::size_t record_count() const { return record_entity.size(); }
  bool operator==(const SyntheticDataset&) const = default;
};

SyntheticDataset generate_dataset(const GaussianModel& model, const GenerateOptions& opts);

/// Fraction of sampled noisy (non-first) records whose nearest entity vector is
/// their own entity. Falls back to all records when there are no noisy ones.
/// Ties with the true entity count as matches.
double nearest_entity_match_rate(const SyntheticDataset& ds, std::size_t sample, std::uint64_t seed,
                                 unsigned threads = 0);

/// Pooled covariance of noisy records about their entity's noise-free record.
Eigen::MatrixXd within_entity_covariance(const SyntheticDataset& ds);

// Sinks --------------------------------------------------------------------

/// `record_id,entity_id,v1..vp`; `blind` drops the entity_id column.
class RecordsCsvSink : public RecordSink {
 public:
  RecordsCsvSink(const std::filesystem::path& path, bool blind);
  void begin(std::size_t p, std::size_t entity_count) override;
  void record(std::uint64_t record_id, std::uint64_t entity_id, const double* values) override;
  void finish(std::uint64_t record_count) override;

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  bool blind_;
  std::size_t p_ = 0;
  std::string buffer_;
};

/// `record_id,entity_id`.
class TruthCsvSink : public RecordSink {
 public:
  explicit TruthCsvSink(const std::filesystem::path& path);
  void record(std::uint64_t record_id, std::uint64_t entity_id, const double* values) override;
  void finish(std::uint64_t record_count) override;

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::string buffer_;
};

/// NSDS little-endian binary: "NSDS", u16 version, u16 flags, u32 p,
/// u64 entity_count, u64 record_count, then per record u64 record_id,
/// u64 entity_id, p f64 values.
class BinarySink : public RecordSink {
 public:
  explicit BinarySink(const std::filesystem::path& path);
  void begin(std::size_t p, std::size_t entity_count) override;
  void record(std::uint64_t record_id, std::uint64_t entity_id, const double* values) override;
  void finish(std::uint64_t record_count) override;

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t p_ = 0;
};

class MemorySink : public RecordSink {
 public:
  void begin(std::size_t p, std::size_t entity_count) override;
  void record(std::uint64_t record_id, std::uint64_t entity_id, const double* values) override;
  void finish(std::uint64_t record_count) override;
  SyntheticDataset take();

 private:
  std::size_t p_ = 0;
  std::vector<double> entities_, records_;
  std::vector<std::uint64_t> record_entity_;
  std::size_t entity_count_ = 0;
};

/// Reads an NSDS file. Entity vectors are taken from each entity's first
/// (noise-free) record.
SyntheticDataset read_dataset_binary(const std::filesystem::path& path);

struct RecordsTable {
  std::vector<std::uint64_t> record_ids;
  std::optional<std::vector<std::uint64_t>> entity_ids;
  Matrix values;
};

RecordsTable read_records_csv(const std::filesystem::path& path);
/// record_id -> entity_id pairs in file order.
std::vector<std::pair<std::uint64_t, std::uint64_t>> read_truth_csv(const std::filesystem::path& path);

void write_gen_config(const GaussianModel& model, const GenerateOptions& opts, const GenerationSummary& summary,
                      const std::filesystem::path& path);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace namesim
