#include "namesim/synth.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <charconv>
#include <cmath>

#include "namesim/binary_io.hpp"
#include "namesim/error.hpp"
#include "namesim/parallel.hpp"

namespace namesim {

namespace {

constexpr std::size_t kEntityBlock = 1024;
constexpr std::size_t kBlocksPerBatch = 64;
constexpr std::size_t kFlushBytes = 1 << 20;
constexpr std::uint16_t kNsdsVersion = 1;

template <typename T>
T parse_number(std::string_view text, const char* what) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw InvalidArgument(std::string("invalid ") + what + ": '" + std::string(text) + "'");
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

void append_u64(std::string& buf, std::uint64_t v) {
  char tmp[24];
  auto [ptr, ec] = std::to_chars(tmp, tmp + sizeof tmp, v);
  buf.append(tmp, ptr);
}

void append_double(std::string& buf, double v) {
  char tmp[32];
  auto [ptr, ec] = std::to_chars(tmp, tmp + sizeof tmp, v);
  buf.append(tmp, ptr);
}

void flush(std::ofstream& out, std::string& buf, const std::filesystem::path& path) {
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("error writing " + path.string());
  buf.clear();
}

/// Square-root factor for a PSD noise covariance. Uses Cholesky when possible
/// and a symmetric eigen square root otherwise (e.g. an all-zero matrix).
Eigen::MatrixXd noise_factor(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale) throw NumericalError("error covariance is not positive semidefinite");
  return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

struct Block {
  std::vector<double> values;       // records, row-major
  std::vector<std::uint32_t> counts;  // records per entity
};

}  // namespace

std::string format_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

// DupDist -------------------------------------------------------------------

DupDist DupDist::parse(const std::string& text) {
  const auto parts = split(text, ':');
  DupDist d;
  if (parts[0] == "fixed" && parts.size() == 2) {
    d.kind = Kind::fixed;
    d.k = parse_number<std::size_t>(parts[1], "duplicate count");
  } else if (parts[0] == "poisson" && parts.size() == 2) {
    d.kind = Kind::poisson;
    d.lambda = parse_number<double>(parts[1], "poisson mean");
  } else if (parts[0] == "zipf" && parts.size() == 3) {
    d.kind = Kind::zipf;
    d.s = parse_number<double>(parts[1], "zipf exponent");
    d.max_dup = parse_number<std::size_t>(parts[2], "zipf max_dup");
  } else {
    throw InvalidArgument("duplicate distribution must be fixed:K, poisson:LAMBDA or zipf:S:MAX, got '" + text + "'");
  }
  d.validate();
  return d;
}

std::string DupDist::to_string() const {
  switch (kind) {
    case Kind::fixed: return "fixed:" + std::to_string(k);
    case Kind::poisson: return "poisson:" + format_double(lambda);
    case Kind::zipf: return "zipf:" + format_double(s) + ":" + std::to_string(max_dup);
  }
  return {};
}

void DupDist::validate() const {
  switch (kind) {
    case Kind::fixed:
      if (k < 1) throw InvalidArgument("fixed duplicate count must be >= 1");
      break;
    case Kind::poisson:
      if (!std::isfinite(lambda) || lambda < 0.0) throw InvalidArgument("poisson mean must be finite and >= 0");
      break;
    case Kind::zipf:
      if (!std::isfinite(s) || s <= 0.0) throw InvalidArgument("zipf exponent must be > 0");
      if (max_dup < 1) throw InvalidArgument("zipf max_dup must be >= 1");
      break;
  }
}

std::size_t DupDist::draw(Rng& rng, std::uint64_t index) const {
  switch (kind) {
    case Kind::fixed: return k;
    case Kind::poisson: {
      if (lambda == 0.0) return 1;
      std::poisson_distribution<std::size_t> pois(lambda);
      return 1 + pois(rng);
    }
    case Kind::zipf: {
      const double raw = static_cast<double>(max_dup) * std::pow(static_cast<double>(index) + 1.0, -s);
      return std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(raw)), 1, max_dup);
    }
  }
  return 1;
}

// Generation -----------------------------------------------------------------

GenerationSummary generate_streaming(const GaussianModel& model, const GenerateOptions& opts,
                                     const std::vector<RecordSink*>& sinks) {
  if (opts.entities < 1) throw InvalidArgument("entity count must be >= 1");
  if (!std::isfinite(opts.noise_scale) || opts.noise_scale < 0.0) throw InvalidArgument("noise scale must be >= 0");
  opts.dups.validate();
  if (model.p < 1 || static_cast<std::size_t>(model.sigma.rows()) != model.p) throw InvalidArgument("model has no sigma");
  const bool noisy = opts.noise_scale > 0.0;
  if (noisy && !model.sigma_e) throw InvalidArgument("noise_scale > 0 needs a model with sigma_e");

  const std::size_t p = model.p;
  const MvnSampler entity_sampler(model.sigma, model.metadata.diagonal);
  Eigen::MatrixXd noise;
  if (noisy) noise = opts.noise_scale * noise_factor(*model.sigma_e);

  for (auto* s : sinks) s->begin(p, opts.entities);

  const std::uint64_t stream = derive_seed(opts.seed, tag_hash("generate"));
  const std::size_t block_count = (opts.entities + kEntityBlock - 1) / kEntityBlock;
  std::uint64_t record_id = 0;
  std::vector<Block> batch;

  for (std::size_t first = 0; first < block_count; first += kBlocksPerBatch) {
    const std::size_t in_batch = std::min(kBlocksPerBatch, block_count - first);
    batch.assign(in_batch, Block{});
    for_each_chunk(in_batch, 1, opts.threads, [&](std::size_t, std::size_t b, std::size_t) {
      const std::size_t block = first + b;
      const std::size_t e_begin = block * kEntityBlock;
      const std::size_t e_end = std::min(opts.entities, e_begin + kEntityBlock);
      Rng rng(derive_seed(stream, block));
      std::normal_distribution<double> normal(0.0, 1.0);
      std::vector<double> entity(p), scratch(p), z(p);
      Block& out = batch[b];
      out.counts.reserve(e_end - e_begin);
      for (std::size_t e = e_begin; e < e_end; ++e) {
        entity_sampler.draw(rng, normal, entity.data(), scratch.data());
        const std::size_t count = opts.dups.draw(rng, e);
        if (count > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("duplicate count too large");
        out.counts.push_back(static_cast<std::uint32_t>(count));
        out.values.insert(out.values.end(), entity.begin(), entity.end());
        for (std::size_t r = 1; r < count; ++r) {
          if (noisy) {
            for (auto& v : z) v = normal(rng);
            for (std::size_t i = 0; i < p; ++i) {
              double s = entity[i];
              for (std::size_t j = 0; j < p; ++j) s += noise(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * z[j];
              out.values.push_back(s);
            }
          } else {
            out.values.insert(out.values.end(), entity.begin(), entity.end());
          }
        }
      }
    });

    for (std::size_t b = 0; b < in_batch; ++b) {
      const double* row = batch[b].values.data();
      std::uint64_t entity_id = (first + b) * kEntityBlock;
      for (const auto count : batch[b].counts) {
        for (std::uint32_t r = 0; r < count; ++r, row += p, ++record_id) {
          for (auto* s : sinks) s->record(record_id, entity_id, row);
        }
        ++entity_id;
      }
    }
    batch.clear();
    if (opts.progress) opts.progress(std::min(opts.entities, (first + in_batch) * kEntityBlock));
  }

  for (auto* s : sinks) s->finish(record_id);
  return {opts.entities, record_id};
}

SyntheticDataset generate_dataset(const GaussianModel& model, const GenerateOptions& opts) {
  MemorySink sink;
  generate_streaming(model, opts, {&sink});
  return sink.take();
}

double nearest_entity_match_rate(const SyntheticDataset& ds, std::size_t sample, std::uint64_t seed,
                                 unsigned threads) {
  if (ds.record_count() == 0 || ds.entity_count() == 0) throw InvalidArgument("dataset is empty");
  if (sample < 1) throw InvalidArgument("match-rate sample must be >= 1");

  std::vector<std::size_t> candidates;
  for (std::size_t r = 1; r < ds.record_count(); ++r)
    if (ds.record_entity[r] == ds.record_entity[r - 1]) candidates.push_back(r);
  if (candidates.empty()) {
    candidates.resize(ds.record_count());
    std::iota(candidates.begin(), candidates.end(), std::size_t{0});
  }
  const std::size_t k = std::min(sample, candidates.size());
  Rng rng = make_rng(seed, "match_rate");
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
    std::swap(candidates[i], candidates[pick(rng)]);
  }

  std::vector<char> hit(k, 0);
  for_each_chunk(k, 16, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto rec = ds.records.row(static_cast<Eigen::Index>(candidates[i]));
      const auto truth = static_cast<Eigen::Index>(ds.record_entity[candidates[i]]);
      const double own = (ds.entities.row(truth) - rec).squaredNorm();
      bool nearest = true;
      for (Eigen::Index e = 0; e < ds.entities.rows() && nearest; ++e) {
        if (e != truth && (ds.entities.row(e) - rec).squaredNorm() < own) nearest = false;
      }
      hit[i] = nearest ? 1 : 0;
    }
  });
  return static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / static_cast<double>(k);
}

Eigen::MatrixXd within_entity_covariance(const SyntheticDataset& ds) {
  const auto p = static_cast<Eigen::Index>(ds.p());
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(p, p);
  std::size_t count = 0;
  for (std::size_t r = 1; r < ds.record_count(); ++r) {
    if (ds.record_entity[r] != ds.record_entity[r - 1]) continue;
    const Eigen::RowVectorXd dev =
        ds.records.row(static_cast<Eigen::Index>(r)) - ds.entities.row(static_cast<Eigen::Index>(ds.record_entity[r]));
    acc += dev.transpose() * dev;
    ++count;
  }
  if (count == 0) throw InvalidArgument("dataset has no duplicate records");
  return acc / static_cast<double>(count);
}

// Sinks ------------------------------------------------------------------------

RecordsCsvSink::RecordsCsvSink(const std::filesystem::path& path, bool blind)
    : path_(path), out_(path, std::ios::binary), blind_(blind) {
  if (!out_) throw IoError("cannot write " + path.string());
}

void RecordsCsvSink::begin(std::size_t p, std::size_t) {
  p_ = p;
  buffer_ = blind_ ? "record_id" : "record_id,entity_id";
  for (std::size_t c = 1; c <= p; ++c) buffer_ += ",v" + std::to_string(c);
  buffer_ += '\n';
}

void RecordsCsvSink::record(std::uint64_t record_id, std::uint64_t entity_id, const double* values) {
  append_u64(buffer_, record_id);
  if (!blind_) {
    buffer_ += ',';
    append_u64(buffer_, entity_id);
  }
  for (std::size_t c = 0; c < p_; ++c) {
    buffer_ += ',';
    append_double(buffer_, values[c]);
  }
  buffer_ += '\n';
  if (buffer_.size() >= kFlushBytes) flush(out_, buffer_, path_);
}

void RecordsCsvSink::finish(std::uint64_t) {
  flush(out_, buffer_, path_);
  out_.close();
  if (!out_) throw IoError("error writing " + path_.string());
}

TruthCsvSink::TruthCsvSink(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
  if (!out_) throw IoError("cannot write " + path.string());
  buffer_ = "record_id,entity_id\n";
}

void TruthCsvSink::record(std::uint64_t record_id, std::uint64_t entity_id, const double*) {
  append_u64(buffer_, record_id);
  buffer_ += ',';
  append_u64(buffer_, entity_id);
  buffer_ += '\n';
  if (buffer_.size() >= kFlushBytes) flush(out_, buffer_, path_);
}

void TruthCsvSink::finish(std::uint64_t) {
  flush(out_, buffer_, path_);
  out_.close();
  if (!out_) throw IoError("error writing " + path_.string());
}

BinarySink::BinarySink(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
  if (!out_) throw IoError("cannot write " + path.string());
}

void BinarySink::begin(std::size_t p, std::size_t entity_count) {
  p_ = p;
  out_.write("NSDS", 4);
  binio::put<std::uint16_t>(out_, kNsdsVersion);
  binio::put<std::uint16_t>(out_, 0);
  binio::put<std::uint32_t>(out_, static_cast<std::uint32_t>(p));
  binio::put<std::uint64_t>(out_, entity_count);
  binio::put<std::uint64_t>(out_, 0);  // record count, patched in finish()
}

void BinarySink::record(std::uint64_t record_id, std::uint64_t entity_id, const double* values) {
  binio::put(out_, record_id);
  binio::put(out_, entity_id);
  binio::put_f64s(out_, std::span<const double>(values, p_));
}

void BinarySink::finish(std::uint64_t record_count) {
  out_.seekp(4 + 2 + 2 + 4 + 8);
  binio::put(out_, record_count);
  out_.close();
  if (!out_) throw IoError("error writing " + path_.string());
}

void MemorySink::begin(std::size_t p, std::size_t entity_count) {
  p_ = p;
  entity_count_ = entity_count;
  entities_.reserve(entity_count * p);
}

void MemorySink::record(std::uint64_t, std::uint64_t entity_id, const double* values) {
  if (entity_id * p_ == entities_.size()) entities_.insert(entities_.end(), values, values + p_);
  records_.insert(records_.end(), values, values + p_);
  record_entity_.push_back(entity_id);
}

void MemorySink::finish(std::uint64_t) {}

SyntheticDataset MemorySink::take() {
  SyntheticDataset ds;
  const auto p = static_cast<Eigen::Index>(p_);
  ds.entities = Eigen::Map<const Matrix>(entities_.data(), static_cast<Eigen::Index>(entities_.size() / p_), p);
  ds.records = Eigen::Map<const Matrix>(records_.data(), static_cast<Eigen::Index>(record_entity_.size()), p);
  ds.record_entity = std::move(record_entity_);
  entities_.clear();
  records_.clear();
  return ds;
}

// Readers -----------------------------------------------------------------------

SyntheticDataset read_dataset_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  binio::expect_magic(in, "NSDS");
  const auto version = binio::get<std::uint16_t>(in);
  if (version != kNsdsVersion) throw IoError("unsupported NSDS version " + std::to_string(version));
  binio::get<std::uint16_t>(in);
  const auto p = binio::get<std::uint32_t>(in);
  const auto entity_count = binio::get<std::uint64_t>(in);
  const auto record_count = binio::get<std::uint64_t>(in);
  if (p < 1) throw IoError("NSDS file has dimension 0");

  const auto expected = std::filesystem::file_size(path);
  if (expected != 28 + record_count * (16 + 8ull * p)) throw IoError("NSDS file size does not match its header");

  MemorySink sink;
  sink.begin(p, entity_count);
  std::vector<double> row(p);
  std::uint64_t next_entity = 0;
  for (std::uint64_t r = 0; r < record_count; ++r) {
    const auto record_id = binio::get<std::uint64_t>(in);
    const auto entity_id = binio::get<std::uint64_t>(in);
    binio::get_f64s(in, row);
    if (record_id != r) throw IoError("NSDS records are out of order");
    if (entity_id == next_entity) ++next_entity;
    else if (entity_id + 1 != next_entity) throw IoError("NSDS entity ids are not grouped in order");
    sink.record(record_id, entity_id, row.data());
  }
  if (next_entity != entity_count) throw IoError("NSDS entity count does not match its header");
  return sink.take();
}

RecordsTable read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("records file is empty");
  const auto header = split(line, ',');
  if (header.empty() || header[0] != "record_id") throw InvalidArgument("records file lacks a record_id column");
  const bool has_entity = header.size() > 1 && header[1] == "entity_id";
  const std::size_t first_value = has_entity ? 2 : 1;
  const std::size_t p = header.size() - first_value;
  if (p < 1) throw InvalidArgument("records file has no value columns");

  RecordsTable t;
  if (has_entity) t.entity_ids.emplace();
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != header.size()) throw InvalidArgument("records line " + std::to_string(lineno) + " has wrong field count");
    t.record_ids.push_back(parse_number<std::uint64_t>(fields[0], "record id"));
    if (has_entity) t.entity_ids->push_back(parse_number<std::uint64_t>(fields[1], "entity id"));
    for (std::size_t c = first_value; c < fields.size(); ++c) values.push_back(parse_number<double>(fields[c], "value"));
  }
  t.values = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(t.record_ids.size()),
                                      static_cast<Eigen::Index>(p));
  return t;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> read_truth_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "record_id,entity_id") throw InvalidArgument("truth file lacks its header");
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2) throw InvalidArgument("truth line has wrong field count");
    out.emplace_back(parse_number<std::uint64_t>(fields[0], "record id"), parse_number<std::uint64_t>(fields[1], "entity id"));
  }
  return out;
}

void write_gen_config(const GaussianModel& model, const GenerateOptions& opts, const GenerationSummary& summary,
                      const std::filesystem::path& path) {
  auto matrix = [](const Eigen::MatrixXd& m) {
    auto rows = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      auto row = nlohmann::ordered_json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  nlohmann::ordered_json j;
  j["seed"] = opts.seed;
  j["entities"] = summary.entity_count;
  j["records"] = summary.record_count;
  j["dimension"] = model.p;
  j["duplicates"] = {{"spec", opts.dups.to_string()},
                     {"note", "duplicate-count laws are constructions of this tool, not estimated from data"},
                     {"first_record_noise_free", true}};
  j["noise_scale"] = opts.noise_scale;
  j["sigma"] = matrix(model.sigma);
  j["sigma_e"] = model.sigma_e ? matrix(*model.sigma_e) : nlohmann::ordered_json(nullptr);
  j["diagonal"] = model.metadata.diagonal;
  j["entity_block"] = kEntityBlock;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("error writing " + path.string());
}

}  // namespace namesim
