#include "namesim/config.hpp"

#include <fstream>

#include "namesim/error.hpp"

namespace namesim {

// One list of fields drives both directions so they cannot drift apart.
#define NAMESIM_CONFIG_FIELDS(X)                                                                                  \
  X(seed) X(input) X(input_format) X(sample) X(embedding) X(model) X(metric) X(q) X(prefix_scale) X(dim)        \
  X(optimizer) X(max_iters) X(tol) X(init) X(principal_axes) X(dims) X(bins) X(diagonal) X(ks_threshold) X(bases) \
  X(variants) X(center) X(ops) X(entities) X(dups) X(noise_scale) X(blind) X(binary) X(match_sample) X(sizes)    \
  X(reps) X(bench_threads) X(name) X(count) X(matrix_format)

void to_json(nlohmann::ordered_json& j, const PipelineConfig& c) {
  j = nlohmann::ordered_json::object();
#define X(field) j[#field] = c.field;
  NAMESIM_CONFIG_FIELDS(X)
#undef X
}

void from_json(const nlohmann::ordered_json& j, PipelineConfig& c) {
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  const nlohmann::ordered_json known = PipelineConfig{};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw InvalidArgument("unknown config key '" + key + "'");
  }
  try {
#define X(field) \
  if (j.contains(#field)) j.at(#field).get_to(c.field);
    NAMESIM_CONFIG_FIELDS(X)
#undef X
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("bad config value: ") + e.what());
  }
}

#undef NAMESIM_CONFIG_FIELDS

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("malformed config " + path.string() + ": " + e.what());
  }
  PipelineConfig c;
  from_json(j, c);
  return c;
}

void save_config(const PipelineConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << nlohmann::ordered_json(config).dump(2) << '\n';
  if (!out) throw IoError("error writing " + path.string());
}

}  // namespace namesim
