#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

namespace namesim {

/// Every setting that can influence a pipeline stage's output. Operational
/// knobs that do not (thread count, output directory, verbosity) live outside
/// so the resolved config is identical across reruns.
struct PipelineConfig {
  std::uint64_t seed = 0;

  std::string input;
  std::string input_format = "auto";  // auto | plain | name_frequency_csv
  std::size_t sample = 0;             // 0 = whole corpus
  std::string embedding;
  std::string model;

  std::string metric = "lv";
  std::size_t q = 2;
  double prefix_scale = 0.1;

  std::size_t dim = 6;
  std::string optimizer = "gd";
  std::size_t max_iters = 500;
  double tol = 1e-6;
  std::string init = "random";
  bool principal_axes = true;
  std::string dims = "1:10";
  std::size_t bins = 20;

  bool diagonal = false;
  double ks_threshold = 0.15;

  std::size_t bases = 20;
  std::size_t variants = 50;
  std::string center = "group_mean";  // group_mean | base_vector
  std::string ops = "insert,delete,substitute,transpose";

  std::size_t entities = 1000;
  std::string dups = "poisson:1.5";
  double noise_scale = 1.0;
  bool blind = false;
  bool binary = false;
  std::size_t match_sample = 0;

  std::string sizes = "512,1024,2048,4096";
  std::size_t reps = 5;
  unsigned bench_threads = 1;

  std::string name;
  std::size_t count = 10;

  std::string matrix_format = "nsdm";  // nsdm | csv

  bool operator==(const PipelineConfig&) const = default;
};

void to_json(nlohmann::ordered_json& j, const PipelineConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::ordered_json& j, PipelineConfig& c);

PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const PipelineConfig& config, const std::filesystem::path& path);

}  // namespace namesim
