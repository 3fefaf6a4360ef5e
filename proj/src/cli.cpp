#include "namesim/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include "namesim/bench.hpp"
#include "namesim/config.hpp"
#include "namesim/corpus.hpp"
#include "namesim/diagnostics.hpp"
#include "namesim/embed.hpp"
#include "namesim/error.hpp"
#include "namesim/metrics.hpp"
#include "namesim/model.hpp"
#include "namesim/synth.hpp"

namespace namesim::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Runtime {
  unsigned threads = 0;
  std::string out_dir = ".";
  std::string config_path;
  bool quiet = false;
  bool json_errors = false;
};

/// Flags write into a scratch config; when --config is given the file is the
/// base and only flags actually passed on the command line override it.
class Bindings {
 public:
  template <typename Get>
  CLI::Option* option(CLI::App* app, const std::string& names, Get get, const std::string& desc) {
    auto* opt = app->add_option(names, get(cli_), desc)->capture_default_str();
    links_.emplace_back(opt, [get](PipelineConfig& dst, PipelineConfig& src) { get(dst) = get(src); });
    return opt;
  }

  template <typename Get>
  CLI::Option* flag(CLI::App* app, const std::string& names, Get get, const std::string& desc) {
    auto* opt = app->add_flag(names, get(cli_), desc);
    links_.emplace_back(opt, [get](PipelineConfig& dst, PipelineConfig& src) { get(dst) = get(src); });
    return opt;
  }

  PipelineConfig resolve(const std::string& config_path) {
    if (config_path.empty()) return cli_;
    PipelineConfig out = load_config(config_path);
    for (auto& [opt, copy] : links_)
      if (opt->count() > 0) copy(out, cli_);
    return out;
  }

 private:
  PipelineConfig cli_;
  std::vector<std::pair<CLI::Option*, std::function<void(PipelineConfig&, PipelineConfig&)>>> links_;
};

#define FIELD(f) [](PipelineConfig& c) -> auto& { return c.f; }

class Progress {
 public:
  Progress(std::ostream& err, bool quiet) : err_(err), quiet_(quiet), last_(Clock::now()) {}

  void note(const std::string& msg) {
    if (!quiet_) err_ << msg << '\n';
  }
  /// Throttled to one line per second.
  void tick(const std::string& msg) {
    const auto now = Clock::now();
    if (quiet_ || now - last_ < std::chrono::seconds(1)) return;
    last_ = now;
    err_ << msg << '\n';
  }

 private:
  using Clock = std::chrono::steady_clock;
  std::ostream& err_;
  bool quiet_;
  Clock::time_point last_;
};

struct Context {
  PipelineConfig cfg;
  Runtime rt;
  Progress& progress;

  fs::path out(const std::string& name) const { return fs::path(rt.out_dir) / name; }
};

// Helpers --------------------------------------------------------------------

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("error writing " + path.string());
}

std::string require(const std::string& value, const char* flag) {
  if (value.empty()) throw InvalidArgument(std::string(flag) + " is required");
  return value;
}

std::size_t parse_size(std::string_view text, const char* what) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw InvalidArgument(std::string("invalid ") + what + " '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  for (std::size_t start = 0;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

/// "1:10" or "2,4,6".
std::vector<std::size_t> parse_dims(const std::string& text) {
  std::vector<std::size_t> dims;
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    const auto lo = parse_size(std::string_view(text).substr(0, colon), "dimension range");
    const auto hi = parse_size(std::string_view(text).substr(colon + 1), "dimension range");
    if (lo < 1 || hi < lo) throw InvalidArgument("dimension range must be LO:HI with 1 <= LO <= HI");
    for (auto p = lo; p <= hi; ++p) dims.push_back(p);
  } else {
    for (auto part : split(text, ',')) dims.push_back(parse_size(part, "dimension"));
  }
  return dims;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  for (auto part : split(text, ',')) out.push_back(parse_size(part, "size"));
  return out;
}

std::vector<EditKind> parse_ops(const std::string& text) {
  std::vector<EditKind> ops;
  for (auto part : split(text, ',')) ops.push_back(parse_edit_kind(part));
  return ops;
}

CorpusFormat corpus_format(const PipelineConfig& c) {
  if (c.input_format != "auto") return parse_corpus_format(c.input_format);
  return fs::path(c.input).extension() == ".csv" ? CorpusFormat::name_frequency_csv : CorpusFormat::plain;
}

NameCorpus input_corpus(const Context& ctx) {
  const auto& c = ctx.cfg;
  NameCorpus corpus = load_corpus(require(c.input, "--input"), corpus_format(c));
  if (c.sample == 0) return corpus;
  if (c.sample > corpus.size()) {
    throw InvalidArgument("--sample " + std::to_string(c.sample) + " exceeds corpus size " + std::to_string(corpus.size()));
  }
  return sample_names(corpus, c.sample, c.seed);
}

Metric metric_of(const PipelineConfig& c) {
  Metric m = Metric::parse(c.metric, c.q, c.prefix_scale);
  m.validate();
  return m;
}

OptimizerOptions optimizer_options(const Context& ctx) {
  const auto& c = ctx.cfg;
  OptimizerOptions o;
  o.max_iters = c.max_iters;
  o.tol = c.tol;
  o.init = parse_init_method(c.init);
  o.principal_axes = c.principal_axes;
  o.seed = derive_seed(c.seed, tag_hash("embed"));
  o.threads = ctx.rt.threads;
  return o;
}

DissimilarityMatrix dissimilarities(const Context& ctx, const std::vector<std::string>& names, const Metric& metric) {
  ctx.progress.note("computing " + std::to_string(pair_count(names.size())) + " " + metric.label() + " dissimilarities");
  std::vector<std::u32string> scalars;
  scalars.reserve(names.size());
  for (const auto& s : names) scalars.push_back(to_scalars(s));
  return pairwise_matrix(scalars, metric, ctx.rt.threads);
}

json stress_json(const StressReport& s) {
  return {{"raw_stress", s.raw_stress},
          {"normalized_stress", s.normalized_stress},
          {"iterations", s.iterations},
          {"converged", s.converged}};
}

// Subcommands ------------------------------------------------------------------

void cmd_embed(const Context& ctx) {
  const auto corpus = input_corpus(ctx);
  const auto metric = metric_of(ctx.cfg);
  const auto delta = dissimilarities(ctx, corpus.names(), metric);
  ctx.progress.note("embedding " + std::to_string(corpus.size()) + " names in " + std::to_string(ctx.cfg.dim) + " dimensions");
  const auto emb = embed(delta, ctx.cfg.dim, parse_optimizer(ctx.cfg.optimizer), optimizer_options(ctx));
  write_embedding_csv(emb, corpus.names(), ctx.out("embedding.csv"));
  json j = {{"n", emb.n()}, {"p", emb.p()}, {"metric", metric.label()}, {"optimizer", emb.provenance.optimizer},
            {"init", emb.provenance.init}};
  j.update(stress_json(emb.stress));
  write_json(j, ctx.out("stress.json"));
}

void cmd_sweep(const Context& ctx) {
  const auto corpus = input_corpus(ctx);
  const auto metric = metric_of(ctx.cfg);
  const auto delta = dissimilarities(ctx, corpus.names(), metric);
  const auto dims = parse_dims(ctx.cfg.dims);
  ctx.progress.note("sweeping " + std::to_string(dims.size()) + " dimensions");
  const auto sweep = stress_dimension_sweep(delta, dims, optimizer_options(ctx), parse_optimizer(ctx.cfg.optimizer));
  write_sweep_csv(sweep, ctx.out("sweep.csv"));
}

struct LoadedEmbedding {
  std::vector<std::string> names;
  Matrix X;
};

LoadedEmbedding input_embedding(const Context& ctx) {
  LoadedEmbedding e;
  e.X = read_embedding_csv(require(ctx.cfg.embedding, "--embedding"), &e.names);
  return e;
}

void cmd_shepard(const Context& ctx) {
  const auto emb = input_embedding(ctx);
  const auto metric = metric_of(ctx.cfg);
  const auto delta = dissimilarities(ctx, emb.names, metric);
  const auto data = shepard(delta, emb.X, ctx.cfg.bins);
  write_shepard_pairs_csv(data, ctx.out("shepard_pairs.csv"));
  write_shepard_bins_csv(data, ctx.out("shepard_bins.csv"));
  write_json({{"n", emb.names.size()}, {"metric", metric.label()}, {"pearson_r", data.pearson_r}, {"bins", data.bins.size()}},
             ctx.out("shepard.json"));
}

void cmd_mvncheck(const Context& ctx) {
  const auto emb = input_embedding(ctx);
  const auto report = normality_report(emb.X);
  write_normality_json(report, independence_tests(emb.X), ctx.out("normality.json"));
  write_qq_csv(report.mahalanobis_sq, ctx.out("mahalanobis_qq.csv"));
  write_histograms_csv(emb.X, ctx.out("histograms.csv"));
}

double max_offdiag_correlation(const Eigen::MatrixXd& sigma) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < sigma.rows(); ++i)
    for (Eigen::Index j = i + 1; j < sigma.cols(); ++j) {
      const double d = std::sqrt(sigma(i, i) * sigma(j, j));
      if (d > 0.0) worst = std::max(worst, std::abs(sigma(i, j)) / d);
    }
  return worst;
}

void cmd_fit(const Context& ctx) {
  const auto emb = input_embedding(ctx);
  const auto metric = metric_of(ctx.cfg);
  auto model = fit_covariance(emb.X, ctx.cfg.diagonal);
  model.metadata.seed = ctx.cfg.seed;
  model.metadata.metric_label = metric.label();

  // Compare the source dissimilarities with distances among as many simulated
  // vectors as there are embedded names.
  const auto delta = dissimilarities(ctx, emb.names, metric);
  const Matrix sim = sample_mvn(model, emb.names.size(), derive_seed(ctx.cfg.seed, tag_hash("fit_ks")), ctx.rt.threads);
  const auto cmp = compare_distance_distributions(delta.values(), euclidean_pairwise(sim, ctx.rt.threads));
  model.metadata.ks_statistic = cmp.ks_statistic;
  model.metadata.ks_threshold = ctx.cfg.ks_threshold;

  save_model(model, ctx.out("model.json"));
  write_qq_csv(cmp.qq_pairs, ctx.out("distance_qq.csv"));
  write_json({{"n", emb.names.size()},
              {"p", model.p},
              {"ks_statistic", cmp.ks_statistic},
              {"ks_threshold", ctx.cfg.ks_threshold},
              {"ks_within_threshold", cmp.ks_statistic < ctx.cfg.ks_threshold},
              {"max_offdiag_correlation", max_offdiag_correlation(model.sigma)},
              {"ridge_applied", model.metadata.ridge}},
             ctx.out("fit.json"));
}

void cmd_calibrate(const Context& ctx) {
  const auto corpus = input_corpus(ctx);
  CalibrationOptions o;
  o.base_count = ctx.cfg.bases;
  o.variants_per_base = ctx.cfg.variants;
  o.p = ctx.cfg.dim;
  o.metric = metric_of(ctx.cfg);
  o.optimizer = parse_optimizer(ctx.cfg.optimizer);
  o.optimizer_options = optimizer_options(ctx);
  o.ops = parse_ops(ctx.cfg.ops);
  if (ctx.cfg.center == "group_mean") o.center = GroupCenter::group_mean;
  else if (ctx.cfg.center == "base_vector") o.center = GroupCenter::base_vector;
  else throw InvalidArgument("--center must be group_mean or base_vector");
  o.diagonal = ctx.cfg.diagonal;
  o.seed = ctx.cfg.seed;
  ctx.progress.note("calibrating on " + std::to_string(corpus.size()) + " names + " +
                    std::to_string(o.base_count * o.variants_per_base) + " variants");
  const auto res = calibrate_error_model(corpus, o);

  save_model(res.model, ctx.out("model.json"));
  write_embedding_csv(res.embedding, res.labels, ctx.out("calibration_embedding.csv"));
  json groups = json::array();
  for (std::size_t k = 0; k < res.base_rows.size(); ++k)
    groups.push_back({{"base", res.labels[res.base_rows[k]]}, {"variants", res.variant_rows[k].size()}});
  json j = {{"gamma1", res.report.gamma1},
            {"gammas", res.report.gammas},
            {"center", ctx.cfg.center},
            {"groups", groups},
            {"ridge_sigma", res.model.metadata.ridge},
            {"ridge_sigma_e", res.model.metadata.ridge_e}};
  j["stress"] = stress_json(res.embedding.stress);
  write_json(j, ctx.out("calibration.json"));
}

void cmd_generate(const Context& ctx) {
  const auto model = load_model(require(ctx.cfg.model, "--model"));
  GenerateOptions o;
  o.entities = ctx.cfg.entities;
  o.dups = DupDist::parse(ctx.cfg.dups);
  o.noise_scale = ctx.cfg.noise_scale;
  o.seed = ctx.cfg.seed;
  o.threads = ctx.rt.threads;
  o.progress = [&](std::size_t done) {
    ctx.progress.tick("generated " + std::to_string(done) + " / " + std::to_string(o.entities) + " entities");
  };

  RecordsCsvSink records(ctx.out("records.csv"), ctx.cfg.blind);
  TruthCsvSink truth(ctx.out("truth.csv"));
  std::vector<RecordSink*> sinks{&records, &truth};
  std::optional<BinarySink> binary;
  if (ctx.cfg.binary) sinks.push_back(&binary.emplace(ctx.out("records.nsds")));
  MemorySink memory;
  if (ctx.cfg.match_sample > 0) sinks.push_back(&memory);

  const auto summary = generate_streaming(model, o, sinks);
  write_gen_config(model, o, summary, ctx.out("gen_config.json"));
  if (ctx.cfg.match_sample > 0) {
    const auto ds = memory.take();
    const double rate = nearest_entity_match_rate(ds, ctx.cfg.match_sample, ctx.cfg.seed, ctx.rt.threads);
    write_json({{"sample", std::min(ctx.cfg.match_sample, ds.record_count())}, {"match_rate", rate}},
               ctx.out("match_rate.json"));
  }
  ctx.progress.note("wrote " + std::to_string(summary.record_count) + " records for " +
                    std::to_string(summary.entity_count) + " entities");
}

void cmd_bench(const Context& ctx) {
  const auto corpus = load_corpus(require(ctx.cfg.input, "--input"), corpus_format(ctx.cfg));
  const auto model = load_model(require(ctx.cfg.model, "--model"));
  BenchOptions o;
  o.sizes = parse_sizes(ctx.cfg.sizes);
  o.reps = ctx.cfg.reps;
  o.seed = ctx.cfg.seed;
  o.threads = ctx.cfg.bench_threads;
  ctx.progress.note("benchmarking sizes " + ctx.cfg.sizes);
  const auto report = run_benchmark(corpus, model, o);
  write_bench_csv(report, ctx.out("bench.csv"));
  write_bench_json(report, ctx.out("bench.json"));
}

void cmd_variants(const Context& ctx) {
  const auto base = normalize_name(require(ctx.cfg.name, "--name"));
  const auto set = generate_edit_variants(base, ctx.cfg.count, parse_ops(ctx.cfg.ops), default_alphabet(),
                                          derive_seed(ctx.cfg.seed, tag_hash("variants")));
  std::ofstream out(ctx.out("variants.csv"));
  if (!out) throw IoError("cannot write " + ctx.out("variants.csv").string());
  out << "base,variant,op,position,character,levenshtein\n";
  const auto b = to_scalars(base);
  for (std::size_t i = 0; i < set.variants.size(); ++i) {
    const auto& op = set.edit_ops[i];
    const bool has_char = op.kind == EditKind::insert || op.kind == EditKind::substitute;
    out << base << ',' << set.variants[i] << ',' << to_string(op.kind) << ',' << op.position << ','
        << (has_char ? to_utf8(std::u32string(1, op.character)) : "") << ','
        << levenshtein(b, to_scalars(set.variants[i])) << '\n';
  }
  if (!out) throw IoError("error writing variants.csv");
}

void cmd_matrix(const Context& ctx) {
  const auto corpus = input_corpus(ctx);
  const auto delta = dissimilarities(ctx, corpus.names(), metric_of(ctx.cfg));
  write_corpus(corpus, ctx.out("names.txt"), CorpusFormat::plain);
  if (ctx.cfg.matrix_format == "nsdm") write_dissimilarity(delta, ctx.out("matrix.nsdm"));
  else if (ctx.cfg.matrix_format == "csv") write_dissimilarity_csv(delta, ctx.out("matrix.csv"));
  else throw InvalidArgument("--matrix-format must be nsdm or csv");
}

// Error reporting ------------------------------------------------------------

void report_error(std::ostream& err, bool as_json, const std::string& kind, int code, const std::string& msg) {
  if (as_json) {
    err << json{{"error", kind}, {"exit_code", code}, {"message", msg}}.dump() << '\n';
  } else {
    err << "error: " << msg << '\n';
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& err) {
  const bool json_errors = std::find(args.begin(), args.end(), "--json-errors") != args.end();

  CLI::App app{"Embed name corpora, fit Gaussian name models and synthesize entity-resolution test data."};
  app.name(args.empty() ? "namesim" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);
  Runtime rt;
  Bindings bind;

  using Handler = void (*)(const Context&);
  std::vector<std::pair<CLI::App*, Handler>> commands;

  auto common = [&](CLI::App* sub) {
    bind.option(sub, "--seed", FIELD(seed), "Master random seed");
    sub->add_option("--config", rt.config_path, "JSON config; explicit flags take precedence");
    sub->add_option("--out-dir", rt.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--threads", rt.threads, "Worker threads (0 = available parallelism)")->capture_default_str();
    sub->add_flag("--quiet", rt.quiet, "Suppress progress messages");
    sub->add_flag("--json-errors", rt.json_errors, "Report errors as one JSON line");
  };
  auto input = [&](CLI::App* sub) {
    bind.option(sub, "--input", FIELD(input), "Name corpus file");
    bind.option(sub, "--format", FIELD(input_format), "auto, plain or name_frequency_csv");
    bind.option(sub, "--sample", FIELD(sample), "Use a seeded sample of this many names (0 = all)");
  };
  auto metric = [&](CLI::App* sub) {
    bind.option(sub, "--metric", FIELD(metric), "lv, lcs, qgram, jaccard or jw");
    bind.option(sub, "--q", FIELD(q), "q-gram length");
    bind.option(sub, "--prefix-scale", FIELD(prefix_scale), "Jaro-Winkler prefix scale");
  };
  auto optimizer = [&](CLI::App* sub) {
    bind.option(sub, "--dim", FIELD(dim), "Embedding dimension");
    bind.option(sub, "--optimizer", FIELD(optimizer), "gd or smacof");
    bind.option(sub, "--max-iters", FIELD(max_iters), "Iteration cap");
    bind.option(sub, "--tol", FIELD(tol), "Relative stress-change tolerance");
    bind.option(sub, "--init", FIELD(init), "random or classical");
    bind.flag(sub, "--principal-axes,!--no-principal-axes", FIELD(principal_axes), "Rotate result to principal axes");
  };
  auto add = [&](const char* name, const char* desc, Handler h) {
    auto* sub = app.add_subcommand(name, desc);
    common(sub);
    commands.emplace_back(sub, h);
    return sub;
  };

  auto* s = add("embed", "Embed a name corpus with least-squares MDS", cmd_embed);
  input(s), metric(s), optimizer(s);

  s = add("sweep", "Normalized stress across embedding dimensions (warm started)", cmd_sweep);
  input(s), metric(s), optimizer(s);
  bind.option(s, "--dims", FIELD(dims), "LO:HI or a comma list");

  s = add("shepard", "Shepard diagram data for an embedding", cmd_shepard);
  bind.option(s, "--embedding", FIELD(embedding), "Embedding CSV");
  metric(s);
  bind.option(s, "--bins", FIELD(bins), "Bins for non-integer dissimilarities");

  s = add("mvncheck", "Multivariate normality and independence diagnostics", cmd_mvncheck);
  bind.option(s, "--embedding", FIELD(embedding), "Embedding CSV");

  s = add("fit", "Fit the Gaussian name model to an embedding", cmd_fit);
  bind.option(s, "--embedding", FIELD(embedding), "Embedding CSV");
  metric(s);
  bind.flag(s, "--diagonal,!--full", FIELD(diagonal), "Keep variances only");
  bind.option(s, "--ks-threshold", FIELD(ks_threshold), "Bound recorded for the distance-distribution KS statistic");

  s = add("calibrate", "Calibrate the error covariance from edit variants", cmd_calibrate);
  input(s), metric(s), optimizer(s);
  bind.option(s, "--bases", FIELD(bases), "Number of base names");
  bind.option(s, "--variants", FIELD(variants), "Variants per base name");
  bind.option(s, "--center", FIELD(center), "group_mean or base_vector");
  bind.option(s, "--ops", FIELD(ops), "Allowed edit kinds");
  bind.flag(s, "--diagonal,!--full", FIELD(diagonal), "Keep variances only");

  s = add("generate", "Generate a synthetic ER dataset from a model", cmd_generate);
  bind.option(s, "--model", FIELD(model), "Model JSON");
  bind.option(s, "--entities", FIELD(entities), "Entity count");
  bind.option(s, "--dups", FIELD(dups), "fixed:K, poisson:LAMBDA or zipf:S:MAX");
  bind.option(s, "--noise-scale", FIELD(noise_scale), "Multiplier on the error draws");
  bind.flag(s, "--blind,!--no-blind", FIELD(blind), "Omit entity_id from records.csv");
  bind.flag(s, "--binary,!--no-binary", FIELD(binary), "Also write records.nsds");
  bind.option(s, "--match-sample", FIELD(match_sample), "Records sampled for the nearest-entity match rate (0 = skip)");

  s = add("bench", "Time all-pairs string vs Euclidean distances", cmd_bench);
  bind.option(s, "--input", FIELD(input), "Name corpus file");
  bind.option(s, "--format", FIELD(input_format), "auto, plain or name_frequency_csv");
  bind.option(s, "--model", FIELD(model), "Model JSON for the vectors");
  bind.option(s, "--sizes", FIELD(sizes), "Comma-separated N values");
  bind.option(s, "--reps", FIELD(reps), "Timed repetitions per size");
  bind.option(s, "--bench-threads", FIELD(bench_threads), "Threads inside the timed kernels");

  s = add("variants", "Generate edit variants of one name", cmd_variants);
  bind.option(s, "--name", FIELD(name), "Base name");
  bind.option(s, "--count", FIELD(count), "Number of variants");
  bind.option(s, "--ops", FIELD(ops), "Allowed edit kinds");

  s = add("matrix", "Write the pairwise dissimilarity matrix", cmd_matrix);
  input(s), metric(s);
  bind.option(s, "--matrix-format", FIELD(matrix_format), "nsdm or csv");

  try {
    std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(rest.begin(), rest.end());
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, std::cout, err);
      return 0;
    }
    report_error(err, json_errors, "usage", 2, e.what());
    return 2;
  }

  try {
    Progress progress(err, rt.quiet);
    for (auto& [sub, handler] : commands) {
      if (!sub->parsed()) continue;
      Context ctx{bind.resolve(rt.config_path), rt, progress};
      std::error_code ec;
      fs::create_directories(rt.out_dir, ec);
      if (ec) throw IoError("cannot create output directory " + rt.out_dir + ": " + ec.message());
      save_config(ctx.cfg, ctx.out("config.json"));
      handler(ctx);
    }
    return 0;
  } catch (const InvalidArgument& e) {
    report_error(err, rt.json_errors, "invalid_argument", 2, e.what());
    return 2;
  } catch (const IoError& e) {
    report_error(err, rt.json_errors, "io", 3, e.what());
    return 3;
  } catch (const fs::filesystem_error& e) {
    report_error(err, rt.json_errors, "io", 3, e.what());
    return 3;
  } catch (const NumericalError& e) {
    report_error(err, rt.json_errors, "numerical", 4, e.what());
    return 4;
  } catch (const std::exception& e) {
    report_error(err, rt.json_errors, "internal", 1, e.what());
    return 1;
  }
}

int run(int argc, char** argv) {
  return run(std::vector<std::string>(argv, argv + argc), std::cerr);
}

}  // namespace namesim::cli
