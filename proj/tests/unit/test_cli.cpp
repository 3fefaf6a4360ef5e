#include <doctest.h>

#include <json.hpp>

#include <sstream>

#include "namesim/cli.hpp"
#include "namesim/config.hpp"
#include "namesim/error.hpp"
#include "test_util.hpp"

using namespace namesim;

namespace {

struct Result {
  int code;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "namesim");
  std::ostringstream err;
  const int code = cli::run(args, err);
  return {code, err.str()};
}

const char* kNames = "SMITH\nSMYTH\nJONES\nJOHNSON\nJOHNSTON\nBROWN\nBRAUN\nNGUYEN\nWILLIAMS\nWILLIAMSON\nGARCIA\nMILLER\n";

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("cli exit codes") {
  test::TempDir dir;
  CHECK(run({"--help"}).code == 0);
  CHECK(run({}).code == 2);
  CHECK(run({"embed", "--no-such-flag"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);

  const auto missing = run({"embed", "--input", (dir / "absent.txt").string(), "--out-dir", (dir / "o").string()});
  CHECK(missing.code == 3);
  CHECK(std::count(missing.err.begin(), missing.err.end(), '\n') == 1);

  test::write_text(dir / "names.txt", kNames);
  CHECK(run({"embed", "--input", (dir / "names.txt").string(), "--metric", "hamming", "--out-dir", (dir / "o").string()}).code == 2);

  // Second column is a multiple of the first: singular covariance.
  std::string csv = "name,v1,v2\n";
  for (int i = 0; i < 8; ++i) csv += "N" + std::to_string(i) + "," + std::to_string(i) + "," + std::to_string(2 * i) + "\n";
  test::write_text(dir / "flat.csv", csv);
  CHECK(run({"mvncheck", "--embedding", (dir / "flat.csv").string(), "--out-dir", (dir / "m").string(), "--quiet"}).code == 4);
}

TEST_CASE("json error mode") {
  test::TempDir dir;
  const auto r = run({"embed", "--input", (dir / "absent.txt").string(), "--json-errors", "--out-dir", (dir / "o").string()});
  CHECK(r.code == 3);
  const auto j = nlohmann::json::parse(first_line(r.err));
  CHECK(j.at("exit_code") == 3);
  CHECK(j.at("error") == "io");
  CHECK(!j.at("message").get<std::string>().empty());
}

TEST_CASE("embed writes a name column plus p coordinates and the resolved config") {
  test::TempDir dir;
  test::write_text(dir / "names.txt", kNames);
  const auto out = dir / "emb";
  const auto r = run({"embed", "--input", (dir / "names.txt").string(), "--metric", "lv", "--dim", "6", "--seed", "7",
                      "--out-dir", out.string(), "--quiet"});
  REQUIRE(r.code == 0);
  const auto csv = test::read_bytes(out / "embedding.csv");
  CHECK(first_line(csv) == "name,v1,v2,v3,v4,v5,v6");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
  CHECK(std::filesystem::exists(out / "stress.json"));

  const auto cfg = load_config(out / "config.json");
  CHECK(cfg.seed == 7);
  CHECK(cfg.dim == 6);
  CHECK(cfg.metric == "lv");
  CHECK(cfg.optimizer == "gd");  // defaults are filled in
}

TEST_CASE("config JSON round trip and strictness") {
  PipelineConfig c;
  c.seed = 99;
  c.metric = "jw";
  c.prefix_scale = 0.2;
  c.dups = "zipf:1.2:20";
  c.noise_scale = 0.25;
  c.diagonal = true;
  const nlohmann::ordered_json j = c;
  CHECK(j.get<PipelineConfig>() == c);

  test::TempDir dir;
  save_config(c, dir / "c.json");
  CHECK(load_config(dir / "c.json") == c);

  test::write_text(dir / "bad.json", R"({"seed": 1, "colour": "blue"})");
  CHECK_THROWS_AS(load_config(dir / "bad.json"), InvalidArgument);
  test::write_text(dir / "names.txt", kNames);
  CHECK(run({"embed", "--config", (dir / "bad.json").string(), "--input", (dir / "names.txt").string(), "--out-dir",
             (dir / "o").string()})
            .code == 2);
}

TEST_CASE("explicit flags override the config file") {
  test::TempDir dir;
  test::write_text(dir / "names.txt", kNames);
  PipelineConfig c;
  c.input = (dir / "names.txt").string();
  c.dim = 2;
  c.seed = 3;
  save_config(c, dir / "c.json");

  REQUIRE(run({"embed", "--config", (dir / "c.json").string(), "--out-dir", (dir / "a").string(), "--quiet"}).code == 0);
  CHECK(first_line(test::read_bytes(dir / "a" / "embedding.csv")) == "name,v1,v2");

  REQUIRE(run({"embed", "--config", (dir / "c.json").string(), "--dim", "3", "--out-dir", (dir / "b").string(), "--quiet"})
              .code == 0);
  CHECK(first_line(test::read_bytes(dir / "b" / "embedding.csv")) == "name,v1,v2,v3");
  const auto resolved = load_config(dir / "b" / "config.json");
  CHECK(resolved.dim == 3);
  CHECK(resolved.seed == 3);  // untouched file values survive
}

TEST_CASE("outputs do not depend on the thread count") {
  test::TempDir dir;
  test::write_text(dir / "names.txt", kNames);
  for (const char* t : {"1", "4"}) {
    const auto out = (dir / (std::string("t") + t)).string();
    REQUIRE(run({"embed", "--input", (dir / "names.txt").string(), "--dim", "3", "--seed", "5", "--threads", t, "--out-dir",
                 out + "/emb", "--quiet"})
                .code == 0);
    REQUIRE(run({"fit", "--embedding", out + "/emb/embedding.csv", "--seed", "5", "--threads", t, "--out-dir", out + "/fit",
                 "--quiet"})
                .code == 0);
    // A fitted model has no error covariance, so only noise-free generation is possible.
    CHECK(run({"generate", "--model", out + "/fit/model.json", "--out-dir", out + "/bad", "--quiet"}).code == 2);
    REQUIRE(run({"generate", "--model", out + "/fit/model.json", "--entities", "300", "--dups", "poisson:1.5",
                 "--noise-scale", "0", "--seed", "5", "--threads", t, "--out-dir", out + "/gen", "--quiet"})
                .code == 0);
  }
  for (const char* f : {"emb/embedding.csv", "emb/stress.json", "fit/model.json", "fit/fit.json", "gen/records.csv",
                        "gen/truth.csv", "gen/gen_config.json"}) {
    CHECK_MESSAGE(test::read_bytes(dir / "t1" / f) == test::read_bytes(dir / "t4" / f), f);
  }
}
