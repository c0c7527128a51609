#include "speclab/experiments.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace speclab;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "speclab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("speclab_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path small_study_config(const fs::path& dir) {
  const fs::path cfg = dir / "study.cfg";
  std::ofstream(cfg) << "n_grid=50,100,200,400\ntrials=20\noracle_m=400\n";
  return cfg;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("exit codes for bad input") {
  CHECK(run({"rate-study", "--config", "/nonexistent/nope.cfg"}) == 1);
  CHECK(run({"rate-study", "--no-such-flag"}) == 1);
  CHECK(run({"frobnicate"}) == 1);
  CHECK(run({"nk-demo", "--n", "4", "--k", "4"}) == 1);
  CHECK(run({"--help"}) == 0);
}

TEST_CASE("nk-demo writes its report") {
  const fs::path dir = scratch("nk");
  CHECK(run({"nk-demo", "--n", "8", "--k", "2", "--eps", "1e-3", "--seed", "1", "--out", dir.string()}) == 0);
  const std::string rep = slurp(dir / "nk_demo.txt");
  CHECK(rep.find("passes=1") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("rate-study output is reproducible across runs and thread counts") {
  const fs::path dir = scratch("study");
  const fs::path cfg = small_study_config(dir);
  const std::string a = (dir / "a").string(), b = (dir / "b").string(), c = (dir / "c").string();
  REQUIRE(run({"rate-study", "--config", cfg.string(), "--out", a}) == 0);
  REQUIRE(run({"rate-study", "--config", cfg.string(), "--out", b}) == 0);
  REQUIRE(run({"rate-study", "--config", cfg.string(), "--threads", "2", "--out", c}) == 0);
  for (const char* f : {"rate_study.csv", "summary.csv", "fit.txt"}) {
    const std::string ref = slurp(fs::path(a) / f);
    CHECK_FALSE(ref.empty());
    CHECK(slurp(fs::path(b) / f) == ref);
    CHECK(slurp(fs::path(c) / f) == ref);
  }
  fs::remove_all(dir);
}

TEST_CASE("oracle, embed, kpca and align subcommands") {
  const fs::path dir = scratch("single");
  const fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "n=120\noracle_m=400\n";
  const std::string out = dir.string();
  CHECK(run({"oracle", "--config", cfg.string(), "--out", out}) == 0);
  CHECK(fs::exists(dir / "oracle.meta.txt"));
  CHECK(fs::exists(dir / "oracle.nodes.csv"));
  CHECK(run({"embed", "--config", cfg.string(), "--seed", "3", "--out", out}) == 0);
  CHECK(fs::exists(dir / "embedding.csv"));
  CHECK(run({"kpca", "--config", cfg.string(), "--seed", "3", "--out", out}) == 0);
  CHECK(fs::exists(dir / "kpca.csv"));
  CHECK(run({"align", "--config", cfg.string(), "--seed", "3", "--out", out}) == 0);
  CHECK(slurp(dir / "alignment.txt").find("error") != std::string::npos);
  fs::remove_all(dir);
}

}  // TEST_SUITE
