#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "igs/experiment.hpp"

using namespace igs;
namespace fs = std::filesystem;

namespace {

std::string tiny_config(const std::string& out_dir) {
  return R"({
    "name": "tiny",
    "problem": {
      "n": 24, "group_count": 4, "group_size": 2,
      "support": [0], "values": {"fill": 3.0},
      "sigma": 0.1, "design": "rademacher", "seed": 7, "reps": 2
    },
    "solvers": [
      {"algorithm": "alg1", "alpha": 1e-6, "gamma": 2e-3, "max_iters": 60, "stop": "fixed"}
    ],
    "output": {"dir": ")" + out_dir + R"(", "record_every": 2}
  })";
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

bool dirs_equal(const fs::path& a, const fs::path& b) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(a))
    names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());
  for (const auto& name : names)
    if (!fs::exists(b / name) || slurp(a / name) != slurp(b / name)) return false;
  return true;
}

}  // namespace

TEST_CASE("shipped presets parse and round-trip through serialization") {
  for (const auto& entry : fs::directory_iterator(IGS_CONFIGS_DIR)) {
    if (entry.path().extension() != ".json") continue;
    INFO("preset ", entry.path().string());
    ExperimentConfig c1 = load_config(entry.path().string());
    ExperimentConfig c2 = parse_config(serialize_config(c1));
    CHECK(c1 == c2);
    CHECK(parse_config(serialize_config(c2)) == c2);
  }
}

TEST_CASE("config validation points at the offending field") {
  auto expect_error = [](const std::string& text, const std::string& needle) {
    try {
      parse_config(text);
      FAIL_CHECK("expected a config error mentioning " << needle);
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_error("{", "not valid JSON");
  expect_error(R"({"name":"x","solvers":[],"output":{"dir":"o"}})", "problem");
  expect_error(R"({"name":"x","problem":{"group_count":2,"group_size":2,
    "support":[],"values":{"fill":1.0},"sigma":0.1,"design":"rademacher","seed":1,"reps":1},
    "solvers":[{"algorithm":"alg1"}],"output":{"dir":"o"}})", "problem.n");
  expect_error(R"({"name":"x","problem":{"n":4,"group_count":2,"group_size":2,
    "support":[5],"values":{"fill":1.0},"sigma":0.1,"design":"rademacher","seed":1,"reps":1},
    "solvers":[{"algorithm":"alg1"}],"output":{"dir":"o"}})", "problem.support");
  expect_error(R"({"name":"x","problem":{"n":4,"group_count":2,"group_size":2,
    "support":[0],"values":{"fill":1.0,"entries":[1.0]},"sigma":0.1,"design":"rademacher","seed":1,"reps":1},
    "solvers":[{"algorithm":"alg1"}],"output":{"dir":"o"}})", "problem.values");
  expect_error(R"({"name":"x","problem":{"n":6,"group_count":2,"group_size":2,
    "support":[0],"values":{"fill":1.0},"sigma":0.1,"design":"orthogonal","seed":1,"reps":1},
    "solvers":[{"algorithm":"alg1"}],"output":{"dir":"o"}})", "problem.design");
  expect_error(R"({"name":"x","problem":{"n":4,"group_count":2,"group_size":2,
    "support":[0],"values":{"fill":1.0},"sigma":0.1,"design":"rademacher","seed":1,"reps":1},
    "solvers":[{"algorithm":"sgd"}],"output":{"dir":"o"}})", "algorithm");
  expect_error(R"({"name":"x","problem":{"n":4,"group_count":2,"group_size":2,
    "support":[0],"values":{"fill":1.0},"sigma":0.1,"design":"rademacher","seed":1,"reps":1,"typo":1},
    "solvers":[{"algorithm":"alg1"}],"output":{"dir":"o"}})", "problem.typo");
}

TEST_CASE("problem construction is deterministic per repetition") {
  ExperimentConfig config = parse_config(tiny_config("unused"));
  Problem a = build_problem(config.problem, 0.1, 0);
  Problem b = build_problem(config.problem, 0.1, 0);
  Problem c = build_problem(config.problem, 0.1, 1);
  CHECK(a.X == b.X);
  CHECK(a.y == b.y);
  CHECK(a.X != c.X);
  REQUIRE(a.truth);
  CHECK(a.truth->support == std::vector<Index>{0});
}

TEST_CASE("run_experiment writes the documented artifacts deterministically") {
  const fs::path base = fs::temp_directory_path() / "igs_exp_test";
  fs::remove_all(base);
  const fs::path out1 = base / "run1";
  const fs::path out2 = base / "run2";

  ExperimentConfig config = parse_config(tiny_config(out1.string()));
  CHECK(run_experiment(config) == kExitOk);
  CHECK(fs::exists(out1 / "tiny_rep0.csv"));
  CHECK(fs::exists(out1 / "tiny_rep1.csv"));
  CHECK(fs::exists(out1 / "tiny_aggregate.csv"));
  CHECK(fs::exists(out1 / "tiny_coherence.txt"));
  CHECK(fs::exists(out1 / "tiny_bounds.txt"));
  CHECK(fs::exists(out1 / "tiny_summary.csv"));

  RunOverrides to_second;
  to_second.out_dir = out2.string();
  CHECK(run_experiment(config, to_second) == kExitOk);
  CHECK(dirs_equal(out1, out2));

  // Parallel repetitions must not change a single byte.
  const fs::path out3 = base / "run3";
  RunOverrides parallel;
  parallel.out_dir = out3.string();
  parallel.jobs = 2;
  CHECK(run_experiment(config, parallel) == kExitOk);
  CHECK(dirs_equal(out1, out3));

  // Seed override changes the payload.
  const fs::path out4 = base / "run4";
  RunOverrides reseeded;
  reseeded.out_dir = out4.string();
  reseeded.seed = 1234567;
  CHECK(run_experiment(config, reseeded) == kExitOk);
  CHECK(!dirs_equal(out1, out4));
  fs::remove_all(base);
}

TEST_CASE("diverging repetitions keep partial outputs and flag exit code 2") {
  const fs::path out = fs::temp_directory_path() / "igs_divergence_test";
  fs::remove_all(out);
  std::string text = tiny_config(out.string());
  // A step size far past stability makes the magnitudes explode.
  const std::string needle = "\"gamma\": 2e-3";
  text.replace(text.find(needle), needle.size(), "\"gamma\": 50.0");
  ExperimentConfig config = parse_config(text);
  CHECK(run_experiment(config) == kExitDivergence);
  CHECK(fs::exists(out / "tiny_rep0.csv"));
  CHECK(fs::exists(out / "tiny_summary.csv"));
  fs::remove_all(out);
}

TEST_CASE("cli exit codes distinguish config errors from verification results") {
  const std::string cli = IGS_CLI_PATH;
  auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  CHECK(run("presets") == kExitOk);
  CHECK(run("run definitely_not_a_preset") == kExitConfigError);
  CHECK(run("verify gradients") == kExitOk);
  CHECK(run("verify nonsense-suite") == kExitConfigError);

  const fs::path bad = fs::temp_directory_path() / "igs_bad_config.json";
  std::ofstream(bad) << "{\"name\": \"broken\"}";
  CHECK(run("run " + bad.string()) == kExitConfigError);
  fs::remove(bad);
}
