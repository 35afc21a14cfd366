#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "phononflux/cli_runner.hpp"
#include "phononflux/io.hpp"

using namespace phononflux;
namespace fs = std::filesystem;

namespace {

nlohmann::json base_config() {
  return nlohmann::json::parse(R"({
    "model": {"type": "elastic", "d": 1, "m": 1.0},
    "grid": {"N": 32},
    "ensemble": {"M": 50, "master_seed": 9},
    "temperatures": {"T_plus": 2.0, "T_minus": 1.0, "cutoff_a": 0},
    "times": [0.0, 4.0],
    "observables": [],
    "output": {"dir": "out", "precision": 17}
  })");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config validation reports JSON pointers") {
  auto good = base_config();
  CHECK_NOTHROW(parse_experiment_config(good));

  auto bad = good;
  bad["grid"]["N"] = 33;
  try {
    parse_experiment_config(bad);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(e.pointer == "/grid/N");
  }

  bad = good;
  bad.erase("model");
  try {
    parse_experiment_config(bad);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(e.pointer == "/model");
  }

  bad = good;
  bad["observables"] = {"no-such-task"};
  CHECK_THROWS_AS(parse_experiment_config(bad), ConfigError);

  bad = good;
  bad["temperatures"]["T_plus"] = -1.0;
  CHECK_THROWS_AS(parse_experiment_config(bad), ConfigError);
}

TEST_CASE("density and test-function specs") {
  InteractionMatrix model = InteractionMatrix::elastic(1, 1.0);
  TorusGrid grid(1, 64);
  DispersionData data(model, grid);

  SpectralDensity gibbs = density_from_spec(
      nlohmann::json::parse(R"({"type":"gibbs","T":1.5})"), data);
  CHECK(gibbs.at(0)(1, 1).real() == doctest::Approx(1.5));

  SpectralDensity tri = density_from_spec(
      nlohmann::json::parse(R"({"type":"triangular","N0":2,"scale":1.0})"),
      data);
  CHECK(tri.at(0)(0, 0).real() == doctest::Approx(4.0));

  CHECK_THROWS_AS(
      density_from_spec(nlohmann::json::parse(R"({"type":"nope"})"), data),
      ConfigError);

  TestFunction bump = test_function_from_spec(
      nlohmann::json::parse(
          R"({"type":"bump","theta0":[1.5707963267948966],"width":0.39269908169872414})"),
      data);
  CHECK(bump.d0_certified);

  TestFunction sites = test_function_from_spec(
      nlohmann::json::parse(
          R"({"type":"sites","sites":[{"x":[0],"value":[1,0]},{"x":[1],"value":[3,0]},{"x":[3],"value":[-3,0]},{"x":[4],"value":[-1,0]}]})"),
      data);
  CHECK(sites.d0_certified);
  CHECK(sites.support.size() == 4);
}

TEST_CASE("default decay function has exact spectral zeros on the mask") {
  for (int d : {1, 2}) {
    InteractionMatrix model = InteractionMatrix::elastic(d, 1.0);
    TorusGrid grid(d, d == 1 ? 128 : 32);
    DispersionData data(model, grid);
    TestFunction psi = default_decay_function(data, model);
    CHECK(psi.d0_certified);
    CHECK(psi.leak < 1e-12);
    CHECK(psi.support.size() < 60u);  // genuinely short-range
  }
}

TEST_CASE("decay probe: d = 1 slope matches t^{-1/2} over [10, 100]") {
  InteractionMatrix model = InteractionMatrix::elastic(1, 1.0);
  TorusGrid grid(1, 2048);
  DispersionData data(model, grid);
  TestFunction psi = default_decay_function(data, model);
  std::vector<double> times;
  for (double t = 10.0; t <= 100.0; t += 10.0) times.push_back(t);
  DecayReport rep = decay_probe(data, psi, times);
  CHECK(rep.slope == doctest::Approx(-0.5).epsilon(0.3));
  CHECK(std::abs(rep.slope + 0.5) < 0.15);
  CHECK(rep.tail_ratio < 1e-6);

  SUBCASE("uncertified input is refused") {
    TestFunction bad = psi;
    bad.d0_certified = false;
    CHECK_THROWS_AS(decay_probe(data, bad, times), std::invalid_argument);
  }
}

TEST_CASE("run_experiment writes manifest only for empty observables") {
  auto cfg_json = base_config();
  fs::path dir = fs::temp_directory_path() / "pf_manifest_only";
  fs::remove_all(dir);
  cfg_json["output"]["dir"] = dir.string();
  ExperimentConfig cfg = parse_experiment_config(cfg_json);
  CHECK(run_experiment(cfg) == 0);
  CHECK(fs::exists(dir / "manifest.json"));
  int files = 0;
  for (auto& e : fs::directory_iterator(dir)) {
    (void)e;
    ++files;
  }
  CHECK(files == 1);
}

TEST_CASE("dispersion task writes one row per node per branch") {
  auto cfg_json = base_config();
  cfg_json["grid"]["N"] = 64;
  cfg_json["observables"] = {"dispersion"};
  fs::path dir = fs::temp_directory_path() / "pf_dispersion";
  fs::remove_all(dir);
  cfg_json["output"]["dir"] = dir.string();
  CHECK(run_experiment(parse_experiment_config(cfg_json)) == 0);
  std::string body = slurp(dir / "dispersion.csv");
  int rows = static_cast<int>(std::count(body.begin(), body.end(), '\n'));
  CHECK(rows == 65);  // header + 64 nodes x 1 branch
}

TEST_CASE("identical configs produce byte-identical CSV bodies") {
  auto cfg_json = base_config();
  cfg_json["observables"] = {"dispersion", "check", "covariance", "clt"};
  cfg_json["ensemble"]["M"] = 1200;
  cfg_json["times"] = {3.0};
  cfg_json["test_function"] = nlohmann::json::parse(
      R"({"type":"sites","sites":[{"x":[0],"value":[1,0]},{"x":[1],"value":[3,0]},{"x":[3],"value":[-3,0]},{"x":[4],"value":[-1,0]}]})");
  cfg_json["density"] = {{"type", "triangular"}, {"N0", 1}, {"scale", 1.0}};
  cfg_json["clip"] = 1.0;

  fs::path dir_a = fs::temp_directory_path() / "pf_det_a";
  fs::path dir_b = fs::temp_directory_path() / "pf_det_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  auto ca = cfg_json;
  ca["output"]["dir"] = dir_a.string();
  auto cb = cfg_json;
  cb["output"]["dir"] = dir_b.string();
  cb["threads"] = 4;  // thread count must not change results
  CHECK(run_experiment(parse_experiment_config(ca)) == 0);
  CHECK(run_experiment(parse_experiment_config(cb)) == 0);

  for (const char* name :
       {"dispersion.csv", "conditions.csv", "covariance.csv", "clt.csv"}) {
    CAPTURE(name);
    CHECK(slurp(dir_a / name) == slurp(dir_b / name));
  }
}

TEST_CASE("second-law task passes and writes verdict rows") {
  auto cfg_json = base_config();
  cfg_json["grid"]["N"] = 128;
  cfg_json["ensemble"]["M"] = 200;
  cfg_json["times"] = {15.0};
  cfg_json["observables"] = {"second-law"};
  cfg_json["assert"] = true;
  fs::path dir = fs::temp_directory_path() / "pf_secondlaw";
  fs::remove_all(dir);
  cfg_json["output"]["dir"] = dir.string();
  CHECK(run_experiment(parse_experiment_config(cfg_json)) == 0);
  std::string body = slurp(dir / "second_law.csv");
  CHECK(body.find("PASS") != std::string::npos);
  CHECK(body.find("mc") != std::string::npos);
}

TEST_CASE("clt task rejects clipping of a non-white density") {
  auto cfg_json = base_config();
  cfg_json["observables"] = {"clt"};
  cfg_json["density"] = {{"type", "triangular"}, {"N0", 3}, {"scale", 1.0}};
  cfg_json["clip"] = 1.0;
  cfg_json["ensemble"]["M"] = 1000;
  cfg_json["test_function"] = nlohmann::json::parse(
      R"({"type":"sites","sites":[{"x":[0],"value":[1,0]},{"x":[1],"value":[3,0]},{"x":[3],"value":[-3,0]},{"x":[4],"value":[-1,0]}]})");
  fs::path dir = fs::temp_directory_path() / "pf_clt_reject";
  fs::remove_all(dir);
  cfg_json["output"]["dir"] = dir.string();
  // The task fails (numeric failure path), manifest records the error.
  CHECK(run_experiment(parse_experiment_config(cfg_json)) == 3);
  nlohmann::json manifest;
  std::ifstream(dir / "manifest.json") >> manifest;
  CHECK(manifest["errors"].size() == 1);
}

TEST_CASE("csv doubles are round-trip exact at precision 17") {
  double v = 0.1234567890123456789;
  std::string s = format_double(v, 17);
  CHECK(std::stod(s) == v);
}
