#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "phononflux/cli_runner.hpp"

namespace {

// --model accepts inline JSON or a path to a JSON file.
nlohmann::json load_model_arg(const std::string& arg) {
  std::string text = arg;
  if (!arg.empty() && arg[0] != '{') {
    std::ifstream in(arg);
    if (!in) throw phononflux::ConfigError("cannot open model file " + arg,
                                           "/model");
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return nlohmann::json::parse(text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phononflux: harmonic-crystal dynamics laboratory"};
  app.require_subcommand(1);

  std::string model_arg = R"({"type":"elastic","d":1,"m":1.0})";
  std::string density_arg;
  std::string config_path;
  std::string out_dir = "out";
  int grid_n = 64;
  int trials = 100;
  std::uint64_t seed = 1;
  int threads = 0;
  double t_plus = 1.0, t_minus = 1.0;
  int cutoff_a = 0;
  std::vector<double> times;
  double clip = 0.0;
  bool assert_mode = false;
  std::vector<double> theta0;
  double width = 0.0;
  int support_radius = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", model_arg, "model spec (inline JSON or file)");
    sub->add_option("--grid", grid_n, "points per axis N (even)");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--trials", trials, "ensemble size M");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads,
                    "worker threads (0 = env PHONONFLUX_THREADS or cores)");
    sub->add_option("--time", times, "evolution times");
    sub->add_option("--T-plus", t_plus, "temperature of the + side");
    sub->add_option("--T-minus", t_minus, "temperature of the - side");
    sub->add_option("--cutoff-a", cutoff_a, "two-temperature cutoff a");
    sub->add_option("--density", density_arg, "density spec (inline JSON)");
    sub->add_option("--clip", clip, "odd clipping level (0 = off)");
    sub->add_option("--theta0", theta0, "test-function bump center");
    sub->add_option("--width", width, "test-function bump width");
    sub->add_option("--support-radius", support_radius,
                    "test-function spatial truncation (-1 = full)");
    sub->add_flag("--assert", assert_mode,
                  "exit 4 on acceptance failure (second-law)");
  };

  std::vector<std::string> tasks = {"dispersion", "check",      "evolve",
                                    "covariance", "limit-cov",  "current",
                                    "second-law", "clt",        "decay"};
  for (const auto& t : tasks) add_common(app.add_subcommand(t));
  CLI::App* run = app.add_subcommand("run", "execute a config file");
  run->add_option("config", config_path, "config JSON path")->required();
  run->add_option("--out", out_dir, "override output directory");
  run->add_flag("--assert", assert_mode, "exit 4 on acceptance failure");

  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json j;
    if (run->parsed()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "config error at /: cannot open " << config_path << "\n";
        return 2;
      }
      in >> j;
      if (run->count("--out")) j["output"]["dir"] = out_dir;
      if (assert_mode) j["assert"] = true;
    } else {
      std::string task = app.get_subcommands().front()->get_name();
      j["model"] = load_model_arg(model_arg);
      j["grid"]["N"] = grid_n;
      j["ensemble"]["M"] = trials;
      j["ensemble"]["master_seed"] = seed;
      j["temperatures"] = {{"T_plus", t_plus},
                           {"T_minus", t_minus},
                           {"cutoff_a", cutoff_a}};
      if (!density_arg.empty()) j["density"] = nlohmann::json::parse(density_arg);
      if (!times.empty()) j["times"] = times;
      j["observables"] = {task};
      j["output"] = {{"dir", out_dir}, {"precision", 17}};
      j["threads"] = threads;
      j["assert"] = assert_mode;
      j["clip"] = clip;
      if (!theta0.empty() || width > 0.0) {
        nlohmann::json tf;
        tf["type"] = "bump";
        if (!theta0.empty()) tf["theta0"] = theta0;
        if (width > 0.0) tf["width"] = width;
        tf["support_radius"] = support_radius;
        j["test_function"] = tf;
      }
    }
    phononflux::ExperimentConfig cfg = phononflux::parse_experiment_config(j);
    return phononflux::run_experiment(cfg);
  } catch (const phononflux::ConfigError& e) {
    std::cerr << "config error at " << e.pointer << ": " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error at /: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
}
