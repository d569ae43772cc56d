// Command-line front end: run experiments, sweep over axes, generate
// synthetic datasets and re-derive metrics from stored accuracy matrices.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ocl/config.hpp"
#include "ocl/errors.hpp"
#include "ocl/harness.hpp"
#include "ocl/metrics.hpp"
#include "ocl/report.hpp"
#include "ocl/rng.hpp"
#include "ocl/stream.hpp"

namespace {

void apply_overrides(ocl::ExperimentConfig& cfg, const std::string& seed_list,
                     const std::vector<std::string>& sets) {
  if (!seed_list.empty()) {
    ocl::apply_config_key(cfg, "seeds", seed_list, "--seed-list");
  }
  for (const std::string& kv : sets) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ocl::ConfigError("--set expects key=value, got \"" + kv + "\"");
    }
    ocl::apply_config_key(cfg, kv.substr(0, eq), kv.substr(eq + 1), "--set");
  }
}

int run_command(const std::string& config_path, const std::string& seed_list,
                const std::vector<std::string>& sets, const std::string& out_dir) {
  ocl::ExperimentConfig cfg = ocl::parse_config_file(config_path);
  apply_overrides(cfg, seed_list, sets);
  ocl::validate_config(cfg);
  const ocl::RunResult result = ocl::run_experiment(cfg);
  ocl::emit_report(cfg, result, out_dir);
  std::cerr << "run: " << ocl::to_string(cfg.method) << "+" << ocl::to_string(cfg.optimizer)
            << " trick=" << ocl::to_string(cfg.trick) << " A_T="
            << ocl::format_sig6(result.mean_accuracy) << " +- "
            << ocl::format_sig6(result.std_accuracy) << " F_T="
            << ocl::format_sig6(result.mean_forgetting) << " -> " << out_dir << "\n";
  return 0;
}

int sweep_command(const std::string& config_path, const std::string& seed_list,
                  const std::vector<std::string>& sets, const std::string& out_dir,
                  const std::string& lambdas, const std::string& buffers,
                  const std::string& methods, const std::string& tricks) {
  ocl::ExperimentConfig base = ocl::parse_config_file(config_path);
  apply_overrides(base, seed_list, sets);

  ocl::SweepAxes axes;
  if (!lambdas.empty()) {
    for (const std::string& v : ocl::split_list(lambdas, ',')) {
      axes.lambdas.push_back(std::strtod(v.c_str(), nullptr));
    }
  }
  if (!buffers.empty()) {
    for (const std::string& v : ocl::split_list(buffers, ',')) {
      axes.buffer_capacities.push_back(
          static_cast<std::size_t>(std::strtoull(v.c_str(), nullptr, 10)));
    }
  }
  if (!methods.empty()) {
    for (const std::string& v : ocl::split_list(methods, ',')) {
      axes.methods.push_back(ocl::method_from_string(v));
    }
  }
  if (!tricks.empty()) {
    for (const std::string& v : ocl::split_list(tricks, ',')) {
      axes.tricks.push_back(ocl::trick_from_string(v));
    }
  }
  const ocl::SweepReport report = ocl::sweep(base, axes);
  ocl::emit_sweep_report(report, out_dir);
  std::cerr << "sweep: " << report.cells.size() << " cells -> " << out_dir << "\n";
  return 0;
}

int gen_synthetic_command(const std::string& out_path, std::size_t classes,
                          std::size_t per_class, std::size_t dim, double separation,
                          std::uint64_t seed) {
  ocl::Rng rng(seed);
  const ocl::Dataset ds = ocl::make_synthetic(classes, per_class, dim, separation, rng);
  ocl::save_dataset(ds, out_path);
  std::cerr << "gen-synthetic: " << ds.features.rows() << " examples, " << classes
            << " classes, dim " << dim << " -> " << out_path << "\n";
  return 0;
}

int report_command(const std::string& matrix_path) {
  const ocl::AccuracyMatrix m = ocl::read_matrix_csv(matrix_path);
  std::printf("task,A_i,F_i\n");
  for (std::size_t i = 0; i < m.num_tasks(); ++i) {
    const double a = ocl::average_accuracy(m, i);
    const double f = i >= 1 ? ocl::average_forgetting(m, i) : 0.0;
    std::printf("%zu,%s,%s\n", i + 1, ocl::format_sig6(a).c_str(),
                ocl::format_sig6(f).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online continual learning benchmark runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string seed_list;
  std::vector<std::string> sets;

  CLI::App* run = app.add_subcommand("run", "Run one experiment configuration");
  run->add_option("--config", config_path, "Experiment config file")->required();
  run->add_option("--out-dir", out_dir, "Output directory");
  run->add_option("--seed-list", seed_list, "Comma-separated seeds (overrides the config)");
  run->add_option("--set", sets, "Extra key=value overrides");

  std::string lambdas, buffers, methods, tricks;
  CLI::App* sw = app.add_subcommand("sweep", "Run a grid of configurations");
  sw->add_option("--config", config_path, "Base config file")->required();
  sw->add_option("--out-dir", out_dir, "Output directory");
  sw->add_option("--seed-list", seed_list, "Comma-separated seeds (overrides the config)");
  sw->add_option("--set", sets, "Extra key=value overrides");
  sw->add_option("--lambda", lambdas, "Comma-separated damping values");
  sw->add_option("--buffer", buffers, "Comma-separated buffer capacities");
  sw->add_option("--method", methods, "Comma-separated methods");
  sw->add_option("--trick", tricks, "Comma-separated tricks");

  std::string gen_out = "synthetic.ocld";
  std::size_t classes = 20, per_class = 100, dim = 20;
  double separation = 6.0;
  std::uint64_t gen_seed = 1;
  CLI::App* gen = app.add_subcommand("gen-synthetic", "Write a synthetic dataset file");
  gen->add_option("--out", gen_out, "Output path");
  gen->add_option("--classes", classes, "Number of classes");
  gen->add_option("--per-class", per_class, "Examples per class");
  gen->add_option("--dim", dim, "Feature dimension");
  gen->add_option("--separation", separation, "Minimum distance between class centers");
  gen->add_option("--seed", gen_seed, "Generator seed");

  std::string matrix_path;
  CLI::App* rep = app.add_subcommand("report", "Print per-task metrics from a matrix CSV");
  rep->add_option("--matrix", matrix_path, "accuracy_matrix_seed*.csv file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(config_path, seed_list, sets, out_dir);
    if (sw->parsed()) {
      return sweep_command(config_path, seed_list, sets, out_dir, lambdas, buffers, methods,
                           tricks);
    }
    if (gen->parsed()) {
      return gen_synthetic_command(gen_out, classes, per_class, dim, separation, gen_seed);
    }
    if (rep->parsed()) return report_command(matrix_path);
  } catch (const ocl::OclError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
