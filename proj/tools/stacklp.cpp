#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stacklp/bvlab.hpp"
#include "stacklp/error.hpp"
#include "stacklp/pipeline.hpp"
#include "stacklp/random.hpp"
#include "stacklp/serialize.hpp"

namespace {

using namespace stacklp;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitSolver = 4;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::config_error:
      return kExitConfig;
    case ErrorCode::training_failed:
    case ErrorCode::solver_failure:
      return kExitSolver;
    default:
      return kExitData;
  }
}

int worker_count() {
  const char* env = std::getenv("STACKLP_WORKERS");
  if (!env || !*env) return 1;
  try {
    const int n = std::stoi(env);
    if (n >= 1) return n;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::config_error, std::string("STACKLP_WORKERS must be a positive integer, got '") + env + "'");
}

// Writes JSON to `path`, or to stdout when the path is empty.
void emit_json(const std::string& path, const Json& j) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json(path, j);
  }
}

struct PipelineArgs {
  std::string config;
  std::vector<std::string> overrides;
};

void add_pipeline_options(CLI::App* cmd, PipelineArgs& args) {
  cmd->add_option("-c,--config", args.config, "Run configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--set", args.overrides, "Override a config entry, section.key=value")->take_all();
}

void report_grid(const GridSummary& s) {
  std::cout << "grid: " << s.instances << " instances x " << s.models << " models; best model " << s.best_model
            << " cv accuracy " << format_real(s.best_accuracy);
  if (s.nonconverged_fits > 0) std::cout << "; " << s.nonconverged_fits << " fits hit the iteration budget";
  std::cout << '\n';
}

void report_combine(const CombineSummary& s) {
  std::cout << "combine: " << to_string(s.weights.formulation) << ", objective "
            << format_real(s.weights.objective_value) << ", " << s.weights.nonzero_count << " nonzero weights; ";
  std::cout << "max-accuracy model " << s.max_accuracy_model
            << (s.max_accuracy_model_weight > kNonzeroWeight ? " has weight " + format_real(s.max_accuracy_model_weight)
                                                              : std::string(" received zero weight"))
            << '\n';
}

void report_evaluate(const EvaluateSummary& s) {
  auto line = [](const char* name, const ClassifierMetrics& m) {
    std::cout << "  " << name << ": accuracy " << format_real(m.accuracy) << ", AUC " << format_real(m.auc)
              << ", calibration MAE " << format_real(m.calibration_mae) << '\n';
  };
  std::cout << "evaluate:\n";
  line("combined", s.combined);
  line(("model " + std::to_string(s.max_accuracy_model)).c_str(), s.max_accuracy);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal linear combinations of binary classifiers"};
  app.require_subcommand(1);

  PipelineArgs grid_args, combine_args, evaluate_args, run_args;
  auto* grid_cmd = app.add_subcommand("grid", "Out-of-sample SVM grid scores");
  add_pipeline_options(grid_cmd, grid_args);
  auto* combine_cmd = app.add_subcommand("combine", "Solve for combination weights");
  add_pipeline_options(combine_cmd, combine_args);
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Metrics for the combination and the best single model");
  add_pipeline_options(evaluate_cmd, evaluate_args);
  auto* run_cmd = app.add_subcommand("run", "grid, combine and evaluate in sequence");
  add_pipeline_options(run_cmd, run_args);

  auto* bv_cmd = app.add_subcommand("bvlab", "Bias-variance decomposition checks");
  bv_cmd->require_subcommand(1);

  double p_true = 0.8, q = 0.7;
  double y_pos_t_pos = -1.0, y_pos_t_neg = -1.0;
  long trials = 1'000'000;
  std::uint64_t seed = 1;
  std::string out_path;
  auto* point_cmd = bv_cmd->add_subcommand("point", "Decomposition at one point");
  point_cmd->add_option("--p", p_true, "P(t = +1)")->check(CLI::Range(0.0, 1.0));
  point_cmd->add_option("--q", q, "P(y = +1) for an independent prediction")->check(CLI::Range(0.0, 1.0));
  auto* a_opt = point_cmd->add_option("--y-given-pos", y_pos_t_pos, "P(y = +1 | t = +1), coupled prediction")
                    ->check(CLI::Range(0.0, 1.0));
  auto* b_opt = point_cmd->add_option("--y-given-neg", y_pos_t_neg, "P(y = +1 | t = -1), coupled prediction")
                    ->check(CLI::Range(0.0, 1.0));
  a_opt->needs(b_opt);
  b_opt->needs(a_opt);
  point_cmd->add_option("--trials", trials, "Monte Carlo trials (0 skips the simulation)")->check(CLI::NonNegativeNumber);
  point_cmd->add_option("--seed", seed, "Simulation seed");
  point_cmd->add_option("-o,--out", out_path, "JSON report path (stdout when omitted)");

  double curve_step = 0.01;
  std::string curve_path;
  auto* curve_cmd = bv_cmd->add_subcommand("curve", "1-NN test error against Bayes error");
  curve_cmd->add_option("--step", curve_step, "Bayes error grid step")->check(CLI::Range(1e-6, 0.5));
  curve_cmd->add_option("-o,--out", curve_path, "CSV path (stdout when omitted)");

  long nn_trials = 100'000;
  auto* onenn_cmd = bv_cmd->add_subcommand("onenn", "1-NN training and test error at a point");
  onenn_cmd->add_option("--p", p_true, "P(t = +1)")->check(CLI::Range(0.0, 1.0));
  onenn_cmd->add_option("--trials", nn_trials, "Trials")->check(CLI::PositiveNumber);
  onenn_cmd->add_option("--seed", seed, "Simulation seed");
  onenn_cmd->add_option("-o,--out", out_path, "JSON report path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (grid_cmd->parsed()) {
      report_grid(run_grid(load_config(grid_args.config, grid_args.overrides), worker_count()));
    } else if (combine_cmd->parsed()) {
      report_combine(run_combine(load_config(combine_args.config, combine_args.overrides)));
    } else if (evaluate_cmd->parsed()) {
      report_evaluate(run_evaluate(load_config(evaluate_args.config, evaluate_args.overrides)));
    } else if (run_cmd->parsed()) {
      const RunConfig config = load_config(run_args.config, run_args.overrides);
      report_grid(run_grid(config, worker_count()));
      report_combine(run_combine(config));
      report_evaluate(run_evaluate(config));
    } else if (point_cmd->parsed()) {
      const bool coupled = a_opt->count() > 0;
      const PointWorld world =
          coupled ? PointWorld::coupled(p_true, y_pos_t_pos, y_pos_t_neg) : PointWorld::independent(p_true, q);
      const BvReport report =
          trials > 0 ? monte_carlo_decomposition(world, trials, seed) : dependent_decomposition(world);
      emit_json(out_path, to_json(report));
    } else if (curve_cmd->parsed()) {
      std::vector<double> grid;
      const long steps = std::lround(0.5 / curve_step);
      for (long i = 0; i <= steps; ++i) grid.push_back(std::min(0.5, static_cast<double>(i) * curve_step));
      if (grid.back() < 0.5) grid.push_back(0.5);
      const auto curve = one_nn_curve(grid);
      const StageStamp stamp{"bvlab_curve", ""};
      if (curve_path.empty()) {
        write_curve_csv(std::cout, curve, stamp);
      } else {
        std::ofstream out(curve_path, std::ios::binary);
        if (!out) throw Error(ErrorCode::io_error, "cannot write " + curve_path);
        write_curve_csv(out, curve, stamp);
      }
    } else if (onenn_cmd->parsed()) {
      const BvReport analytic = monte_carlo_decomposition(PointWorld::copies_label(p_true), nn_trials, seed);
      const OneNnCheck empirical = empirical_1nn_check(p_true, nn_trials, derive_seed(seed, 1));
      emit_json(out_path, Json{{"point", to_json(analytic)}, {"empirical", to_json(empirical)}});
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
