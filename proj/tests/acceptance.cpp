// Acceptance checks 1-8. One PASS/FAIL line per criterion on stdout, details
// indented below it. Exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stacklp/bvlab.hpp"
#include "stacklp/combiner.hpp"
#include "stacklp/config.hpp"
#include "stacklp/evalkit.hpp"
#include "stacklp/pipeline.hpp"
#include "stacklp/random.hpp"
#include "support.hpp"

using namespace stacklp;

namespace {

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void note(const std::string& what) { notes.push_back("     " + what); }
};

std::string fmt(double x, int digits = 6) {
  std::ostringstream out;
  out.precision(digits);
  out << x;
  return out.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int failures = 0;

void criterion(int number, const std::string& title, double budget_seconds,
               const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.require(false, std::string("exception: ") + e.what());
  }
  const double elapsed = seconds_since(start);
  v.require(elapsed < budget_seconds, "runtime " + fmt(elapsed, 3) + " s < " + fmt(budget_seconds) + " s");
  if (!v.pass) ++failures;
  std::cout << "criterion " << number << ": " << (v.pass ? "PASS" : "FAIL") << "  " << title << '\n';
  for (const auto& n : v.notes) std::cout << "    " << n << '\n';
  std::cout.flush();
}

// ---- 1. decomposition identities -------------------------------------------

void decomposition_identities(Verdict& v) {
  Rng rng(20240601);
  double worst_ind = 0.0, worst_gap = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform(), q = rng.uniform();
    const auto r = analytic_decomposition(PointWorld::independent(p, q));
    // Misclassification probability from the two-way table.
    const double direct = q * (1.0 - p) + (1.0 - q) * p;
    worst_ind = std::max(worst_ind, std::abs(r.expected_loss_ind - direct));

    const double a = rng.uniform(), b = rng.uniform();
    const auto d = dependent_decomposition(PointWorld::coupled(p, a, b));
    worst_gap = std::max(worst_gap, std::abs(d.expected_loss_ind - *d.expected_loss_dep - *d.optimism));
  }
  v.require(worst_ind <= 1e-12, "independent loss vs direct table, 1000 worlds: max |diff| = " + fmt(worst_ind));
  v.require(worst_gap <= 1e-12, "ind - dep - optimism, 1000 coupled worlds: max |diff| = " + fmt(worst_gap));
}

// ---- 2. one nearest neighbour law -------------------------------------------

void one_nn_law(Verdict& v) {
  for (const double p : {0.6, 0.75, 0.9}) {
    const auto r = monte_carlo_decomposition(PointWorld::copies_label(p), 1'000'000, 7);
    const auto& mc = *r.mc_estimates;
    const double be = 1.0 - p;
    const double law = 2.0 * be - 2.0 * be * be;
    v.require(mc.loss_dep == 0.0, "p=" + fmt(p) + ": dependent error " + fmt(mc.loss_dep) + " == 0");
    v.require(std::abs(mc.loss_ind - law) <= 3.0 * mc.se_loss_ind,
              "p=" + fmt(p) + ": independent error " + fmt(mc.loss_ind) + " vs " + fmt(law) + " (|diff| " +
                  fmt(std::abs(mc.loss_ind - law), 3) + " <= 3 SE = " + fmt(3.0 * mc.se_loss_ind, 3) + ")");
  }
}

// ---- 3. LP against grid search ----------------------------------------------

void lp_oracle(Verdict& v) {
  Rng rng(31337);
  double worst = 0.0, worst_votes = 0.0, worst_real = 0.0;
  int below_grid = 0;
  MatrixXd worst_z;
  Labels worst_t;
  double worst_lp = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.below(6));
    const int k = 1 + static_cast<int>(rng.below(3));
    Labels t(n);
    for (Index i = 0; i < n; ++i) t(i) = rng.bernoulli(0.5) ? 1 : -1;
    // Half the instances carry label-valued votes, half raw real scores.
    const bool votes = trial % 2 == 0;
    const MatrixXd z = MatrixXd::NullaryExpr(n, k, [&] {
      return votes ? (rng.bernoulli(0.5) ? 1.0 : -1.0) : rng.uniform() * 2.0 - 1.0;
    });
    const auto [w, xi] = solve_weights_lp(build_lp_single(z, t));
    const auto grid =
        oracle::simplex_grid_minimum(k, 1000, [&](const VectorXd& x) { return oracle::hinge(z, t, x, 0.5); });
    const double gap = std::abs(w.objective_value - grid.value);
    double& bucket = votes ? worst_votes : worst_real;
    bucket = std::max(bucket, gap);
    if (gap > worst) {
      worst = gap;
      worst_z = z;
      worst_t = t;
      worst_lp = w.objective_value;
    }
    if (w.objective_value <= grid.value + 1e-9) ++below_grid;
  }
  v.require(worst <= 1e-4, "200 instances (N<=6, K<=3): max |LP - grid| = " + fmt(worst));
  v.note("label-valued instances: max gap " + fmt(worst_votes) + "; real-valued: max gap " + fmt(worst_real));
  v.note("LP objective <= grid minimum in " + std::to_string(below_grid) + "/200 instances");
  if (worst > 0.0) {
    // Same worst instance on a ten times finer lattice.
    const auto fine = oracle::simplex_grid_minimum(static_cast<int>(worst_z.cols()), 10'000, [&](const VectorXd& x) {
      return oracle::hinge(worst_z, worst_t, x, 0.5);
    });
    v.note("worst instance on a 1e-4 lattice: gap " + fmt(std::abs(worst_lp - fine.value)));
  }
}

// ---- 4. QP and cap limits -----------------------------------------------------

void qp_limits(Verdict& v) {
  Rng rng(4);
  double worst_qp = 0.0, worst_cap = 0.0;
  for (int trial = 0; trial < 12; ++trial) {
    const Index n = 10 + static_cast<Index>(rng.below(40));
    const Index k = 2 + static_cast<Index>(rng.below(19));
    Labels t(n);
    for (Index i = 0; i < n; ++i) t(i) = rng.bernoulli(0.5) ? 1 : -1;
    const MatrixXd z = MatrixXd::NullaryExpr(n, k, [&] { return rng.uniform() * 4.0 - 2.0; });
    const double uniform = 1.0 / static_cast<double>(k);
    const auto [wq, xq] = solve_weights_qp(z, t, 1e-6);
    worst_qp = std::max(worst_qp, (wq.weights.array() - uniform).abs().maxCoeff());
    LpOptions capped;
    capped.cap = uniform;
    const auto [wc, xc] = solve_weights_lp(build_lp_single(z, t, capped));
    worst_cap = std::max(worst_cap, (wc.weights.array() - uniform).abs().maxCoeff());
  }
  v.require(worst_qp <= 1e-3, "QP, penalty 1e-6, 12 instances: max |w_k - 1/K| = " + fmt(worst_qp));
  v.require(worst_cap <= 1e-12, "LP, cap 1/K, 12 instances: max |w_k - 1/K| = " + fmt(worst_cap));
}

// ---- 5, 6, 8. pipeline runs ---------------------------------------------------

struct PipelineResult {
  GridSummary grid;
  CombineSummary combine;
  EvaluateSummary evaluate;
  double seconds = 0.0;
};

PipelineResult run_pipeline(const std::string& config_name, const std::filesystem::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  const RunConfig config = load_config(std::filesystem::path(STACKLP_CONFIG_DIR) / config_name,
                                       {"output.dir=" + out_dir.string()});
  PipelineResult r;
  r.grid = run_grid(config, 1);
  r.combine = run_combine(config);
  r.evaluate = run_evaluate(config);
  r.seconds = seconds_since(start);
  return r;
}

void describe(Verdict& v, const PipelineResult& r) {
  v.note("best single model " + std::to_string(r.grid.best_model) + ", cv accuracy " + fmt(r.grid.best_accuracy));
  v.note("combined: accuracy " + fmt(r.evaluate.combined.accuracy) + ", AUC " + fmt(r.evaluate.combined.auc) +
         ", calibration MAE " + fmt(r.evaluate.combined.calibration_mae));
  v.note("max-accuracy model " + std::to_string(r.evaluate.max_accuracy_model) + ": accuracy " +
         fmt(r.evaluate.max_accuracy.accuracy) + ", AUC " + fmt(r.evaluate.max_accuracy.auc) + ", calibration MAE " +
         fmt(r.evaluate.max_accuracy.calibration_mae));
  v.note("nonzero weights " + std::to_string(r.combine.weights.nonzero_count) + "; max-accuracy model weight " +
         fmt(r.combine.max_accuracy_model_weight));
  v.note("pipeline time " + fmt(r.seconds, 3) + " s");
}

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

support::TempDir* scratch = nullptr;

void heart(Verdict& v) {
  const auto r = run_pipeline("heart.ini", scratch->path() / "heart");
  describe(v, r);
  v.require(within(r.grid.best_accuracy, 0.80, 0.03), "best single cv accuracy " + fmt(r.grid.best_accuracy) +
                                                          " within 0.80 +- 0.03");
  v.require(within(r.evaluate.combined.auc, 0.87317, 0.03),
            "combined AUC " + fmt(r.evaluate.combined.auc) + " within 0.87317 +- 0.03");
  v.require(r.evaluate.combined.auc >= r.evaluate.max_accuracy.auc - 0.02,
            "combined AUC >= max-accuracy AUC - 0.02 (" + fmt(r.evaluate.max_accuracy.auc - 0.02) + ")");
  v.require(r.combine.weights.nonzero_count <= 15,
            std::to_string(r.combine.weights.nonzero_count) + " nonzero weights <= 15");
}

void german(Verdict& v) {
  const auto r = run_pipeline("german.ini", scratch->path() / "german");
  describe(v, r);
  v.require(within(r.grid.best_accuracy, 0.796, 0.03), "best single cv accuracy " + fmt(r.grid.best_accuracy) +
                                                           " within 0.796 +- 0.03");
  v.require(within(r.evaluate.combined.auc, 0.80955, 0.03),
            "combined AUC " + fmt(r.evaluate.combined.auc) + " within 0.80955 +- 0.03");
  v.require(r.evaluate.combined.calibration_mae <= r.evaluate.max_accuracy.calibration_mae + 0.03,
            "combined calibration MAE " + fmt(r.evaluate.combined.calibration_mae) + " <= max-accuracy MAE + 0.03 (" +
                fmt(r.evaluate.max_accuracy.calibration_mae + 0.03) + ")");
}

// ---- 7. metric oracles ----------------------------------------------------------

void metric_oracles(Verdict& v) {
  Rng rng(77);
  double worst_auc = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.below(40));
    Labels t(n);
    for (Index i = 0; i < n; ++i) t(i) = rng.bernoulli(0.5) ? 1 : -1;
    t(0) = 1;
    t(1) = -1;
    const bool coarse = trial % 2 == 0;
    const VectorXd s = VectorXd::NullaryExpr(n, [&] {
      return coarse ? static_cast<double>(rng.below(5)) : rng.uniform();
    });
    double wins = 0.0, pairs = 0.0;
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (t(i) == 1 && t(j) == -1) {
          pairs += 1.0;
          wins += s(i) > s(j) ? 1.0 : (s(i) == s(j) ? 0.5 : 0.0);
        }
      }
    }
    worst_auc = std::max(worst_auc, std::abs(roc_auc(t, s).auc - wins / pairs));
  }
  v.require(worst_auc <= 1e-9, "AUC vs pair count, 1000 inputs: max |diff| = " + fmt(worst_auc));

  double worst_pav = 0.0;
  long cases = 0;
  for (int n = 1; n <= 6; ++n) {
    for (unsigned targets_mask = 0; targets_mask < (1u << n); ++targets_mask) {
      for (unsigned tie_mask = 0; tie_mask < (1u << (n - 1)); ++tie_mask) {
        std::vector<double> targets(static_cast<std::size_t>(n));
        std::vector<bool> tied(static_cast<std::size_t>(n - 1));
        VectorXd scores(n);
        VectorXi binary(n);
        double level = 0.0;
        for (int i = 0; i < n; ++i) {
          if (i > 0) {
            tied[static_cast<std::size_t>(i - 1)] = tie_mask >> (i - 1) & 1u;
            if (!tied[static_cast<std::size_t>(i - 1)]) level += 1.0;
          }
          scores(i) = level;
          binary(i) = static_cast<int>(targets_mask >> i & 1u);
          targets[static_cast<std::size_t>(i)] = binary(i);
        }
        const auto expected = oracle::isotonic_brute_force(targets, tied);
        const auto model = isotonic_fit(scores, binary);
        for (int i = 0; i < n; ++i) {
          worst_pav = std::max(worst_pav, std::abs(model.predict(scores(i)) - expected[static_cast<std::size_t>(i)]));
        }
        ++cases;
      }
    }
  }
  v.require(worst_pav <= 1e-9, "PAV vs brute force, all " + std::to_string(cases) +
                                   " inputs of length <= 6 (every tie pattern): max |diff| = " + fmt(worst_pav));
}

// ---- 8. determinism -------------------------------------------------------------

void determinism(Verdict& v) {
  const auto first = scratch->path() / "heart";
  if (!std::filesystem::exists(first / "metrics.json")) run_pipeline("heart.ini", first);
  const auto second = scratch->path() / "heart_again";
  run_pipeline("heart.ini", second);
  int files = 0, identical = 0;
  for (const auto& entry : std::filesystem::directory_iterator(first)) {
    ++files;
    const auto twin = second / entry.path().filename();
    if (std::filesystem::exists(twin) && support::slurp(entry.path()) == support::slurp(twin)) {
      ++identical;
    } else {
      v.note("differs: " + entry.path().filename().string());
    }
  }
  v.require(files > 0 && identical == files,
            "heart pipeline run twice: " + std::to_string(identical) + "/" + std::to_string(files) +
                " artifacts byte-identical");
}

}  // namespace

int main() {
  support::TempDir dir;
  scratch = &dir;
  criterion(1, "decomposition identities", 1.0, decomposition_identities);
  criterion(2, "1-NN law by Monte Carlo", 10.0, one_nn_law);
  criterion(3, "LP matches simplex grid search", 30.0, lp_oracle);
  criterion(4, "QP and cap limits give uniform weights", 5.0, qp_limits);
  criterion(5, "heart-statlog reproduction", 600.0, heart);
  criterion(6, "german-credit reproduction", 1800.0, german);
  criterion(7, "metric oracles", 10.0, metric_oracles);
  criterion(8, "byte-identical reruns", 600.0, determinism);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << '\n';
  return failures == 0 ? 0 : 1;
}
