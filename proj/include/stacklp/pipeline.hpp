#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stacklp/combiner.hpp"
#include "stacklp/config.hpp"
#include "stacklp/serialize.hpp"

namespace stacklp {

// File names inside the output directory.
struct ArtifactPaths {
  std::filesystem::path dir;

  std::filesystem::path scores() const { return dir / "scores.csv"; }
  std::filesystem::path replicate_scores(int d) const;
  std::filesystem::path models() const { return dir / "models.csv"; }
  std::filesystem::path plan() const { return dir / "plan.json"; }
  std::filesystem::path weights() const { return dir / "weights.json"; }
  std::filesystem::path metrics() const { return dir / "metrics.json"; }
  std::filesystem::path roc(const std::string& which) const { return dir / ("roc_" + which + ".csv"); }
  std::filesystem::path reliability(const std::string& which) const {
    return dir / ("reliability_" + which + ".csv");
  }
};

struct GridSummary {
  Index instances = 0;
  int models = 0;
  int best_model = 0;
  double best_accuracy = 0.0;
  long nonconverged_fits = 0;
};

// Loads the data, draws the plan, scores the grid out of sample and writes
// scores.csv (replicate-averaged for a bootstrap plan, plus one file per
// replicate), models.csv and plan.json.
GridSummary run_grid(const RunConfig& config, int workers = 1);

struct CombineSummary {
  CombinerWeights weights;
  int max_accuracy_model = 0;
  double max_accuracy_model_weight = 0.0;
};

// Reads the grid artifacts, maps scores to the configured kind, solves the
// configured formulation and writes weights.json.
CombineSummary run_combine(const RunConfig& config);

struct ClassifierMetrics {
  double accuracy = 0.0;
  double auc = 0.0;
  double calibration_mae = 0.0;
};

struct EvaluateSummary {
  ClassifierMetrics combined;
  ClassifierMetrics max_accuracy;
  int max_accuracy_model = 0;
};

// Metrics for the weighted combination and for the single model with the
// highest cross-validated accuracy; writes metrics.json and ROC and
// reliability CSVs for both.
EvaluateSummary run_evaluate(const RunConfig& config);

// Metrics of one score vector against the targets.
ClassifierMetrics classifier_metrics(const Labels& targets, const VectorXd& scores);

// Column index (0-based) of the highest accuracy, first on ties.
Index max_accuracy_column(const OofScoreMatrix& m);

}  // namespace stacklp
