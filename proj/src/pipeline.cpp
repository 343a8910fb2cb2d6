#include "stacklp/pipeline.hpp"

#include <cstdio>
#include <fstream>

#include "stacklp/error.hpp"
#include "stacklp/evalkit.hpp"

namespace stacklp {

namespace {

constexpr const char* kGridStage = "grid";
constexpr const char* kCombineStage = "combine";
constexpr const char* kEvaluateStage = "evaluate";

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  return out;
}

OofScoreMatrix read_scores(const std::filesystem::path& path, const std::string& expected_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::missing_file, "cannot open " + path.string() + " (run the grid stage first)");
  StageStamp stamp;
  OofScoreMatrix m = read_score_matrix(in, &stamp);
  if (stamp.stage != kGridStage || stamp.config_hash != expected_hash) {
    throw Error(ErrorCode::config_error, path.string() + " was written by stage '" + stamp.stage + "' with config " +
                                             stamp.config_hash + ", expected grid output for " + expected_hash);
  }
  return m;
}

// Rows flagged valid, in order.
OofScoreMatrix valid_rows(const OofScoreMatrix& m) {
  if (m.valid.size() == 0 || m.valid.all()) return m;
  std::vector<Index> keep;
  for (Index i = 0; i < m.rows(); ++i) {
    if (m.valid(i)) keep.push_back(i);
  }
  OofScoreMatrix out;
  out.kind = m.kind;
  out.model_numbers = m.model_numbers;
  out.scores = m.scores(keep, Eigen::all);
  out.targets = m.targets(keep);
  out.valid = RowMask::Constant(static_cast<Index>(keep.size()), true);
  for (const Index i : keep) out.instance_ids.push_back(m.instance_ids[static_cast<std::size_t>(i)]);
  return out;
}

Json metrics_json(const ClassifierMetrics& m) {
  return Json{{"accuracy", m.accuracy}, {"auc", m.auc}, {"calibration_mae", m.calibration_mae}};
}

void write_curves(const ArtifactPaths& paths, const std::string& which, const Labels& targets, const VectorXd& scores,
                  const StageStamp& stamp) {
  auto roc = open_output(paths.roc(which));
  write_roc_csv(roc, roc_auc(targets, scores), stamp);
  auto rel = open_output(paths.reliability(which));
  write_reliability_csv(rel, isotonic_fit(scores, to_binary(targets)), scores, targets, stamp);
}

}  // namespace

std::filesystem::path ArtifactPaths::replicate_scores(int d) const {
  char name[32];
  std::snprintf(name, sizeof name, "scores_rep_%03d.csv", d);
  return dir / name;
}

ClassifierMetrics classifier_metrics(const Labels& targets, const VectorXd& scores) {
  ClassifierMetrics m;
  m.accuracy = accuracy(targets, predicted_labels(scores));
  m.auc = roc_auc(targets, scores).auc;
  const VectorXi binary = to_binary(targets);
  m.calibration_mae = calibration_mae(isotonic_fit(scores, binary), scores, binary);
  return m;
}

Index max_accuracy_column(const OofScoreMatrix& m) {
  Index best = 0;
  double best_accuracy = -1.0;
  for (Index k = 0; k < m.models(); ++k) {
    const double a = accuracy(m.targets, predicted_labels(m.scores.col(k)));
    if (a > best_accuracy) {
      best_accuracy = a;
      best = k;
    }
  }
  return best;
}

GridSummary run_grid(const RunConfig& config, int workers) {
  const LabeledDataset ds = load_dataset(config.dataset, config.schema);
  const ModelGrid grid = config.grid();
  GridOptions options;
  options.svm = config.svm_params();
  options.workers = workers;

  const ArtifactPaths paths{config.output_dir};
  std::filesystem::create_directories(paths.dir);
  const StageStamp stamp{kGridStage, config.grid_hash};

  OofScoreMatrix scores;
  Json plan_json;
  if (config.plan == ResamplingPlan::kfold) {
    const FoldPlan plan = stratified_kfold(ds, config.folds, config.seed);
    scores = grid_oof_scores(ds, grid, plan, options);
    verify_out_of_sample(scores);
    plan_json = to_json(plan);
  } else {
    const BootstrapPlan plan = bootstrap_plan(ds, config.replicates, config.seed);
    const auto replicates = grid_oof_scores(ds, grid, plan, options);
    for (std::size_t d = 0; d < replicates.size(); ++d) {
      verify_out_of_sample(replicates[d]);
      auto out = open_output(paths.replicate_scores(static_cast<int>(d)));
      write_score_matrix(out, replicates[d], stamp);
    }
    scores = average_replicates(replicates);
    for (const auto& r : replicates) scores.provenance.nonconverged_fits += r.provenance.nonconverged_fits;
    plan_json = to_json(plan);
  }
  {
    auto out = open_output(paths.scores());
    write_score_matrix(out, scores, stamp);
  }
  const OofScoreMatrix usable = valid_rows(scores);
  const auto models = summarize_models(usable, grid);
  {
    auto out = open_output(paths.models());
    write_models_table(out, models, stamp);
  }
  Json plan_doc{{"stage", stamp.stage}, {"config_hash", stamp.config_hash}};
  plan_doc.update(plan_json);
  write_json(paths.plan(), plan_doc);

  GridSummary summary;
  summary.instances = scores.rows();
  summary.models = static_cast<int>(scores.models());
  const Index best = max_accuracy_column(usable);
  summary.best_model = usable.model_numbers[static_cast<std::size_t>(best)];
  summary.best_accuracy = models[static_cast<std::size_t>(best)].cv_accuracy;
  summary.nonconverged_fits = scores.provenance.nonconverged_fits;
  return summary;
}

CombineSummary run_combine(const RunConfig& config) {
  const ArtifactPaths paths{config.output_dir};
  const OofScoreMatrix all = read_scores(paths.scores(), config.grid_hash);
  const OofScoreMatrix scores = valid_rows(all);
  const auto models = summarize_models(scores, config.grid());

  CombinerWeights weights;
  if (config.formulation == Formulation::bootstrap_lp) {
    std::vector<OofScoreMatrix> replicates;
    for (int d = 0; d < config.replicates; ++d) {
      OofScoreMatrix rep = read_scores(paths.replicate_scores(d), config.grid_hash);
      if (rep.rows() != all.rows() || rep.models() != all.models()) {
        throw Error(ErrorCode::dimension_mismatch, "replicate " + std::to_string(d) + " differs in shape from scores.csv");
      }
      rep.scores = apply_score_kind(rep.scores, rep.targets, config.score_kind, rep.valid);
      replicates.push_back(std::move(rep));
    }
    weights = solve_weights_lp(build_lp_bootstrap(replicates, all.targets, config.lp_options())).first;
  } else {
    const MatrixXd z = apply_score_kind(scores.scores, scores.targets, config.score_kind);
    if (config.formulation == Formulation::single_lp) {
      weights = solve_weights_lp(build_lp_single(z, scores.targets, config.lp_options())).first;
    } else {
      weights = solve_weights_qp(z, scores.targets, config.penalty_c, config.qp_options()).first;
    }
  }

  CombineSummary summary;
  summary.weights = weights;
  const Index best = max_accuracy_column(scores);
  summary.max_accuracy_model = scores.model_numbers[static_cast<std::size_t>(best)];
  summary.max_accuracy_model_weight = weights.weights(best);

  Json report = weights_report(weights, models, StageStamp{kCombineStage, config.hash});
  report["score_kind"] = to_string(config.score_kind);
  report["scores_hash"] = config.grid_hash;
  report["max_accuracy_model"] = summary.max_accuracy_model;
  report["max_accuracy_model_weight"] = summary.max_accuracy_model_weight;
  write_json(paths.weights(), report);
  return summary;
}

EvaluateSummary run_evaluate(const RunConfig& config) {
  const ArtifactPaths paths{config.output_dir};
  const OofScoreMatrix scores = valid_rows(read_scores(paths.scores(), config.grid_hash));
  const Json report = read_json(paths.weights());
  if (report.value("stage", "") != kCombineStage || report.value("config_hash", "") != config.hash) {
    throw Error(ErrorCode::config_error, paths.weights().string() + " was not produced by this config's combine stage");
  }
  const CombinerWeights weights = weights_from_report(report);
  if (weights.weights.size() != scores.models()) {
    throw Error(ErrorCode::dimension_mismatch, "weights cover " + std::to_string(weights.weights.size()) +
                                                   " models, score matrix has " + std::to_string(scores.models()));
  }

  const MatrixXd z = apply_score_kind(scores.scores, scores.targets, config.score_kind);
  const VectorXd combined = combine_scores(weights, z);
  const Index best = max_accuracy_column(scores);
  const VectorXd single = scores.scores.col(best);

  EvaluateSummary summary;
  summary.combined = classifier_metrics(scores.targets, combined);
  summary.max_accuracy = classifier_metrics(scores.targets, single);
  summary.max_accuracy_model = scores.model_numbers[static_cast<std::size_t>(best)];

  const StageStamp stamp{kEvaluateStage, config.hash};
  write_curves(paths, "combined", scores.targets, combined, stamp);
  write_curves(paths, "max_accuracy", scores.targets, single, stamp);
  write_json(paths.metrics(), Json{{"stage", stamp.stage},
                                   {"config_hash", stamp.config_hash},
                                   {"instances", scores.rows()},
                                   {"calibration_target", "binary labels"},
                                   {"combined", metrics_json(summary.combined)},
                                   {"max_accuracy_model", summary.max_accuracy_model},
                                   {"max_accuracy", metrics_json(summary.max_accuracy)},
                                   {"nonzero_weights", weights.nonzero_count}});
  return summary;
}

}  // namespace stacklp
