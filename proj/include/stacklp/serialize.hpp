#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "stacklp/bvlab.hpp"
#include "stacklp/combiner.hpp"
#include "stacklp/dataspace.hpp"
#include "stacklp/evalkit.hpp"
#include "stacklp/grid.hpp"

namespace stacklp {

using Json = nlohmann::ordered_json;

// Identifies the pipeline stage and configuration an artifact came from.
// CSV files carry it in a leading "# stage=... config_hash=..." line, JSON
// files as top-level fields.
struct StageStamp {
  std::string stage;
  std::string config_hash;
};

// Shortest decimal text that reads back to the same double.
std::string format_real(double value);

// Score matrix CSV: "id,target,<model numbers...>"; an empty cell marks a
// row without a score (valid = false).
void write_score_matrix(std::ostream& out, const OofScoreMatrix& m, const StageStamp& stamp);
OofScoreMatrix read_score_matrix(std::istream& in, StageStamp* stamp = nullptr);

// Per-model table: model, C, g, cv_accuracy, score_variance.
struct ModelSummary {
  int model = 0;
  double cost = 0.0;
  double gamma = 0.0;
  double cv_accuracy = 0.0;
  double score_variance = 0.0;
};
std::vector<ModelSummary> summarize_models(const OofScoreMatrix& m, const ModelGrid& grid);
void write_models_table(std::ostream& out, const std::vector<ModelSummary>& rows, const StageStamp& stamp);

void write_roc_csv(std::ostream& out, const RocCurve& curve, const StageStamp& stamp);

// Ten equal-width bins of calibrated probability with the observed positive
// rate in each.
void write_reliability_csv(std::ostream& out, const IsotonicModel& model, const VectorXd& scores,
                           const Labels& targets, const StageStamp& stamp);

void write_curve_csv(std::ostream& out, const std::vector<std::pair<double, double>>& curve,
                     const StageStamp& stamp);

Json to_json(const FoldPlan& plan);
Json to_json(const BootstrapPlan& plan);
FoldPlan fold_plan_from_json(const Json& j);
BootstrapPlan bootstrap_plan_from_json(const Json& j);

Json weights_report(const CombinerWeights& w, const std::vector<ModelSummary>& models, const StageStamp& stamp);
CombinerWeights weights_from_report(const Json& j);

Json to_json(const BvReport& r);
Json to_json(const OneNnCheck& c);

void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

}  // namespace stacklp
