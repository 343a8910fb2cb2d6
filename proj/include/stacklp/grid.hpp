#pragma once

#include <string>
#include <vector>

#include "stacklp/dataspace.hpp"
#include "stacklp/svm.hpp"

namespace stacklp {

// Cost x gamma grid. Models are numbered 1..K row-major over (gamma, cost):
// the cost index varies fastest, so model = gamma_idx * |costs| + cost_idx + 1.
struct ModelGrid {
  std::vector<double> cost_values;
  std::vector<double> gamma_values;

  int size() const { return static_cast<int>(cost_values.size() * gamma_values.size()); }
  double cost_of(int model_number) const;
  double gamma_of(int model_number) const;

  // {2^lo, 2^(lo+step), ..., 2^hi} on both axes.
  static ModelGrid from_exponents(int cost_lo, int cost_hi, int gamma_lo, int gamma_hi, int step = 1);
  // Costs 2^-2..2^10 and gammas 2^-17..2^-6: 13 x 12 = 156 models.
  static ModelGrid standard();
};

enum class ScoreKind { raw, clipped, two_p_minus_one };

const char* to_string(ScoreKind kind);
ScoreKind score_kind_from_string(const std::string& name);

// Which training set produced each row, kept so the out-of-sample property
// can be checked after the fact.
struct ScoreProvenance {
  std::string plan;  // "kfold" or "bootstrap"
  std::uint64_t seed = 0;
  std::vector<std::vector<Index>> training_sets;
  std::vector<int> scored_by;  // per row; -1 when the row carries no score
  long nonconverged_fits = 0;
};

// N x K out-of-sample scores, one column per model in grid order. Rows with
// valid(i) == false (in-bag for a bootstrap replicate) hold no score.
struct OofScoreMatrix {
  MatrixXd scores;
  ScoreKind kind = ScoreKind::raw;
  Labels targets;
  std::vector<Index> instance_ids;
  std::vector<int> model_numbers;
  RowMask valid;
  ScoreProvenance provenance;

  Index rows() const { return scores.rows(); }
  Index models() const { return scores.cols(); }
};

// Throws unless every valid row was scored by a model whose training set
// excluded it.
void verify_out_of_sample(const OofScoreMatrix& m);

struct GridOptions {
  SvmParams svm;  // cost and gamma are taken from the grid
  int workers = 1;
};

// Cross-validated scores: entry (i, k) comes from model k trained on the
// folds not containing i.
OofScoreMatrix grid_oof_scores(const LabeledDataset& ds, const ModelGrid& grid,
                               const FoldPlan& plan, const GridOptions& options = {});

// One matrix per bootstrap replicate; only out-of-bag rows are valid.
std::vector<OofScoreMatrix> grid_oof_scores(const LabeledDataset& ds, const ModelGrid& grid,
                                            const BootstrapPlan& plan,
                                            const GridOptions& options = {});

// Mean over the replicates in which each row is out-of-bag. The result plays
// the role of 2P(y=+1)-1 for label-valued scores.
OofScoreMatrix average_replicates(const std::vector<OofScoreMatrix>& replicates);

}  // namespace stacklp
