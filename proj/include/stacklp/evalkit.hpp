#pragma once

#include <utility>
#include <vector>

#include "stacklp/grid.hpp"
#include "stacklp/types.hpp"

namespace stacklp {

// Fraction of positions where labels and predictions agree.
double accuracy(const Labels& labels, const Labels& predictions);

// Labels predicted by thresholding scores at zero (+1 iff score >= 0).
Labels predicted_labels(const VectorXd& scores);

struct RocPoint {
  double false_positive_rate = 0.0;
  double true_positive_rate = 0.0;
  double threshold = 0.0;  // scores >= threshold are called positive
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

// Threshold sweep over the distinct scores in descending order, tied scores
// entering together. Starts at (0,0) and ends at (1,1); `auc` is the
// trapezoidal area, which equals the Mann-Whitney statistic.
RocCurve roc_auc(const Labels& labels, const VectorXd& scores);

// Mean over (positive, negative) pairs of [s_pos > s_neg] + 1/2 [s_pos == s_neg].
double auc_pair_count(const Labels& labels, const VectorXd& scores);

// Monotone step function from score to P(y = +1).
struct IsotonicModel {
  std::vector<double> breakpoints;  // ascending distinct scores
  std::vector<double> fitted;       // nondecreasing, in [0, 1]

  // Value at the largest breakpoint <= score; flat beyond either end.
  double predict(double score) const;
  VectorXd predict(const VectorXd& scores) const;
};

// Pool-adjacent-violators least-squares monotone fit of {0,1} targets on the
// scores. Observations sharing a score are pooled first.
IsotonicModel isotonic_fit(const VectorXd& scores, const VectorXi& binary_targets);

// {-1,+1} -> {0,1}.
VectorXi to_binary(const Labels& labels);

// Mean |model(score_i) - target_i| over {0,1} targets.
double calibration_mae(const IsotonicModel& model, const VectorXd& scores, const VectorXi& binary_targets);

// Sample variance (N - 1 denominator) of score_i - label_i.
double score_variance(const VectorXd& numeric_labels, const VectorXd& raw_scores);

// Scores of the requested kind from raw decision values. `clipped` clamps to
// [-1, 1]; `two_p_minus_one` fits an isotonic map per column on the rows
// flagged in `rows` (all rows when empty) and returns 2 P(y=+1) - 1. Rows
// outside the mask are passed through clipped.
MatrixXd apply_score_kind(const MatrixXd& raw, const Labels& targets, ScoreKind kind, const RowMask& rows = {});

}  // namespace stacklp
