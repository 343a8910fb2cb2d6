#include "stacklp/evalkit.hpp"

#include <algorithm>
#include <numeric>

#include "stacklp/error.hpp"

namespace stacklp {

double accuracy(const Labels& labels, const Labels& predictions) {
  if (labels.size() == 0) throw Error(ErrorCode::invalid_argument, "accuracy of an empty sequence");
  if (labels.size() != predictions.size()) {
    throw Error(ErrorCode::dimension_mismatch, "accuracy: label and prediction lengths differ");
  }
  return static_cast<double>((labels.array() == predictions.array()).count()) /
         static_cast<double>(labels.size());
}

Labels predicted_labels(const VectorXd& scores) {
  return scores.unaryExpr([](double s) { return sign_label(s); });
}

namespace {

void check_binary_problem(const Labels& labels, const VectorXd& scores) {
  if (labels.size() != scores.size()) {
    throw Error(ErrorCode::dimension_mismatch, "label and score lengths differ");
  }
  const auto pos = (labels.array() == 1).count();
  const auto neg = (labels.array() == -1).count();
  if (pos + neg != labels.size()) throw Error(ErrorCode::invalid_argument, "labels must be -1 or +1");
  if (pos == 0 || neg == 0) throw Error(ErrorCode::single_class, "ROC needs both classes");
}

}  // namespace

RocCurve roc_auc(const Labels& labels, const VectorXd& scores) {
  check_binary_problem(labels, scores);
  const Index n = labels.size();
  const double pos = static_cast<double>((labels.array() == 1).count());
  const double neg = static_cast<double>(n) - pos;

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return scores(a) > scores(b); });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  double tp = 0.0, fp = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores(order[i]);
    while (i < order.size() && scores(order[i]) == threshold) {
      if (labels(order[i]) == 1) tp += 1.0; else fp += 1.0;
      ++i;
    }
    curve.points.push_back({fp / neg, tp / pos, threshold});
  }
  double area = 0.0;
  for (std::size_t p = 1; p < curve.points.size(); ++p) {
    const auto& a = curve.points[p - 1];
    const auto& b = curve.points[p];
    area += (b.false_positive_rate - a.false_positive_rate) * (a.true_positive_rate + b.true_positive_rate) / 2.0;
  }
  curve.auc = area;
  return curve;
}

double auc_pair_count(const Labels& labels, const VectorXd& scores) {
  check_binary_problem(labels, scores);
  double wins = 0.0, pairs = 0.0;
  for (Index i = 0; i < labels.size(); ++i) {
    if (labels(i) != 1) continue;
    for (Index j = 0; j < labels.size(); ++j) {
      if (labels(j) != -1) continue;
      pairs += 1.0;
      if (scores(i) > scores(j)) wins += 1.0;
      else if (scores(i) == scores(j)) wins += 0.5;
    }
  }
  return wins / pairs;
}

double IsotonicModel::predict(double score) const {
  if (breakpoints.empty()) throw Error(ErrorCode::invalid_argument, "empty isotonic model");
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), score);
  if (it == breakpoints.begin()) return fitted.front();
  return fitted[static_cast<std::size_t>(it - breakpoints.begin() - 1)];
}

VectorXd IsotonicModel::predict(const VectorXd& scores) const {
  return scores.unaryExpr([this](double s) { return predict(s); });
}

IsotonicModel isotonic_fit(const VectorXd& scores, const VectorXi& binary_targets) {
  if (scores.size() == 0) throw Error(ErrorCode::invalid_argument, "isotonic fit of an empty sequence");
  if (scores.size() != binary_targets.size()) {
    throw Error(ErrorCode::dimension_mismatch, "isotonic fit: score and target lengths differ");
  }
  if (((binary_targets.array() != 0) && (binary_targets.array() != 1)).any()) {
    throw Error(ErrorCode::invalid_argument, "isotonic fit: targets must be 0 or 1");
  }
  std::vector<Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return scores(a) < scores(b); });

  // One block per distinct score to start with.
  struct Block {
    double sum;
    double weight;
    std::size_t first_level;  // index into `levels`
  };
  std::vector<double> levels;
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores(order[i]);
    Block b{0.0, 0.0, levels.size()};
    while (i < order.size() && scores(order[i]) == s) {
      b.sum += binary_targets(order[i]);
      b.weight += 1.0;
      ++i;
    }
    levels.push_back(s);
    // Merge backwards while the previous block's mean exceeds this one's.
    while (!blocks.empty() && blocks.back().sum * b.weight >= b.sum * blocks.back().weight) {
      b.sum += blocks.back().sum;
      b.weight += blocks.back().weight;
      b.first_level = blocks.back().first_level;
      blocks.pop_back();
    }
    blocks.push_back(b);
  }

  IsotonicModel model;
  model.breakpoints = levels;
  model.fitted.resize(levels.size());
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const std::size_t end = k + 1 < blocks.size() ? blocks[k + 1].first_level : levels.size();
    const double value = std::clamp(blocks[k].sum / blocks[k].weight, 0.0, 1.0);
    std::fill(model.fitted.begin() + static_cast<std::ptrdiff_t>(blocks[k].first_level),
              model.fitted.begin() + static_cast<std::ptrdiff_t>(end), value);
  }
  return model;
}

VectorXi to_binary(const Labels& labels) {
  return labels.unaryExpr([](int t) { return t > 0 ? 1 : 0; });
}

double calibration_mae(const IsotonicModel& model, const VectorXd& scores, const VectorXi& binary_targets) {
  if (scores.size() == 0) throw Error(ErrorCode::invalid_argument, "calibration error of an empty sequence");
  if (scores.size() != binary_targets.size()) {
    throw Error(ErrorCode::dimension_mismatch, "calibration error: score and target lengths differ");
  }
  return (model.predict(scores) - binary_targets.cast<double>()).cwiseAbs().mean();
}

double score_variance(const VectorXd& numeric_labels, const VectorXd& raw_scores) {
  if (numeric_labels.size() != raw_scores.size()) {
    throw Error(ErrorCode::dimension_mismatch, "score variance: lengths differ");
  }
  if (raw_scores.size() < 2) throw Error(ErrorCode::invalid_argument, "score variance needs at least 2 values");
  const VectorXd diff = raw_scores - numeric_labels;
  const double mean = diff.mean();
  return (diff.array() - mean).square().sum() / static_cast<double>(diff.size() - 1);
}

MatrixXd apply_score_kind(const MatrixXd& raw, const Labels& targets, ScoreKind kind, const RowMask& rows) {
  if (raw.rows() != targets.size()) throw Error(ErrorCode::dimension_mismatch, "score rows differ from target count");
  if (rows.size() != 0 && rows.size() != raw.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "row mask length differs from score rows");
  }
  switch (kind) {
    case ScoreKind::raw:
      return raw;
    case ScoreKind::clipped:
      return raw.cwiseMax(-1.0).cwiseMin(1.0);
    case ScoreKind::two_p_minus_one:
      break;
  }
  std::vector<Index> fit_rows;
  for (Index i = 0; i < raw.rows(); ++i) {
    if (rows.size() == 0 || rows(i)) fit_rows.push_back(i);
  }
  if (fit_rows.empty()) throw Error(ErrorCode::invalid_argument, "no rows to calibrate on");
  const VectorXi binary = to_binary(targets(fit_rows));
  MatrixXd out = raw.cwiseMax(-1.0).cwiseMin(1.0);
  for (Index k = 0; k < raw.cols(); ++k) {
    const VectorXd column = raw.col(k)(fit_rows);
    const IsotonicModel model = isotonic_fit(column, binary);
    for (const Index i : fit_rows) out(i, k) = 2.0 * model.predict(raw(i, k)) - 1.0;
  }
  return out;
}

}  // namespace stacklp
