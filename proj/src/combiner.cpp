#include "stacklp/combiner.hpp"

#include <cmath>
#include <limits>

#include "stacklp/error.hpp"
#include "stacklp/projection.hpp"

namespace stacklp {

namespace {

constexpr double kSlackTolerance = 1e-7;

void check_options(const LpOptions& options, Index k) {
  if (k < 1) throw Error(ErrorCode::invalid_argument, "combiner needs at least one model column");
  if (options.cap) {
    if (!(*options.cap > 0.0)) throw Error(ErrorCode::invalid_argument, "weight cap must be positive");
    if (options.sum_to_one && *options.cap * static_cast<double>(k) < 1.0 - 1e-12) {
      throw Error(ErrorCode::invalid_argument, "weight cap below 1/K leaves no feasible weights");
    }
  }
}

CombinerLp assemble(MatrixXd margin_rows, std::vector<std::pair<Index, int>> pairs, Formulation formulation,
                    const LpOptions& options, double weight_upper) {
  const Index k = margin_rows.cols();
  const Index s = margin_rows.rows();
  CombinerLp lp;
  lp.formulation = formulation;
  lp.options = options;
  lp.models = k;
  lp.problem = LpProblem<double>(k + s);
  lp.problem.objective.tail(s).setOnes();
  for (Index j = 0; j < k; ++j) lp.problem.bounds[static_cast<std::size_t>(j)].second = weight_upper;
  for (Index r = 0; r < s; ++r) {
    RowVectorX<double> row = RowVectorX<double>::Zero(k + s);
    row.head(k) = margin_rows.row(r);
    row(k + r) = 1.0;
    lp.problem.add(std::move(row), Relation::greater_equal, options.margin);
  }
  if (options.sum_to_one) {
    RowVectorX<double> row = RowVectorX<double>::Zero(k + s);
    row.head(k).setOnes();
    lp.problem.add(std::move(row), Relation::equal, 1.0);
  }
  lp.margin_rows = std::move(margin_rows);
  lp.pairs = std::move(pairs);
  return lp;
}

SlackVector slacks_for(const MatrixXd& margin_rows, const std::vector<std::pair<Index, int>>& pairs,
                       const VectorXd& w, double margin) {
  SlackVector out;
  out.xi = (margin - (margin_rows * w).array()).max(0.0).matrix();
  out.pairs = pairs;
  return out;
}

}  // namespace

const char* to_string(Formulation f) {
  switch (f) {
    case Formulation::bootstrap_lp: return "bootstrap_lp";
    case Formulation::single_lp: return "single_lp";
    case Formulation::qp: return "qp";
  }
  return "single_lp";
}

Formulation formulation_from_string(const std::string& name) {
  if (name == "bootstrap_lp") return Formulation::bootstrap_lp;
  if (name == "single_lp") return Formulation::single_lp;
  if (name == "qp") return Formulation::qp;
  throw Error(ErrorCode::config_error, "unknown formulation '" + name + "'");
}

int count_nonzero(const VectorXd& w, double threshold) {
  return static_cast<int>((w.array() > threshold).count());
}

CombinerLp build_lp_single(const MatrixXd& scores, const Labels& targets, const LpOptions& options) {
  check_options(options, scores.cols());
  if (scores.rows() != targets.size()) {
    throw Error(ErrorCode::dimension_mismatch, "score rows (" + std::to_string(scores.rows()) +
                                                   ") differ from target count (" +
                                                   std::to_string(targets.size()) + ")");
  }
  MatrixXd rows = targets.cast<double>().asDiagonal() * scores;
  std::vector<std::pair<Index, int>> pairs(static_cast<std::size_t>(scores.rows()));
  for (Index i = 0; i < scores.rows(); ++i) pairs[static_cast<std::size_t>(i)] = {i, 0};
  const double upper = options.cap ? *options.cap : std::numeric_limits<double>::infinity();
  return assemble(std::move(rows), std::move(pairs), Formulation::single_lp, options, upper);
}

CombinerLp build_lp_bootstrap(const std::vector<OofScoreMatrix>& replicates, const Labels& targets,
                              const LpOptions& options) {
  if (replicates.empty()) throw Error(ErrorCode::invalid_argument, "no bootstrap replicates");
  const Index n = targets.size();
  const Index k = replicates.front().models();
  check_options(options, k);

  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  Index count = 0;
  for (const auto& rep : replicates) {
    if (rep.rows() != n || rep.models() != k || rep.valid.size() != n) {
      throw Error(ErrorCode::dimension_mismatch, "replicate shape differs from N x K");
    }
    for (Index i = 0; i < n; ++i) {
      if (rep.valid(i)) {
        seen[static_cast<std::size_t>(i)] = true;
        ++count;
      }
    }
  }
  std::string missing;
  for (Index i = 0; i < n; ++i) {
    if (!seen[static_cast<std::size_t>(i)]) missing += (missing.empty() ? "" : ", ") + std::to_string(i);
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::never_out_of_bag, "instances never out-of-bag: " + missing);
  }

  MatrixXd rows(count, k);
  std::vector<std::pair<Index, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(count));
  Index r = 0;
  for (std::size_t d = 0; d < replicates.size(); ++d) {
    const auto& rep = replicates[d];
    for (Index i = 0; i < n; ++i) {
      if (!rep.valid(i)) continue;
      rows.row(r++) = static_cast<double>(targets(i)) * rep.scores.row(i);
      pairs.emplace_back(i, static_cast<int>(d));
    }
  }
  const double upper = options.cap ? std::min(1.0, *options.cap) : 1.0;
  return assemble(std::move(rows), std::move(pairs), Formulation::bootstrap_lp, options, upper);
}

std::pair<CombinerWeights, SlackVector> solve_weights_lp(const CombinerLp& lp, const LpTolerances& tol) {
  const auto solution = solve_lp(lp.problem, tol);
  switch (solution.status) {
    case LpStatus::optimal:
      break;
    case LpStatus::infeasible:
    case LpStatus::unbounded:
      throw Error(ErrorCode::solver_failure, std::string("internal error: weight LP (") + to_string(lp.formulation) +
                                                 ") reported " + to_string(solution.status));
    case LpStatus::iteration_limit:
      throw Error(ErrorCode::solver_failure, std::string("weight LP (") + to_string(lp.formulation) +
                                                 ") hit its iteration budget after " +
                                                 std::to_string(solution.iterations) + " pivots");
  }
  const Index k = lp.models;
  CombinerWeights w;
  w.weights = solution.x.head(k).cwiseMax(0.0);
  w.formulation = lp.formulation;
  w.margin = lp.options.margin;
  w.cap = lp.options.cap;
  w.sum_to_one = lp.options.sum_to_one;
  w.objective_value = solution.objective_value;
  w.nonzero_count = count_nonzero(w.weights);

  SlackVector slack = slacks_for(lp.margin_rows, lp.pairs, w.weights, lp.options.margin);
  const VectorXd lp_xi = solution.x.tail(solution.x.size() - k);
  const double gap = (slack.xi - lp_xi).cwiseAbs().maxCoeff();
  if (!(gap <= kSlackTolerance * (1.0 + lp.margin_rows.cwiseAbs().maxCoeff()))) {
    throw Error(ErrorCode::solver_failure,
                "recomputed slacks differ from LP slacks by " + std::to_string(gap));
  }
  return {w, slack};
}

double hinge_objective(const MatrixXd& scores, const Labels& targets, const VectorXd& w, double margin) {
  const VectorXd m = targets.cast<double>().cwiseProduct(scores * w);
  return (margin - m.array()).max(0.0).sum();
}

double qp_objective(const MatrixXd& scores, const Labels& targets, const VectorXd& w, double penalty_c,
                    double margin) {
  return 0.5 * w.squaredNorm() + penalty_c * hinge_objective(scores, targets, w, margin);
}

std::pair<CombinerWeights, SlackVector> solve_weights_qp(const MatrixXd& scores, const Labels& targets,
                                                         double penalty_c, const QpOptions& options) {
  const Index k = scores.cols();
  if (k < 1) throw Error(ErrorCode::invalid_argument, "combiner needs at least one model column");
  if (scores.rows() != targets.size()) {
    throw Error(ErrorCode::dimension_mismatch, "score rows differ from target count");
  }
  if (!(penalty_c > 0.0)) throw Error(ErrorCode::invalid_argument, "QP penalty C must be positive");
  if (options.iterations < 1) throw Error(ErrorCode::invalid_argument, "QP iteration count must be positive");

  const MatrixXd rows = targets.cast<double>().asDiagonal() * scores;
  auto objective = [&](const VectorXd& w) {
    return 0.5 * w.squaredNorm() + penalty_c * (options.margin - (rows * w).array()).max(0.0).sum();
  };

  VectorXd best = VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  double best_f = objective(best);
  for (Index j = 0; j < k; ++j) {
    const VectorXd e = VectorXd::Unit(k, j);
    const double f = objective(e);
    if (f < best_f) {
      best_f = f;
      best = e;
    }
  }

  VectorXd w = VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  VectorXd average = w;
  for (long t = 1; t <= options.iterations; ++t) {
    const VectorXd margins = rows * w;
    VectorXd grad = w;
    double hinge = 0.0;
    for (Index i = 0; i < rows.rows(); ++i) {
      if (margins(i) < options.margin) {
        grad.noalias() -= penalty_c * rows.row(i).transpose();
        hinge += options.margin - margins(i);
      }
    }
    const double f = 0.5 * w.squaredNorm() + penalty_c * hinge;
    if (f < best_f) {
      best_f = f;
      best = w;
    }
    w = project_simplex(w - grad / static_cast<double>(t));
    average += (w - average) / static_cast<double>(t + 1);
  }
  for (const VectorXd* candidate : {&w, &average}) {
    const double f = objective(*candidate);
    if (f < best_f) {
      best_f = f;
      best = *candidate;
    }
  }

  CombinerWeights out;
  out.weights = best;
  out.formulation = Formulation::qp;
  out.margin = options.margin;
  out.penalty_c = penalty_c;
  out.objective_value = best_f;
  out.nonzero_count = count_nonzero(best);

  std::vector<std::pair<Index, int>> pairs(static_cast<std::size_t>(rows.rows()));
  for (Index i = 0; i < rows.rows(); ++i) pairs[static_cast<std::size_t>(i)] = {i, 0};
  return {out, slacks_for(rows, pairs, best, options.margin)};
}

CombinedPrediction combine_predict(const CombinerWeights& w, const Eigen::Ref<const VectorXd>& score_row) {
  if (score_row.size() != w.weights.size()) {
    throw Error(ErrorCode::dimension_mismatch, "score row has " + std::to_string(score_row.size()) +
                                                   " entries, weights have " + std::to_string(w.weights.size()));
  }
  const double s = score_row.dot(w.weights);
  return {s, sign_label(s)};
}

VectorXd combine_scores(const CombinerWeights& w, const MatrixXd& scores) {
  if (scores.cols() != w.weights.size()) {
    throw Error(ErrorCode::dimension_mismatch, "score matrix width differs from weight count");
  }
  return scores * w.weights;
}

}  // namespace stacklp
