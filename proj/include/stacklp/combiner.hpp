#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stacklp/grid.hpp"
#include "stacklp/lp.hpp"
#include "stacklp/types.hpp"

namespace stacklp {

enum class Formulation { bootstrap_lp, single_lp, qp };

const char* to_string(Formulation f);
Formulation formulation_from_string(const std::string& name);

struct CombinerWeights {
  VectorXd weights;
  Formulation formulation = Formulation::single_lp;
  double margin = 0.5;
  std::optional<double> cap;
  std::optional<double> penalty_c;
  bool sum_to_one = true;
  double objective_value = 0.0;
  int nonzero_count = 0;
};

// Weights above this count as nonzero when reporting sparsity.
inline constexpr double kNonzeroWeight = 1e-6;

int count_nonzero(const VectorXd& w, double threshold = kNonzeroWeight);

// Hinge slacks max(0, margin - t_i z_i.w); for the bootstrap formulation one
// per valid (instance, replicate) pair, listed in `pairs`.
struct SlackVector {
  VectorXd xi;
  std::vector<std::pair<Index, int>> pairs;  // (instance, replicate)
};

struct LpOptions {
  double margin = 0.5;
  std::optional<double> cap;  // w_k <= cap
  bool sum_to_one = true;
};

// An assembled weight LP. Variables are (w_1..w_K, xi_1..xi_S); constraint s
// reads  margin_row_s . w + xi_s >= margin  with margin_row_s = t_i z_i.
struct CombinerLp {
  LpProblem<double> problem;
  Formulation formulation = Formulation::single_lp;
  LpOptions options;
  Index models = 0;
  MatrixXd margin_rows;  // S x K
  std::vector<std::pair<Index, int>> pairs;
};

// Averaged/probability formulation over one N x K score matrix:
//   min sum_i xi_i  s.t.  t_i (z_i . w) >= margin - xi_i,  xi >= 0,
//                         0 <= w (<= cap),  sum w = 1.
CombinerLp build_lp_single(const MatrixXd& scores, const Labels& targets, const LpOptions& options = {});

// Replicate formulation: one slack per out-of-bag (i, d) pair, objective
// sum_d sum_i xi_id, weights additionally bounded by 1.
CombinerLp build_lp_bootstrap(const std::vector<OofScoreMatrix>& replicates, const Labels& targets,
                              const LpOptions& options = {});

// Solves the LP, then recomputes every slack from w and checks it against
// the LP's value.
std::pair<CombinerWeights, SlackVector> solve_weights_lp(const CombinerLp& lp,
                                                         const LpTolerances& tol = {});

// sum_i max(0, margin - t_i z_i.w).
double hinge_objective(const MatrixXd& scores, const Labels& targets, const VectorXd& w, double margin);

struct QpOptions {
  long iterations = 100'000;
  double margin = 1.0;
};

// 1/2 |w|^2 + C * hinge(w) with margin 1.
double qp_objective(const MatrixXd& scores, const Labels& targets, const VectorXd& w, double penalty_c,
                    double margin = 1.0);

// Minimises qp_objective over the probability simplex by projected
// subgradient (step 1/t, strong convexity 1) with iterate averaging. The best
// point seen among the iterates, their running average, the uniform weights
// and the pure single-model weights is returned.
std::pair<CombinerWeights, SlackVector> solve_weights_qp(const MatrixXd& scores, const Labels& targets,
                                                         double penalty_c, const QpOptions& options = {});

struct CombinedPrediction {
  double score = 0.0;
  int label = 1;
};

// z . w; label +1 iff the score is >= 0.
CombinedPrediction combine_predict(const CombinerWeights& w, const Eigen::Ref<const VectorXd>& score_row);
VectorXd combine_scores(const CombinerWeights& w, const MatrixXd& scores);

}  // namespace stacklp
