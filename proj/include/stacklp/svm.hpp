#pragma once

#include "stacklp/dataspace.hpp"
#include "stacklp/types.hpp"

namespace stacklp {

enum class FeatureScaling { standardize, min_max, none };

// Per-feature affine map fitted on a training portion: z-scores, or the
// column range mapped onto [-1, 1]. Constant features get a unit scale.
struct Standardizer {
  VectorXd mean;
  VectorXd scale;

  static Standardizer fit(const MatrixXd& x, FeatureScaling scaling);
  MatrixXd apply(const MatrixXd& x) const;
  VectorXd apply(const Eigen::Ref<const VectorXd>& x) const;
};

struct SvmParams {
  double cost = 1.0;
  double gamma = 1.0;
  double tol = 1e-3;
  long max_iterations = 10'000'000;
  FeatureScaling scaling = FeatureScaling::standardize;
};

// RBF soft-margin SVM. `coefficients` holds alpha_i * t_i for the retained
// support vectors, which are stored already scaled.
struct SvmModel {
  MatrixXd support_vectors;
  VectorXd coefficients;
  double bias = 0.0;
  double gamma = 1.0;
  double cost = 1.0;
  Standardizer scaler;
  bool converged = true;
  long iterations = 0;
};

// exp(-gamma * |a_i - b_j|^2) for every row pair.
MatrixXd rbf_kernel(const MatrixXd& a, const MatrixXd& b, double gamma);

struct SmoResult {
  VectorXd alpha;
  double bias = 0.0;
  long iterations = 0;
  bool converged = true;
};

// Solves the soft-margin dual
//   max  sum(alpha) - 1/2 sum_ij alpha_i alpha_j t_i t_j K_ij
//   s.t. 0 <= alpha_i <= cost,  sum_i alpha_i t_i = 0
// by SMO over a precomputed kernel. Stops when the maximal KKT violation
// (m(alpha) - M(alpha)) drops below tol, or after max_iterations with
// converged = false.
SmoResult solve_smo(const MatrixXd& kernel, const Labels& targets, double cost,
                    double tol, long max_iterations);

double svm_dual_objective(const MatrixXd& kernel, const Labels& targets,
                          const VectorXd& alpha);

SvmModel train_svm(const LabeledDataset& train, const SvmParams& params);

// Raw decision value for unscaled features x; predicted label is +1 iff >= 0.
double decision_score(const SvmModel& model, const Eigen::Ref<const VectorXd>& x);
VectorXd decision_scores(const SvmModel& model, const MatrixXd& x);

// Majority label among the k nearest training rows (Euclidean, equal
// distances resolved by row order). A tied vote goes to +1.
int knn_predict(const LabeledDataset& train, const Eigen::Ref<const VectorXd>& x, int k);

}  // namespace stacklp
