#include "stacklp/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stacklp/error.hpp"

namespace stacklp {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Standardizer Standardizer::fit(const MatrixXd& x, FeatureScaling scaling) {
  Standardizer s;
  const Index f = x.cols();
  if (scaling == FeatureScaling::none || x.rows() == 0) {
    s.mean = VectorXd::Zero(f);
    s.scale = VectorXd::Ones(f);
    return s;
  }
  if (scaling == FeatureScaling::min_max) {
    // Map each training column onto [-1, 1].
    const VectorXd lo = x.colwise().minCoeff().transpose();
    const VectorXd hi = x.colwise().maxCoeff().transpose();
    s.mean = (lo + hi) / 2.0;
    s.scale = ((hi - lo) / 2.0).unaryExpr([](double h) { return h > 0.0 ? h : 1.0; });
    return s;
  }
  s.mean = x.colwise().mean().transpose();
  s.scale.resize(f);
  for (Index c = 0; c < f; ++c) {
    const double var = x.rows() > 1
                           ? (x.col(c).array() - s.mean(c)).square().sum() / static_cast<double>(x.rows() - 1)
                           : 0.0;
    s.scale(c) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

MatrixXd Standardizer::apply(const MatrixXd& x) const {
  return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

VectorXd Standardizer::apply(const Eigen::Ref<const VectorXd>& x) const {
  return (x - mean).cwiseQuotient(scale);
}

MatrixXd rbf_kernel(const MatrixXd& a, const MatrixXd& b, double gamma) {
  const VectorXd an = a.rowwise().squaredNorm();
  const VectorXd bn = b.rowwise().squaredNorm();
  MatrixXd d2 = (-2.0 * a * b.transpose()).colwise() + an;
  d2.rowwise() += bn.transpose();
  return (-gamma * d2.array().max(0.0)).exp().matrix();
}

SmoResult solve_smo(const MatrixXd& kernel, const Labels& targets, double cost, double tol,
                    long max_iterations) {
  const Index n = targets.size();
  const VectorXd y = targets.cast<double>();
  VectorXd alpha = VectorXd::Zero(n);
  VectorXd grad = VectorXd::Constant(n, -1.0);  // Q alpha - e

  auto upper = [&](Index t) { return alpha(t) >= cost; };
  auto lower = [&](Index t) { return alpha(t) <= 0.0; };

  SmoResult result;
  long iter = 0;
  for (;; ++iter) {
    // i: maximal -y_t G_t over I_up.
    double gmax = -kInf;
    Index i = -1;
    for (Index t = 0; t < n; ++t) {
      if (targets(t) == 1 ? !upper(t) : !lower(t)) {
        const double v = -y(t) * grad(t);
        if (v >= gmax) {
          gmax = v;
          i = t;
        }
      }
    }
    // j: second-order gain among I_low.
    double gmax2 = -kInf;
    Index j = -1;
    double best_gain = kInf;
    for (Index t = 0; t < n && i >= 0; ++t) {
      if (targets(t) == 1 ? !lower(t) : !upper(t)) {
        const double v = y(t) * grad(t);
        gmax2 = std::max(gmax2, v);
        const double diff = gmax + v;
        if (diff > 0.0) {
          double quad = kernel(i, i) + kernel(t, t) - 2.0 * kernel(i, t);
          if (quad <= 0.0) quad = kTau;
          const double gain = -(diff * diff) / quad;
          if (gain <= best_gain) {
            best_gain = gain;
            j = t;
          }
        }
      }
    }
    if (i < 0 || j < 0 || gmax + gmax2 < tol) break;
    if (iter >= max_iterations) {
      result.converged = false;
      break;
    }

    const double old_i = alpha(i);
    const double old_j = alpha(j);
    double quad = kernel(i, i) + kernel(j, j) - 2.0 * kernel(i, j);
    if (quad <= 0.0) quad = kTau;
    if (targets(i) != targets(j)) {
      const double delta = (-grad(i) - grad(j)) / quad;
      const double diff = alpha(i) - alpha(j);
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0.0) {
        if (alpha(j) < 0.0) {
          alpha(j) = 0.0;
          alpha(i) = diff;
        }
      } else if (alpha(i) < 0.0) {
        alpha(i) = 0.0;
        alpha(j) = -diff;
      }
      if (diff > 0.0) {
        if (alpha(i) > cost) {
          alpha(i) = cost;
          alpha(j) = cost - diff;
        }
      } else if (alpha(j) > cost) {
        alpha(j) = cost;
        alpha(i) = cost + diff;
      }
    } else {
      const double delta = (grad(i) - grad(j)) / quad;
      const double sum = alpha(i) + alpha(j);
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > cost) {
        if (alpha(i) > cost) {
          alpha(i) = cost;
          alpha(j) = sum - cost;
        }
      } else if (alpha(j) < 0.0) {
        alpha(j) = 0.0;
        alpha(i) = sum;
      }
      if (sum > cost) {
        if (alpha(j) > cost) {
          alpha(j) = cost;
          alpha(i) = sum - cost;
        }
      } else if (alpha(i) < 0.0) {
        alpha(i) = 0.0;
        alpha(j) = sum;
      }
    }

    const double di = (alpha(i) - old_i) * y(i);
    const double dj = (alpha(j) - old_j) * y(j);
    grad.array() += y.array() * (kernel.col(i).array() * di + kernel.col(j).array() * dj);
  }

  // Bias: mean over free multipliers, else the midpoint of the feasible range.
  double ub = kInf, lb = -kInf, sum_free = 0.0;
  long nr_free = 0;
  for (Index t = 0; t < n; ++t) {
    const double yg = y(t) * grad(t);
    if (upper(t)) {
      if (targets(t) == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (targets(t) == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++nr_free;
      sum_free += yg;
    }
  }
  const double rho = nr_free > 0 ? sum_free / static_cast<double>(nr_free) : (ub + lb) / 2.0;

  result.alpha = std::move(alpha);
  result.bias = -rho;
  result.iterations = iter;
  return result;
}

double svm_dual_objective(const MatrixXd& kernel, const Labels& targets, const VectorXd& alpha) {
  const VectorXd ay = alpha.cwiseProduct(targets.cast<double>());
  return alpha.sum() - 0.5 * ay.dot(kernel * ay);
}

SvmModel train_svm(const LabeledDataset& train, const SvmParams& params) {
  validate(train);
  require_both_classes(train, "svm training set");
  if (!(params.cost > 0.0) || !(params.gamma > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "svm cost and gamma must be positive");
  }
  if (!(params.tol > 0.0) || params.max_iterations < 1) {
    throw Error(ErrorCode::invalid_argument, "svm tolerance and iteration budget must be positive");
  }

  SvmModel model;
  model.gamma = params.gamma;
  model.cost = params.cost;
  model.scaler = Standardizer::fit(train.features, params.scaling);
  const MatrixXd x = model.scaler.apply(train.features);
  const MatrixXd kernel = rbf_kernel(x, x, params.gamma);
  const SmoResult smo = solve_smo(kernel, train.targets, params.cost, params.tol, params.max_iterations);

  std::vector<Index> support;
  for (Index i = 0; i < smo.alpha.size(); ++i) {
    if (smo.alpha(i) > 0.0) support.push_back(i);
  }
  model.support_vectors.resize(static_cast<Index>(support.size()), x.cols());
  model.coefficients.resize(static_cast<Index>(support.size()));
  for (std::size_t s = 0; s < support.size(); ++s) {
    model.support_vectors.row(static_cast<Index>(s)) = x.row(support[s]);
    model.coefficients(static_cast<Index>(s)) = smo.alpha(support[s]) * train.targets(support[s]);
  }
  model.bias = smo.bias;
  model.converged = smo.converged;
  model.iterations = smo.iterations;
  return model;
}

double decision_score(const SvmModel& model, const Eigen::Ref<const VectorXd>& x) {
  if (x.size() != model.scaler.mean.size()) {
    throw Error(ErrorCode::dimension_mismatch, "feature vector has " + std::to_string(x.size()) +
                                                   " entries, model expects " +
                                                   std::to_string(model.scaler.mean.size()));
  }
  const VectorXd z = model.scaler.apply(x);
  double score = model.bias;
  for (Index s = 0; s < model.support_vectors.rows(); ++s) {
    score += model.coefficients(s) *
             std::exp(-model.gamma * (model.support_vectors.row(s).transpose() - z).squaredNorm());
  }
  return score;
}

VectorXd decision_scores(const SvmModel& model, const MatrixXd& x) {
  if (x.cols() != model.scaler.mean.size()) {
    throw Error(ErrorCode::dimension_mismatch, "feature matrix width does not match the model");
  }
  if (model.support_vectors.rows() == 0) return VectorXd::Constant(x.rows(), model.bias);
  const MatrixXd k = rbf_kernel(model.scaler.apply(x), model.support_vectors, model.gamma);
  return (k * model.coefficients).array() + model.bias;
}

int knn_predict(const LabeledDataset& train, const Eigen::Ref<const VectorXd>& x, int k) {
  const Index n = train.size();
  if (n == 0) throw Error(ErrorCode::degenerate_dataset, "knn: empty training set");
  if (k < 1 || k > n) {
    throw Error(ErrorCode::invalid_argument, "knn: k must lie in [1, " + std::to_string(n) + "]");
  }
  if (x.size() != train.dimension()) {
    throw Error(ErrorCode::dimension_mismatch, "knn: query dimension does not match training data");
  }
  const VectorXd d2 = (train.features.rowwise() - x.transpose()).rowwise().squaredNorm();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return d2(a) < d2(b); });
  int vote = 0;
  for (int r = 0; r < k; ++r) vote += train.targets(order[static_cast<std::size_t>(r)]);
  return vote >= 0 ? 1 : -1;
}

}  // namespace stacklp
