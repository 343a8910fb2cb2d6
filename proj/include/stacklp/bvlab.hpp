#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace stacklp {

// One input point: the label t is +1 with probability `p_true`, and the
// prediction y is drawn either independently of t (P(y=+1) = q) or through
// a table P(y=+1 | t).
struct PointWorld {
  enum class Channel { independent, coupled };

  double p_true = 0.5;
  Channel channel = Channel::independent;
  double q = 0.5;
  double y_pos_given_t_pos = 0.5;
  double y_pos_given_t_neg = 0.5;

  static PointWorld independent(double p_true, double q);
  static PointWorld coupled(double p_true, double y_pos_given_t_pos, double y_pos_given_t_neg);
  // Prediction equal to the observed label, as for one nearest neighbour
  // evaluated at a training point.
  static PointWorld copies_label(double p_true);

  // Throws Error(invalid_argument) on a probability outside [0, 1].
  void validate() const;

  int bayes_label() const { return p_true >= 0.5 ? 1 : -1; }
  double bayes_error() const;
  // Marginal P(y = +1).
  double prediction_rate() const;
};

struct BvEstimates {
  double bayes_error = 0.0;
  double variance = 0.0;
  double loss_ind = 0.0;
  double loss_dep = 0.0;
  double optimism = 0.0;
  double se_bayes_error = 0.0;
  double se_variance = 0.0;
  double se_loss_ind = 0.0;
  double se_loss_dep = 0.0;
  double se_optimism = 0.0;
};

struct BvReport {
  double p_true = 0.0;
  double bayes_error = 0.0;
  int bayes_label = 1;
  int majority_prediction = 1;
  int bias = 0;
  double variance = 0.0;
  // Error against a label drawn independently of the prediction.
  double expected_loss_ind = 0.0;
  // Same quantity as a plain two-way table sum, kept as a cross-check.
  double expected_loss_ind_direct = 0.0;
  std::optional<double> expected_loss_dep;
  std::optional<double> optimism;

  std::optional<BvEstimates> mc_estimates;
  long trials = 0;
  std::uint64_t seed = 0;
};

// Independent channel only; a coupled world is rejected.
// loss = BE + bias(1-2BE) + var(1-2BE) - 2 var bias (1-2BE).
BvReport analytic_decomposition(const PointWorld& world);

// Any channel. Adds the loss against the same label the prediction was
// coupled to, BE - 2 BE P(y != y* | t != y*) + P(y != y*), and the optimism
// 2 BE (P(y != y* | t != y*) - P(y != y*)), the gap between the two losses.
BvReport dependent_decomposition(const PointWorld& world);

// Frequency estimates over `trials` simulated (t, y, t') triples, t' being a
// fresh label for the independent loss. Trials are split into fixed chunks
// with seeds derived from `seed`, so the result depends only on the inputs.
BvReport monte_carlo_decomposition(const PointWorld& world, long trials, std::uint64_t seed);

// (be, 2 be - 2 be^2) for each grid value in [0, 0.5].
std::vector<std::pair<double, double>> one_nn_curve(const std::vector<double>& bayes_errors);

struct OneNnCheck {
  double p_true = 0.0;
  long trials = 0;
  std::uint64_t seed = 0;
  long training_errors = 0;  // probe misclassified against its own training label
  double test_error = 0.0;   // against a fresh label at the probe
  double test_error_se = 0.0;
  double expected_test_error = 0.0;
  bool within_three_se = false;
};

// Each trial draws a 1-D training set whose points all carry labels
// Bernoulli(p_true), one of them at the probe location, fits 1-NN and scores
// the probe against its own label and against a fresh one.
OneNnCheck empirical_1nn_check(double p_true, long trials, std::uint64_t seed, int training_points = 10);

}  // namespace stacklp
