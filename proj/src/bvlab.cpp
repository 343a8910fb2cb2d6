#include "stacklp/bvlab.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stacklp/dataspace.hpp"
#include "stacklp/error.hpp"
#include "stacklp/random.hpp"
#include "stacklp/svm.hpp"

namespace stacklp {

namespace {

constexpr long kChunkTrials = 1L << 16;
constexpr double kIdentityTolerance = 1e-12;

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, std::string(name) + " must lie in [0, 1], got " + std::to_string(p));
  }
}

// P(y != y*).
double prediction_error_rate(const PointWorld& world) {
  const double q = world.prediction_rate();
  return world.bayes_label() == 1 ? 1.0 - q : q;
}

// P(y != y* | t != y*); zero when t never differs from y*.
double error_rate_given_label_error(const PointWorld& world) {
  if (world.bayes_error() == 0.0) return 0.0;
  if (world.channel == PointWorld::Channel::independent) return prediction_error_rate(world);
  return world.bayes_label() == 1 ? 1.0 - world.y_pos_given_t_neg : world.y_pos_given_t_pos;
}

BvReport base_report(const PointWorld& world) {
  world.validate();
  BvReport r;
  r.p_true = world.p_true;
  r.bayes_error = world.bayes_error();
  r.bayes_label = world.bayes_label();
  const double q = world.prediction_rate();
  r.majority_prediction = q >= 0.5 ? 1 : -1;
  r.bias = r.majority_prediction != r.bayes_label ? 1 : 0;
  r.variance = std::min(q, 1.0 - q);

  const double be = r.bayes_error;
  const double bias = r.bias;
  const double var = r.variance;
  r.expected_loss_ind = be + bias * (1.0 - 2.0 * be) + var * (1.0 - 2.0 * be) - 2.0 * var * bias * (1.0 - 2.0 * be);
  r.expected_loss_ind_direct = q * (1.0 - world.p_true) + (1.0 - q) * world.p_true;
  if (std::abs(r.expected_loss_ind - r.expected_loss_ind_direct) > kIdentityTolerance) {
    throw Error(ErrorCode::solver_failure, "decomposition disagrees with the direct loss: " +
                                               std::to_string(r.expected_loss_ind) + " vs " +
                                               std::to_string(r.expected_loss_ind_direct));
  }
  return r;
}

struct Tally {
  long n = 0;
  long label_errors = 0;      // t != y*
  long off_majority = 0;      // y != y^m
  long ind_errors = 0;        // y != t'
  long dep_errors = 0;        // y != t
  long optimism_sum = 0;      // sum of [y != t'] - [y != t]
  long optimism_abs_sum = 0;  // sum of squares of the same (values in {-1, 0, 1})
};

Tally simulate_chunk(const PointWorld& world, int majority, long trials, std::uint64_t seed) {
  Rng rng(seed);
  const int bayes = world.bayes_label();
  Tally tally;
  tally.n = trials;
  for (long i = 0; i < trials; ++i) {
    const int t = rng.bernoulli(world.p_true) ? 1 : -1;
    double py;
    if (world.channel == PointWorld::Channel::independent) py = world.q;
    else py = t == 1 ? world.y_pos_given_t_pos : world.y_pos_given_t_neg;
    const int y = rng.bernoulli(py) ? 1 : -1;
    const int fresh = rng.bernoulli(world.p_true) ? 1 : -1;
    const int ind = y != fresh ? 1 : 0;
    const int dep = y != t ? 1 : 0;
    tally.label_errors += t != bayes;
    tally.off_majority += y != majority;
    tally.ind_errors += ind;
    tally.dep_errors += dep;
    tally.optimism_sum += ind - dep;
    tally.optimism_abs_sum += (ind - dep) * (ind - dep);
  }
  return tally;
}

double frequency_se(double p, long n) { return std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

}  // namespace

PointWorld PointWorld::independent(double p_true, double q) {
  PointWorld w;
  w.p_true = p_true;
  w.channel = Channel::independent;
  w.q = q;
  w.validate();
  return w;
}

PointWorld PointWorld::coupled(double p_true, double y_pos_given_t_pos, double y_pos_given_t_neg) {
  PointWorld w;
  w.p_true = p_true;
  w.channel = Channel::coupled;
  w.y_pos_given_t_pos = y_pos_given_t_pos;
  w.y_pos_given_t_neg = y_pos_given_t_neg;
  w.validate();
  return w;
}

PointWorld PointWorld::copies_label(double p_true) { return coupled(p_true, 1.0, 0.0); }

void PointWorld::validate() const {
  check_probability(p_true, "p_true");
  if (channel == Channel::independent) {
    check_probability(q, "q");
  } else {
    check_probability(y_pos_given_t_pos, "P(y=+1 | t=+1)");
    check_probability(y_pos_given_t_neg, "P(y=+1 | t=-1)");
  }
}

double PointWorld::bayes_error() const { return std::min(p_true, 1.0 - p_true); }

double PointWorld::prediction_rate() const {
  if (channel == Channel::independent) return q;
  return p_true * y_pos_given_t_pos + (1.0 - p_true) * y_pos_given_t_neg;
}

BvReport analytic_decomposition(const PointWorld& world) {
  if (world.channel != PointWorld::Channel::independent) {
    throw Error(ErrorCode::invalid_argument, "analytic decomposition needs an independent channel; "
                                             "use the dependent decomposition for a coupled one");
  }
  return base_report(world);
}

BvReport dependent_decomposition(const PointWorld& world) {
  BvReport r = base_report(world);
  const double be = r.bayes_error;
  const double conditional = error_rate_given_label_error(world);
  const double marginal = prediction_error_rate(world);
  r.expected_loss_dep = be - 2.0 * be * conditional + marginal;
  r.optimism = 2.0 * be * (conditional - marginal);
  const double gap = r.expected_loss_ind - *r.expected_loss_dep;
  if (std::abs(gap - *r.optimism) > kIdentityTolerance) {
    throw Error(ErrorCode::solver_failure, "independent minus dependent loss (" + std::to_string(gap) +
                                               ") differs from the optimism (" + std::to_string(*r.optimism) + ")");
  }
  return r;
}

BvReport monte_carlo_decomposition(const PointWorld& world, long trials, std::uint64_t seed) {
  if (trials < 1) throw Error(ErrorCode::invalid_argument, "trials must be at least 1");
  BvReport r = dependent_decomposition(world);
  r.trials = trials;
  r.seed = seed;

  Tally total;
  std::uint64_t chunk = 0;
  for (long done = 0; done < trials; done += kChunkTrials, ++chunk) {
    const Tally t = simulate_chunk(world, r.majority_prediction, std::min(kChunkTrials, trials - done),
                                   derive_seed(seed, chunk));
    total.n += t.n;
    total.label_errors += t.label_errors;
    total.off_majority += t.off_majority;
    total.ind_errors += t.ind_errors;
    total.dep_errors += t.dep_errors;
    total.optimism_sum += t.optimism_sum;
    total.optimism_abs_sum += t.optimism_abs_sum;
  }

  const double n = static_cast<double>(total.n);
  BvEstimates e;
  e.bayes_error = static_cast<double>(total.label_errors) / n;
  e.variance = static_cast<double>(total.off_majority) / n;
  e.loss_ind = static_cast<double>(total.ind_errors) / n;
  e.loss_dep = static_cast<double>(total.dep_errors) / n;
  e.optimism = static_cast<double>(total.optimism_sum) / n;
  e.se_bayes_error = frequency_se(e.bayes_error, total.n);
  e.se_variance = frequency_se(e.variance, total.n);
  e.se_loss_ind = frequency_se(e.loss_ind, total.n);
  e.se_loss_dep = frequency_se(e.loss_dep, total.n);
  if (total.n > 1) {
    const double second = static_cast<double>(total.optimism_abs_sum) / n;
    const double sample_var = std::max(0.0, (second - e.optimism * e.optimism) * n / (n - 1.0));
    e.se_optimism = std::sqrt(sample_var / n);
  }
  r.mc_estimates = e;
  return r;
}

std::vector<std::pair<double, double>> one_nn_curve(const std::vector<double>& bayes_errors) {
  std::vector<std::pair<double, double>> curve;
  curve.reserve(bayes_errors.size());
  for (const double be : bayes_errors) {
    if (!(be >= 0.0 && be <= 0.5)) {
      throw Error(ErrorCode::invalid_argument, "Bayes error grid value " + std::to_string(be) +
                                                   " is outside [0, 0.5]");
    }
    const double err = 2.0 * be - 2.0 * be * be;
    if (err > 2.0 * be) throw Error(ErrorCode::solver_failure, "1-NN curve exceeds twice the Bayes error");
    curve.emplace_back(be, err);
  }
  return curve;
}

OneNnCheck empirical_1nn_check(double p_true, long trials, std::uint64_t seed, int training_points) {
  check_probability(p_true, "p_true");
  if (trials < 1) throw Error(ErrorCode::invalid_argument, "trials must be at least 1");
  if (training_points < 1) throw Error(ErrorCode::invalid_argument, "training set needs at least one point");

  constexpr double probe = 0.5;
  OneNnCheck out;
  out.p_true = p_true;
  out.trials = trials;
  out.seed = seed;

  Rng rng(seed);
  LabeledDataset train;
  train.features.resize(training_points, 1);
  train.targets.resize(training_points);
  VectorXd probe_point(1);
  probe_point << probe;
  long test_errors = 0;
  for (long trial = 0; trial < trials; ++trial) {
    // Point 0 sits on the probe; the rest keep clear of it.
    train.features(0, 0) = probe;
    for (int i = 1; i < training_points; ++i) {
      const double u = rng.uniform() * 0.8;
      train.features(i, 0) = u < 0.4 ? u : u + 0.2;
    }
    for (int i = 0; i < training_points; ++i) train.targets(i) = rng.bernoulli(p_true) ? 1 : -1;
    const int predicted = knn_predict(train, probe_point, 1);
    if (predicted != train.targets(0)) ++out.training_errors;
    const int fresh = rng.bernoulli(p_true) ? 1 : -1;
    if (predicted != fresh) ++test_errors;
  }
  const double be = std::min(p_true, 1.0 - p_true);
  out.test_error = static_cast<double>(test_errors) / static_cast<double>(trials);
  out.test_error_se = frequency_se(out.test_error, trials);
  out.expected_test_error = 2.0 * be - 2.0 * be * be;
  out.within_three_se = std::abs(out.test_error - out.expected_test_error) <= 3.0 * out.test_error_se;
  return out;
}

}  // namespace stacklp
