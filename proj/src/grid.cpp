#include "stacklp/grid.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "stacklp/error.hpp"

namespace stacklp {

double ModelGrid::cost_of(int model_number) const {
  if (model_number < 1 || model_number > size()) {
    throw Error(ErrorCode::invalid_argument, "model number " + std::to_string(model_number) + " outside grid");
  }
  return cost_values[static_cast<std::size_t>(model_number - 1) % cost_values.size()];
}

double ModelGrid::gamma_of(int model_number) const {
  if (model_number < 1 || model_number > size()) {
    throw Error(ErrorCode::invalid_argument, "model number " + std::to_string(model_number) + " outside grid");
  }
  return gamma_values[static_cast<std::size_t>(model_number - 1) / cost_values.size()];
}

ModelGrid ModelGrid::from_exponents(int cost_lo, int cost_hi, int gamma_lo, int gamma_hi, int step) {
  if (step < 1 || cost_hi < cost_lo || gamma_hi < gamma_lo) {
    throw Error(ErrorCode::config_error, "empty or malformed grid exponent range");
  }
  ModelGrid grid;
  for (int e = cost_lo; e <= cost_hi; e += step) grid.cost_values.push_back(std::ldexp(1.0, e));
  for (int e = gamma_lo; e <= gamma_hi; e += step) grid.gamma_values.push_back(std::ldexp(1.0, e));
  return grid;
}

ModelGrid ModelGrid::standard() { return from_exponents(-2, 10, -17, -6); }

const char* to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::raw: return "raw";
    case ScoreKind::clipped: return "clipped";
    case ScoreKind::two_p_minus_one: return "two_p_minus_one";
  }
  return "raw";
}

ScoreKind score_kind_from_string(const std::string& name) {
  if (name == "raw") return ScoreKind::raw;
  if (name == "clipped") return ScoreKind::clipped;
  if (name == "two_p_minus_one") return ScoreKind::two_p_minus_one;
  throw Error(ErrorCode::config_error, "unknown score kind '" + name + "'");
}

void verify_out_of_sample(const OofScoreMatrix& m) {
  const auto& prov = m.provenance;
  if (static_cast<Index>(prov.scored_by.size()) != m.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "score provenance does not cover every row");
  }
  std::vector<std::vector<bool>> in_training(prov.training_sets.size());
  for (std::size_t s = 0; s < prov.training_sets.size(); ++s) {
    auto& mask = in_training[s];
    for (const Index i : prov.training_sets[s]) {
      if (static_cast<std::size_t>(i) >= mask.size()) mask.resize(static_cast<std::size_t>(i) + 1, false);
      mask[static_cast<std::size_t>(i)] = true;
    }
  }
  for (Index r = 0; r < m.rows(); ++r) {
    if (!m.valid(r)) continue;
    const int s = prov.scored_by[static_cast<std::size_t>(r)];
    if (s < 0 || s >= static_cast<int>(in_training.size())) {
      throw Error(ErrorCode::invalid_argument, "row " + std::to_string(r) + " has a score but no producing model");
    }
    const auto id = static_cast<std::size_t>(m.instance_ids[static_cast<std::size_t>(r)]);
    const auto& mask = in_training[static_cast<std::size_t>(s)];
    if (id < mask.size() && mask[id]) {
      throw Error(ErrorCode::invalid_argument,
                  "instance " + std::to_string(id) + " was scored by a model trained on it");
    }
  }
}

namespace {

struct TrainingSet {
  std::vector<Index> train;
  std::vector<Index> scored;
  std::string label;  // "fold 2" / "replicate 7", for error context
};

// Fills out[s] (|scored_s| x K) for every training set. Work is split into
// (set, gamma) tasks that each write their own block, so the result does not
// depend on how tasks are scheduled.
std::vector<MatrixXd> score_training_sets(const LabeledDataset& ds, const ModelGrid& grid,
                                          const std::vector<TrainingSet>& sets,
                                          const GridOptions& options, long& nonconverged) {
  const auto n_cost = grid.cost_values.size();
  const auto n_gamma = grid.gamma_values.size();
  std::vector<MatrixXd> out(sets.size());
  for (std::size_t s = 0; s < sets.size(); ++s) {
    out[s].resize(static_cast<Index>(sets[s].scored.size()), grid.size());
  }
  const std::size_t tasks = sets.size() * n_gamma;
  std::atomic<std::size_t> next{0};
  std::atomic<long> failures{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::size_t first_error_task = tasks;

  auto worker = [&] {
    for (std::size_t task = next++; task < tasks; task = next++) {
      const std::size_t s = task / n_gamma;
      const std::size_t g = task % n_gamma;
      int model = static_cast<int>(g * n_cost) + 1;
      try {
        const LabeledDataset train = ds.subset(sets[s].train);
        const LabeledDataset scored = ds.subset(sets[s].scored);
        validate(train);
        require_both_classes(train, "training set");
        const Standardizer scaler = Standardizer::fit(train.features, options.svm.scaling);
        const MatrixXd x_train = scaler.apply(train.features);
        const MatrixXd x_scored = scaler.apply(scored.features);
        const double gamma = grid.gamma_values[g];
        const MatrixXd k_train = rbf_kernel(x_train, x_train, gamma);
        const MatrixXd k_scored = rbf_kernel(x_scored, x_train, gamma);
        const VectorXd y = train.targets.cast<double>();
        for (std::size_t c = 0; c < n_cost; ++c) {
          model = static_cast<int>(g * n_cost + c) + 1;
          const SmoResult smo = solve_smo(k_train, train.targets, grid.cost_values[c], options.svm.tol,
                                          options.svm.max_iterations);
          if (!smo.converged) ++failures;
          out[s].col(model - 1) = (k_scored * smo.alpha.cwiseProduct(y)).array() + smo.bias;
        }
      } catch (const Error& e) {
        std::lock_guard lock(error_mutex);
        if (task < first_error_task) {
          first_error_task = task;
          first_error = std::make_exception_ptr(
              Error(e.code(), sets[s].label + ", model " + std::to_string(model) + ": " + e.what()));
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (task < first_error_task) {
          first_error_task = task;
          first_error = std::current_exception();
        }
      }
    }
  };

  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(tasks)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  nonconverged = failures.load();
  return out;
}

std::vector<int> model_numbers(const ModelGrid& grid) {
  std::vector<int> numbers(static_cast<std::size_t>(grid.size()));
  for (int m = 0; m < grid.size(); ++m) numbers[static_cast<std::size_t>(m)] = m + 1;
  return numbers;
}

OofScoreMatrix empty_matrix(const LabeledDataset& ds, const ModelGrid& grid) {
  OofScoreMatrix m;
  m.scores = MatrixXd::Zero(ds.size(), grid.size());
  m.targets = ds.targets;
  m.instance_ids.resize(static_cast<std::size_t>(ds.size()));
  for (Index i = 0; i < ds.size(); ++i) m.instance_ids[static_cast<std::size_t>(i)] = i;
  m.model_numbers = model_numbers(grid);
  m.valid = RowMask::Constant(ds.size(), false);
  m.provenance.scored_by.assign(static_cast<std::size_t>(ds.size()), -1);
  return m;
}

void check_grid(const ModelGrid& grid) {
  if (grid.size() == 0) throw Error(ErrorCode::config_error, "model grid is empty");
}

}  // namespace

OofScoreMatrix grid_oof_scores(const LabeledDataset& ds, const ModelGrid& grid, const FoldPlan& plan,
                               const GridOptions& options) {
  validate(ds);
  check_grid(grid);
  if (plan.size() != ds.size()) {
    throw Error(ErrorCode::dimension_mismatch, "fold plan was built for a different dataset");
  }
  std::vector<TrainingSet> sets(static_cast<std::size_t>(plan.k));
  for (int f = 0; f < plan.k; ++f) {
    sets[static_cast<std::size_t>(f)] = {plan.train_indices(f), plan.test_indices(f), "fold " + std::to_string(f)};
  }
  OofScoreMatrix m = empty_matrix(ds, grid);
  const auto blocks = score_training_sets(ds, grid, sets, options, m.provenance.nonconverged_fits);
  m.provenance.plan = "kfold";
  m.provenance.seed = plan.seed;
  for (std::size_t f = 0; f < sets.size(); ++f) {
    for (std::size_t r = 0; r < sets[f].scored.size(); ++r) {
      const Index i = sets[f].scored[r];
      m.scores.row(i) = blocks[f].row(static_cast<Index>(r));
      m.valid(i) = true;
      m.provenance.scored_by[static_cast<std::size_t>(i)] = static_cast<int>(f);
    }
    m.provenance.training_sets.push_back(sets[f].train);
  }
  verify_out_of_sample(m);
  return m;
}

std::vector<OofScoreMatrix> grid_oof_scores(const LabeledDataset& ds, const ModelGrid& grid,
                                            const BootstrapPlan& plan, const GridOptions& options) {
  validate(ds);
  check_grid(grid);
  std::vector<TrainingSet> sets(plan.replicates.size());
  for (std::size_t d = 0; d < sets.size(); ++d) {
    sets[d] = {plan.replicates[d], plan.oob_sets[d], "replicate " + std::to_string(d)};
  }
  long nonconverged = 0;
  const auto blocks = score_training_sets(ds, grid, sets, options, nonconverged);
  std::vector<OofScoreMatrix> out;
  for (std::size_t d = 0; d < sets.size(); ++d) {
    OofScoreMatrix m = empty_matrix(ds, grid);
    m.provenance.plan = "bootstrap";
    m.provenance.seed = plan.seed;
    m.provenance.nonconverged_fits = nonconverged;
    m.provenance.training_sets.push_back(sets[d].train);
    for (std::size_t r = 0; r < sets[d].scored.size(); ++r) {
      const Index i = sets[d].scored[r];
      m.scores.row(i) = blocks[d].row(static_cast<Index>(r));
      m.valid(i) = true;
      m.provenance.scored_by[static_cast<std::size_t>(i)] = 0;
    }
    verify_out_of_sample(m);
    out.push_back(std::move(m));
  }
  return out;
}

OofScoreMatrix average_replicates(const std::vector<OofScoreMatrix>& replicates) {
  if (replicates.empty()) throw Error(ErrorCode::invalid_argument, "no replicates to average");
  const auto& first = replicates.front();
  OofScoreMatrix avg = first;
  avg.scores.setZero();
  avg.valid.setConstant(false);
  avg.provenance.scored_by.assign(static_cast<std::size_t>(first.rows()), -1);
  avg.provenance.training_sets.clear();
  VectorXd counts = VectorXd::Zero(first.rows());
  for (std::size_t d = 0; d < replicates.size(); ++d) {
    const auto& rep = replicates[d];
    if (rep.rows() != first.rows() || rep.models() != first.models()) {
      throw Error(ErrorCode::dimension_mismatch, "replicates disagree in shape");
    }
    for (Index i = 0; i < rep.rows(); ++i) {
      if (!rep.valid(i)) continue;
      avg.scores.row(i) += rep.scores.row(i);
      counts(i) += 1.0;
    }
  }
  for (Index i = 0; i < avg.rows(); ++i) {
    if (counts(i) > 0.0) {
      avg.scores.row(i) /= counts(i);
      avg.valid(i) = true;
    }
  }
  // Every contributing model excluded the row, but there is no single
  // producing training set any more.
  avg.provenance.plan = "bootstrap_mean";
  return avg;
}

}  // namespace stacklp
