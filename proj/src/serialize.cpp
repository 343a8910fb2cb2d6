#include "stacklp/serialize.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "stacklp/error.hpp"

namespace stacklp {

namespace {

std::string stamp_line(const StageStamp& stamp) {
  return "# stage=" + stamp.stage + " config_hash=" + stamp.config_hash;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_real(const std::string& text, int line) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::non_numeric_cell, "score matrix line " + std::to_string(line) + ": '" + text +
                                                 "' is not a number");
  }
  return v;
}

// Reads "key=value" pairs from a "# ..." line.
void parse_stamp(const std::string& line, StageStamp& stamp, ScoreKind& kind) {
  std::istringstream in(line.substr(1));
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "stage") stamp.stage = value;
    else if (key == "config_hash") stamp.config_hash = value;
    else if (key == "kind") kind = score_kind_from_string(value);
  }
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error(ErrorCode::io_error, "cannot format number");
  return std::string(buf, ptr);
}

void write_score_matrix(std::ostream& out, const OofScoreMatrix& m, const StageStamp& stamp) {
  out << stamp_line(stamp) << " kind=" << to_string(m.kind) << '\n';
  out << "id,target";
  for (const int model : m.model_numbers) out << ',' << model;
  out << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    out << m.instance_ids[static_cast<std::size_t>(i)] << ',' << m.targets(i);
    const bool valid = m.valid.size() == 0 || m.valid(i);
    for (Index k = 0; k < m.models(); ++k) {
      out << ',';
      if (valid) out << format_real(m.scores(i, k));
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::io_error, "failed writing score matrix");
}

OofScoreMatrix read_score_matrix(std::istream& in, StageStamp* stamp) {
  OofScoreMatrix m;
  StageStamp found;
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<bool> valid;
  std::vector<int> targets;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      parse_stamp(line, found, m.kind);
      continue;
    }
    const auto cells = split(line, ',');
    if (header.empty()) {
      if (cells.size() < 3 || cells[0] != "id" || cells[1] != "target") {
        throw Error(ErrorCode::io_error, "score matrix line " + std::to_string(line_no) +
                                             ": expected header 'id,target,<models>'");
      }
      header = cells;
      for (std::size_t c = 2; c < cells.size(); ++c) m.model_numbers.push_back(static_cast<int>(parse_real(cells[c], line_no)));
      continue;
    }
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::ragged_row, "score matrix line " + std::to_string(line_no) + ": " +
                                             std::to_string(cells.size()) + " cells, header has " +
                                             std::to_string(header.size()));
    }
    m.instance_ids.push_back(static_cast<Index>(parse_real(cells[0], line_no)));
    const int t = static_cast<int>(parse_real(cells[1], line_no));
    if (t != 1 && t != -1) {
      throw Error(ErrorCode::unknown_label, "score matrix line " + std::to_string(line_no) + ": target must be -1 or +1");
    }
    targets.push_back(t);
    std::vector<double> row(cells.size() - 2, 0.0);
    bool any_empty = false, any_full = false;
    for (std::size_t c = 2; c < cells.size(); ++c) {
      if (cells[c].empty()) {
        any_empty = true;
      } else {
        any_full = true;
        row[c - 2] = parse_real(cells[c], line_no);
      }
    }
    if (any_empty && any_full) {
      throw Error(ErrorCode::ragged_row, "score matrix line " + std::to_string(line_no) + ": partially empty row");
    }
    valid.push_back(!any_empty);
    rows.push_back(std::move(row));
  }
  if (header.empty()) throw Error(ErrorCode::io_error, "score matrix has no header");
  const Index n = static_cast<Index>(rows.size());
  const Index k = static_cast<Index>(m.model_numbers.size());
  m.scores.resize(n, k);
  m.targets.resize(n);
  m.valid.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < k; ++c) m.scores(i, c) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
    m.targets(i) = targets[static_cast<std::size_t>(i)];
    m.valid(i) = valid[static_cast<std::size_t>(i)];
  }
  if (stamp) *stamp = found;
  return m;
}

std::vector<ModelSummary> summarize_models(const OofScoreMatrix& m, const ModelGrid& grid) {
  std::vector<ModelSummary> out;
  out.reserve(static_cast<std::size_t>(m.models()));
  for (Index k = 0; k < m.models(); ++k) {
    ModelSummary s;
    s.model = m.model_numbers[static_cast<std::size_t>(k)];
    if (s.model >= 1 && s.model <= grid.size()) {
      s.cost = grid.cost_of(s.model);
      s.gamma = grid.gamma_of(s.model);
    }
    const VectorXd column = m.scores.col(k);
    s.cv_accuracy = accuracy(m.targets, predicted_labels(column));
    s.score_variance = score_variance(m.targets.cast<double>(), column);
    out.push_back(s);
  }
  return out;
}

void write_models_table(std::ostream& out, const std::vector<ModelSummary>& rows, const StageStamp& stamp) {
  out << stamp_line(stamp) << '\n' << "model,C,g,cv_accuracy,score_variance\n";
  for (const auto& r : rows) {
    out << r.model << ',' << format_real(r.cost) << ',' << format_real(r.gamma) << ',' << format_real(r.cv_accuracy)
        << ',' << format_real(r.score_variance) << '\n';
  }
}

void write_roc_csv(std::ostream& out, const RocCurve& curve, const StageStamp& stamp) {
  out << stamp_line(stamp) << " auc=" << format_real(curve.auc) << '\n' << "false_positive_rate,true_positive_rate\n";
  for (const auto& p : curve.points) {
    out << format_real(p.false_positive_rate) << ',' << format_real(p.true_positive_rate) << '\n';
  }
}

void write_reliability_csv(std::ostream& out, const IsotonicModel& model, const VectorXd& scores,
                           const Labels& targets, const StageStamp& stamp) {
  constexpr int kBins = 10;
  std::vector<double> predicted(kBins, 0.0), observed(kBins, 0.0);
  std::vector<long> count(kBins, 0);
  for (Index i = 0; i < scores.size(); ++i) {
    const double p = model.predict(scores(i));
    const int bin = std::min(kBins - 1, static_cast<int>(p * kBins));
    predicted[static_cast<std::size_t>(bin)] += p;
    observed[static_cast<std::size_t>(bin)] += targets(i) > 0 ? 1.0 : 0.0;
    ++count[static_cast<std::size_t>(bin)];
  }
  out << stamp_line(stamp) << '\n' << "bin_low,bin_high,count,mean_predicted,observed_rate\n";
  for (int b = 0; b < kBins; ++b) {
    const auto c = count[static_cast<std::size_t>(b)];
    out << format_real(b / double(kBins)) << ',' << format_real((b + 1) / double(kBins)) << ',' << c << ',';
    if (c > 0) {
      out << format_real(predicted[static_cast<std::size_t>(b)] / static_cast<double>(c)) << ','
          << format_real(observed[static_cast<std::size_t>(b)] / static_cast<double>(c));
    } else {
      out << ',';
    }
    out << '\n';
  }
}

void write_curve_csv(std::ostream& out, const std::vector<std::pair<double, double>>& curve,
                     const StageStamp& stamp) {
  out << stamp_line(stamp) << '\n' << "be,error\n";
  for (const auto& [be, err] : curve) out << format_real(be) << ',' << format_real(err) << '\n';
}

Json to_json(const FoldPlan& plan) {
  return Json{{"plan", "kfold"}, {"k", plan.k}, {"seed", plan.seed}, {"assignments", plan.assignments}};
}

Json to_json(const BootstrapPlan& plan) {
  Json reps = Json::array();
  Json oob = Json::array();
  for (const auto& r : plan.replicates) reps.push_back(r);
  for (const auto& o : plan.oob_sets) oob.push_back(o);
  return Json{{"plan", "bootstrap"},
              {"replicates_count", plan.replicates_count},
              {"seed", plan.seed},
              {"replicates", reps},
              {"oob_sets", oob}};
}

FoldPlan fold_plan_from_json(const Json& j) {
  if (j.value("plan", "") != "kfold") throw Error(ErrorCode::io_error, "not a k-fold plan");
  FoldPlan p;
  p.k = j.at("k").get<int>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.assignments = j.at("assignments").get<std::vector<int>>();
  return p;
}

BootstrapPlan bootstrap_plan_from_json(const Json& j) {
  if (j.value("plan", "") != "bootstrap") throw Error(ErrorCode::io_error, "not a bootstrap plan");
  BootstrapPlan p;
  p.replicates_count = j.at("replicates_count").get<int>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.replicates = j.at("replicates").get<std::vector<std::vector<Index>>>();
  p.oob_sets = j.at("oob_sets").get<std::vector<std::vector<Index>>>();
  return p;
}

Json weights_report(const CombinerWeights& w, const std::vector<ModelSummary>& models, const StageStamp& stamp) {
  if (static_cast<Index>(models.size()) != w.weights.size()) {
    throw Error(ErrorCode::dimension_mismatch, "weights and model table differ in length");
  }
  Json per_model = Json::array();
  for (std::size_t k = 0; k < models.size(); ++k) {
    per_model.push_back(Json{{"model", models[k].model},
                             {"C", models[k].cost},
                             {"g", models[k].gamma},
                             {"cv_accuracy", models[k].cv_accuracy},
                             {"weight", w.weights(static_cast<Index>(k))}});
  }
  return Json{{"stage", stamp.stage},
              {"config_hash", stamp.config_hash},
              {"formulation", to_string(w.formulation)},
              {"margin", w.margin},
              {"cap", optional_number(w.cap)},
              {"penalty_c", optional_number(w.penalty_c)},
              {"sum_to_one", w.sum_to_one},
              {"objective_value", w.objective_value},
              {"nonzero_count", w.nonzero_count},
              {"models", per_model}};
}

CombinerWeights weights_from_report(const Json& j) {
  CombinerWeights w;
  w.formulation = formulation_from_string(j.at("formulation").get<std::string>());
  w.margin = j.at("margin").get<double>();
  if (!j.at("cap").is_null()) w.cap = j.at("cap").get<double>();
  if (!j.at("penalty_c").is_null()) w.penalty_c = j.at("penalty_c").get<double>();
  w.sum_to_one = j.at("sum_to_one").get<bool>();
  w.objective_value = j.at("objective_value").get<double>();
  const auto& models = j.at("models");
  w.weights.resize(static_cast<Index>(models.size()));
  for (std::size_t k = 0; k < models.size(); ++k) w.weights(static_cast<Index>(k)) = models[k].at("weight").get<double>();
  w.nonzero_count = count_nonzero(w.weights);
  return w;
}

Json to_json(const BvReport& r) {
  Json j{{"p_true", r.p_true},
         {"bayes_error", r.bayes_error},
         {"bayes_label", r.bayes_label},
         {"majority_prediction", r.majority_prediction},
         {"bias", r.bias},
         {"variance", r.variance},
         {"expected_loss_ind", r.expected_loss_ind},
         {"expected_loss_ind_direct", r.expected_loss_ind_direct},
         {"expected_loss_dep", optional_number(r.expected_loss_dep)},
         {"optimism", optional_number(r.optimism)}};
  if (r.mc_estimates) {
    const auto& e = *r.mc_estimates;
    j["mc_estimates"] = Json{{"bayes_error", e.bayes_error},     {"se_bayes_error", e.se_bayes_error},
                             {"variance", e.variance},           {"se_variance", e.se_variance},
                             {"loss_ind", e.loss_ind},           {"se_loss_ind", e.se_loss_ind},
                             {"loss_dep", e.loss_dep},           {"se_loss_dep", e.se_loss_dep},
                             {"optimism", e.optimism},           {"se_optimism", e.se_optimism}};
    j["trials"] = r.trials;
    j["seed"] = r.seed;
  }
  return j;
}

Json to_json(const OneNnCheck& c) {
  return Json{{"p_true", c.p_true},
              {"trials", c.trials},
              {"seed", c.seed},
              {"training_errors", c.training_errors},
              {"test_error", c.test_error},
              {"test_error_se", c.test_error_se},
              {"expected_test_error", c.expected_test_error},
              {"within_three_se", c.within_three_se}};
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::io_error, "failed writing " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::missing_file, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io_error, path.string() + ": " + e.what());
  }
}

}  // namespace stacklp
