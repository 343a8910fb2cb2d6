#include "stacklp/dataspace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stacklp/error.hpp"
#include "stacklp/random.hpp"

namespace stacklp {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, bool comma) {
  std::vector<std::string_view> cells;
  if (comma) {
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(',', start);
      cells.push_back(trim(line.substr(start, pos - start)));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
  } else {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      const std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
      if (i > start) cells.push_back(line.substr(start, i - start));
    }
  }
  return cells;
}

std::optional<double> parse_real(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

bool label_matches(std::string_view cell, const std::string& raw) {
  if (cell == raw) return true;
  const auto a = parse_real(cell);
  const auto b = parse_real(raw);
  return a && b && *a == *b;
}

}  // namespace

LabeledDataset LabeledDataset::subset(const std::vector<Index>& rows) const {
  LabeledDataset out;
  out.features.resize(static_cast<Index>(rows.size()), dimension());
  out.targets.resize(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.features.row(static_cast<Index>(r)) = features.row(rows[r]);
    out.targets(static_cast<Index>(r)) = targets(rows[r]);
  }
  out.feature_names = feature_names;
  out.id = id;
  return out;
}

void validate(const LabeledDataset& ds) {
  if (ds.size() < 1 || ds.dimension() < 1) {
    throw Error(ErrorCode::degenerate_dataset, "dataset '" + ds.id + "' has no rows or no features");
  }
  if (ds.targets.size() != ds.size()) {
    throw Error(ErrorCode::dimension_mismatch, "dataset '" + ds.id + "': target count differs from row count");
  }
  if (!ds.features.allFinite()) {
    throw Error(ErrorCode::non_numeric_cell, "dataset '" + ds.id + "' contains non-finite features");
  }
  for (Index i = 0; i < ds.size(); ++i) {
    if (ds.targets(i) != 1 && ds.targets(i) != -1) {
      throw Error(ErrorCode::unknown_label, "dataset '" + ds.id + "': target at row " +
                                                std::to_string(i) + " is not -1 or +1");
    }
  }
}

void require_both_classes(const LabeledDataset& ds, const std::string& context) {
  if (ds.count(1) == 0 || ds.count(-1) == 0) {
    throw Error(ErrorCode::single_class, context + ": only one class present");
  }
}

LabeledDataset load_dataset(const std::filesystem::path& path, const ColumnSchema& schema) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::missing_file, "cannot open dataset file '" + path.string() + "'");
  }
  if (schema.positive_value.empty() || schema.negative_value.empty()) {
    throw Error(ErrorCode::invalid_argument, "schema must name both the positive and negative label values");
  }

  std::vector<std::vector<double>> rows;
  std::vector<int> targets;
  std::vector<std::string> names;
  std::optional<bool> comma;
  std::optional<std::size_t> width;
  std::size_t label_index = 0;
  bool header_pending = schema.has_header;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (!comma) comma = line.find(',') != std::string::npos;
    const auto cells = split(line, *comma);
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);

    if (!width) {
      width = cells.size();
      if (*width < 2) {
        throw Error(ErrorCode::ragged_row, where + ": need at least one feature and a label");
      }
      const int resolved = schema.label_column < 0 ? static_cast<int>(*width) + schema.label_column
                                                   : schema.label_column;
      if (resolved < 0 || resolved >= static_cast<int>(*width)) {
        throw Error(ErrorCode::invalid_argument, where + ": label column out of range");
      }
      label_index = static_cast<std::size_t>(resolved);
    } else if (cells.size() != *width) {
      throw Error(ErrorCode::ragged_row, where + ": expected " + std::to_string(*width) +
                                             " cells, found " + std::to_string(cells.size()));
    }

    if (header_pending) {
      header_pending = false;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (c != label_index) names.emplace_back(cells[c]);
      }
      continue;
    }

    std::vector<double> values;
    values.reserve(cells.size() - 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_index) continue;
      const auto value = parse_real(cells[c]);
      if (!value) {
        throw Error(ErrorCode::non_numeric_cell, where + ": column " + std::to_string(c + 1) +
                                                     " is not a number ('" + std::string(cells[c]) + "')");
      }
      values.push_back(*value);
    }
    const auto label = cells[label_index];
    if (label_matches(label, schema.positive_value)) {
      targets.push_back(1);
    } else if (label_matches(label, schema.negative_value)) {
      targets.push_back(-1);
    } else {
      throw Error(ErrorCode::unknown_label, where + ": label '" + std::string(label) + "' is not in the mapping");
    }
    rows.push_back(std::move(values));
  }

  if (rows.empty()) {
    throw Error(ErrorCode::degenerate_dataset, "dataset file '" + path.string() + "' has no data rows");
  }

  LabeledDataset ds;
  const Index n = static_cast<Index>(rows.size());
  const Index f = static_cast<Index>(rows.front().size());
  ds.features.resize(n, f);
  ds.targets.resize(n);
  for (Index i = 0; i < n; ++i) {
    ds.features.row(i) = Eigen::Map<const RowVectorX<double>>(rows[i].data(), f);
    ds.targets(i) = targets[i];
  }
  if (names.empty()) {
    for (Index c = 0; c < f; ++c) names.push_back("f" + std::to_string(c + 1));
  }
  ds.feature_names = std::move(names);
  ds.id = schema.id.empty() ? path.stem().string() : schema.id;
  require_both_classes(ds, "dataset '" + ds.id + "'");
  return ds;
}

std::vector<Index> FoldPlan::test_indices(int fold) const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(static_cast<Index>(i));
  }
  return out;
}

std::vector<Index> FoldPlan::train_indices(int fold) const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(static_cast<Index>(i));
  }
  return out;
}

FoldPlan stratified_kfold(const LabeledDataset& ds, int k, std::uint64_t seed) {
  const Index n = ds.size();
  if (k < 2 || k > n) {
    throw Error(ErrorCode::invalid_argument,
                "fold count " + std::to_string(k) + " outside [2, " + std::to_string(n) + "]");
  }
  Rng rng(seed);
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(static_cast<std::size_t>(n), -1);

  int next_fold = 0;
  for (const int label : {1, -1}) {
    std::vector<Index> members;
    for (Index i = 0; i < n; ++i) {
      if (ds.targets(i) == label) members.push_back(i);
    }
    rng.shuffle(members);
    for (const Index i : members) {
      plan.assignments[static_cast<std::size_t>(i)] = next_fold;
      next_fold = (next_fold + 1) % k;
    }
  }
  return plan;
}

bool BootstrapPlan::is_out_of_bag(int d, Index instance) const {
  const auto& oob = oob_sets.at(static_cast<std::size_t>(d));
  return std::binary_search(oob.begin(), oob.end(), instance);
}

BootstrapPlan bootstrap_plan(const LabeledDataset& ds, int replicates, std::uint64_t seed) {
  if (replicates < 1) {
    throw Error(ErrorCode::invalid_argument, "bootstrap replicate count must be at least 1");
  }
  const Index n = ds.size();
  if (n < 2) {
    throw Error(ErrorCode::degenerate_dataset,
                "degenerate dataset: a single instance never leaves an out-of-bag set");
  }
  constexpr int kMaxRedraws = 1000;

  Rng rng(seed);
  BootstrapPlan plan;
  plan.replicates_count = replicates;
  plan.seed = seed;
  for (int d = 0; d < replicates; ++d) {
    for (int attempt = 0;; ++attempt) {
      if (attempt == kMaxRedraws) {
        throw Error(ErrorCode::degenerate_dataset, "could not draw a replicate with a nonempty out-of-bag set");
      }
      std::vector<Index> sample(static_cast<std::size_t>(n));
      std::vector<bool> drawn(static_cast<std::size_t>(n), false);
      for (auto& s : sample) {
        s = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
        drawn[static_cast<std::size_t>(s)] = true;
      }
      std::vector<Index> oob;
      for (Index i = 0; i < n; ++i) {
        if (!drawn[static_cast<std::size_t>(i)]) oob.push_back(i);
      }
      if (oob.empty()) continue;
      plan.replicates.push_back(std::move(sample));
      plan.oob_sets.push_back(std::move(oob));
      break;
    }
  }
  return plan;
}

}  // namespace stacklp
