#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stacklp/combiner.hpp"
#include "stacklp/dataspace.hpp"
#include "stacklp/grid.hpp"
#include "stacklp/svm.hpp"

namespace stacklp {

enum class ResamplingPlan { kfold, bootstrap };

struct RunConfig {
  // [data]
  std::filesystem::path dataset;
  ColumnSchema schema;

  // [folds]
  ResamplingPlan plan = ResamplingPlan::kfold;
  int folds = 5;
  std::uint64_t seed = 1;
  int replicates = 20;

  // [grid]
  int cost_exp_lo = -2;
  int cost_exp_hi = 10;
  int gamma_exp_lo = -17;
  int gamma_exp_hi = -6;
  int exp_step = 1;
  FeatureScaling scaling = FeatureScaling::standardize;
  double svm_tol = 1e-3;
  long svm_max_iterations = 10'000'000;

  // [combine]
  Formulation formulation = Formulation::single_lp;
  ScoreKind score_kind = ScoreKind::raw;
  double margin = 0.5;
  std::optional<double> cap;
  bool sum_to_one = true;
  double penalty_c = 1.0;
  double qp_margin = 1.0;
  long qp_iterations = 100'000;

  // [output]
  std::filesystem::path output_dir = "out";

  // FNV-1a over the canonical key = value listing, output directory excluded.
  std::string hash;
  // Same over the [data], [folds] and [grid] keys only: the part that decides
  // the score matrix.
  std::string grid_hash;

  ModelGrid grid() const;
  SvmParams svm_params() const;
  LpOptions lp_options() const;
  QpOptions qp_options() const;
  // Canonical "section.key = value" lines, sorted.
  std::vector<std::string> canonical_lines() const;
};

// Reads an INI-style file (sections, key = value, ';' or '#' comments), then
// applies "section.key=value" overrides. Relative paths resolve against the
// config file's directory. Unknown keys and bad values raise config_error.
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

// Same, from text; relative paths resolve against `base_dir`.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                       const std::vector<std::string>& overrides = {});

std::string fnv1a_hex(const std::string& text);

}  // namespace stacklp
