#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stacklp/types.hpp"

namespace stacklp {

// Feature matrix with {-1,+1} targets. Rows are instances.
struct LabeledDataset {
  MatrixXd features;
  Labels targets;
  std::vector<std::string> feature_names;
  std::string id;

  Index size() const { return features.rows(); }
  Index dimension() const { return features.cols(); }
  Index count(int label) const { return (targets.array() == label).count(); }

  // Rows `rows` of this dataset, in the given order.
  LabeledDataset subset(const std::vector<Index>& rows) const;
};

// Checks the dataset invariants; throws Error otherwise.
void validate(const LabeledDataset& ds);
void require_both_classes(const LabeledDataset& ds, const std::string& context);

// How to read a delimited text file.
struct ColumnSchema {
  // Index of the label column; negative counts from the end (-1 = last).
  int label_column = -1;
  std::string positive_value;
  std::string negative_value;
  bool has_header = false;
  std::string id;
};

// Reads comma- or whitespace-delimited rows (the delimiter is sniffed from the
// first line). Features are parsed as reals and labels mapped through the
// schema. Errors carry the 1-based line number of the offending row.
LabeledDataset load_dataset(const std::filesystem::path& path,
                            const ColumnSchema& schema);

struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;
  std::uint64_t seed = 0;

  Index size() const { return static_cast<Index>(assignments.size()); }
  std::vector<Index> test_indices(int fold) const;
  std::vector<Index> train_indices(int fold) const;
};

// Stratified k-fold assignment. Each class is shuffled and dealt round-robin,
// the second class continuing where the first stopped, so per-fold class
// counts are within one of n_c / k and no fold is empty when k <= N.
// k == N gives leave-one-out.
FoldPlan stratified_kfold(const LabeledDataset& ds, int k, std::uint64_t seed);

struct BootstrapPlan {
  int replicates_count = 0;
  std::vector<std::vector<Index>> replicates;
  std::vector<std::vector<Index>> oob_sets;
  std::uint64_t seed = 0;

  // Out-of-bag membership of `instance` in replicate `d`.
  bool is_out_of_bag(int d, Index instance) const;
};

// D bootstrap replicates of size N; any replicate with an empty out-of-bag
// set is redrawn.
BootstrapPlan bootstrap_plan(const LabeledDataset& ds, int replicates,
                             std::uint64_t seed);

}  // namespace stacklp
