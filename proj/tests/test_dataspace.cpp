#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "stacklp/error.hpp"
#include "stacklp/random.hpp"
#include "stacklp/serialize.hpp"
#include "support.hpp"

using namespace stacklp;
using support::labels;
using support::TempDir;

namespace {

ErrorCode load_error(const std::filesystem::path& p, const ColumnSchema& schema, std::string* message = nullptr) {
  try {
    load_dataset(p, schema);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "load_dataset accepted " << p;
  return ErrorCode::invalid_argument;
}

ColumnSchema zero_one_schema() {
  ColumnSchema s;
  s.positive_value = "1";
  s.negative_value = "0";
  return s;
}

LabeledDataset random_dataset(Rng& rng, Index n) {
  Labels t(n);
  for (Index i = 0; i < n; ++i) t(i) = rng.bernoulli(0.3 + 0.4 * rng.uniform()) ? 1 : -1;
  return support::line_dataset(t);
}

void expect_fold_invariants(const LabeledDataset& ds, const FoldPlan& plan) {
  ASSERT_EQ(plan.size(), ds.size());
  std::vector<int> seen(static_cast<std::size_t>(ds.size()), 0);
  for (int f = 0; f < plan.k; ++f) {
    const auto test = plan.test_indices(f);
    const auto train = plan.train_indices(f);
    EXPECT_FALSE(test.empty()) << "fold " << f;
    EXPECT_EQ(static_cast<Index>(test.size() + train.size()), ds.size());
    for (const Index i : test) {
      ++seen[static_cast<std::size_t>(i)];
      EXPECT_EQ(std::count(train.begin(), train.end(), i), 0);
    }
    for (const int c : {1, -1}) {
      const double ideal = static_cast<double>(ds.count(c)) / plan.k;
      const auto in_fold = std::count_if(test.begin(), test.end(), [&](Index i) { return ds.targets(i) == c; });
      EXPECT_LE(std::abs(static_cast<double>(in_fold) - ideal), 1.0) << "fold " << f << " class " << c;
    }
  }
  for (const int s : seen) EXPECT_EQ(s, 1);
}

}  // namespace

TEST(LoadDataset, HeartStatlogFile) {
  ColumnSchema schema;
  schema.positive_value = "2";
  schema.negative_value = "1";
  const auto ds = load_dataset(std::filesystem::path(STACKLP_DATA_DIR) / "heart-statlog.dat", schema);
  // Counted with awk on the file itself.
  EXPECT_EQ(ds.size(), 270);
  EXPECT_EQ(ds.dimension(), 13);
  EXPECT_EQ(ds.count(1), 120);
  EXPECT_EQ(ds.count(-1), 150);
  EXPECT_DOUBLE_EQ(ds.features(0, 0), 70.0);
  EXPECT_EQ(ds.targets(0), 1);
  EXPECT_EQ(ds.targets(1), -1);
}

TEST(LoadDataset, GermanNumericWithHeader) {
  ColumnSchema schema;
  schema.positive_value = "1";
  schema.negative_value = "2";
  schema.has_header = true;
  const auto ds = load_dataset(std::filesystem::path(STACKLP_DATA_DIR) / "german-numeric.csv", schema);
  EXPECT_EQ(ds.size(), 1000);
  EXPECT_EQ(ds.dimension(), 38);
  EXPECT_EQ(ds.count(1), 700);
  EXPECT_EQ(ds.feature_names.front(), "checking_status");
}

TEST(LoadDataset, MapsZeroOneLabels) {
  TempDir dir;
  const auto p = dir.write("small.csv", "0.5,1.5,0\n2,3,1\n-1,4e2,0\n");
  const auto ds = load_dataset(p, zero_one_schema());
  ASSERT_EQ(ds.size(), 3);
  EXPECT_EQ(ds.dimension(), 2);
  EXPECT_EQ(ds.targets(0), -1);
  EXPECT_EQ(ds.targets(1), 1);
  EXPECT_EQ(ds.targets(2), -1);
  EXPECT_DOUBLE_EQ(ds.features(2, 1), 400.0);
}

TEST(LoadDataset, LabelColumnCanBeFirst) {
  TempDir dir;
  ColumnSchema schema = zero_one_schema();
  schema.label_column = 0;
  const auto ds = load_dataset(dir.write("first.txt", "1 0.5 7\n0 2 8\n"), schema);
  EXPECT_EQ(ds.targets(0), 1);
  EXPECT_DOUBLE_EQ(ds.features(1, 1), 8.0);
}

TEST(LoadDataset, UnknownLabelNamesTheLine) {
  TempDir dir;
  std::string message;
  EXPECT_EQ(load_error(dir.write("bad.csv", "1,0\n2,1\n3,3\n"), zero_one_schema(), &message), ErrorCode::unknown_label);
  EXPECT_NE(message.find("bad.csv:3:"), std::string::npos) << message;
}

TEST(LoadDataset, DistinctErrorCodes) {
  TempDir dir;
  EXPECT_EQ(load_error(dir.path() / "absent.csv", zero_one_schema()), ErrorCode::missing_file);
  std::string message;
  EXPECT_EQ(load_error(dir.write("nan.csv", "1,0\nx,1\n"), zero_one_schema(), &message), ErrorCode::non_numeric_cell);
  EXPECT_NE(message.find("nan.csv:2:"), std::string::npos) << message;
  EXPECT_EQ(load_error(dir.write("ragged.csv", "1,2,0\n1,1\n"), zero_one_schema()), ErrorCode::ragged_row);
  EXPECT_EQ(load_error(dir.write("one.csv", "1,1\n2,1\n"), zero_one_schema()), ErrorCode::single_class);
  EXPECT_EQ(load_error(dir.write("empty.csv", ""), zero_one_schema()), ErrorCode::degenerate_dataset);
}

TEST(StratifiedKfold, TenBalancedFiveFolds) {
  const auto ds = support::line_dataset(labels({1, 1, 1, 1, 1, -1, -1, -1, -1, -1}));
  const auto plan = stratified_kfold(ds, 5, 42);
  for (int f = 0; f < 5; ++f) {
    const auto test = plan.test_indices(f);
    ASSERT_EQ(test.size(), 2u);
    EXPECT_EQ(ds.targets(test[0]) + ds.targets(test[1]), 0);
  }
  expect_fold_invariants(ds, plan);
}

TEST(StratifiedKfold, SevenRowsThreeFoldsEveryValidSplit) {
  // 4 positives over 3 folds: any stratified split puts 1 or 2 in each fold,
  // and likewise 1 negative each for the 3 negatives.
  const auto ds = support::line_dataset(labels({1, -1, 1, -1, 1, -1, 1}));
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto plan = stratified_kfold(ds, 3, seed);
    std::multiset<long> positives;
    for (int f = 0; f < 3; ++f) {
      const auto test = plan.test_indices(f);
      const long pos = std::count_if(test.begin(), test.end(), [&](Index i) { return ds.targets(i) == 1; });
      const long neg = static_cast<long>(test.size()) - pos;
      EXPECT_TRUE(pos == 1 || pos == 2);
      EXPECT_EQ(neg, 1);
      positives.insert(pos);
    }
    EXPECT_EQ(positives, (std::multiset<long>{1, 1, 2}));
  }
}

TEST(StratifiedKfold, KEqualsNIsLeaveOneOut) {
  const auto ds = support::line_dataset(labels({1, -1, -1, 1, 1, -1, 1}));
  const auto plan = stratified_kfold(ds, 7, 3);
  for (int f = 0; f < 7; ++f) EXPECT_EQ(plan.test_indices(f).size(), 1u);
  expect_fold_invariants(ds, plan);
}

TEST(StratifiedKfold, RejectsKOutOfRange) {
  const auto ds = support::line_dataset(labels({1, -1, 1}));
  for (const int k : {-1, 0, 1, 4}) {
    try {
      stratified_kfold(ds, k, 1);
      ADD_FAILURE() << "k = " << k;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
    }
  }
}

TEST(StratifiedKfold, PartitionPropertyOnRandomDatasets) {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.below(60));
    const auto ds = random_dataset(rng, n);
    const int k = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
    const std::uint64_t seed = rng.next();
    SCOPED_TRACE("n=" + std::to_string(n) + " k=" + std::to_string(k));
    const auto plan = stratified_kfold(ds, k, seed);
    expect_fold_invariants(ds, plan);
    EXPECT_EQ(plan.assignments, stratified_kfold(ds, k, seed).assignments);
  }
}

TEST(StratifiedKfold, SeedChangesAssignment) {
  Rng rng(5);
  const auto ds = random_dataset(rng, 40);
  EXPECT_NE(stratified_kfold(ds, 5, 1).assignments, stratified_kfold(ds, 5, 2).assignments);
}

TEST(BootstrapPlan, SingleRowIsDegenerate) {
  const auto ds = support::line_dataset(labels({1}));
  try {
    bootstrap_plan(ds, 1, 1);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_dataset);
  }
}

TEST(BootstrapPlan, RejectsZeroReplicates) {
  const auto ds = support::line_dataset(labels({1, -1}));
  EXPECT_THROW(bootstrap_plan(ds, 0, 1), Error);
}

TEST(BootstrapPlan, OutOfBagSetsAreTheComplement) {
  Rng rng(8);
  const auto ds = random_dataset(rng, 30);
  const auto plan = bootstrap_plan(ds, 25, 7);
  ASSERT_EQ(plan.replicates.size(), 25u);
  for (int d = 0; d < 25; ++d) {
    const auto& rep = plan.replicates[static_cast<std::size_t>(d)];
    const auto& oob = plan.oob_sets[static_cast<std::size_t>(d)];
    EXPECT_EQ(rep.size(), 30u);
    EXPECT_FALSE(oob.empty());
    const std::set<Index> drawn(rep.begin(), rep.end());
    for (Index i = 0; i < 30; ++i) {
      const bool absent = drawn.count(i) == 0;
      EXPECT_EQ(absent, std::count(oob.begin(), oob.end(), i) == 1);
      EXPECT_EQ(absent, plan.is_out_of_bag(d, i));
    }
  }
}

TEST(BootstrapPlan, OutOfBagFractionNearLimit) {
  Rng rng(1);
  const auto ds = random_dataset(rng, 100);
  double total = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto plan = bootstrap_plan(ds, 50, seed);
    double fraction = 0.0;
    for (const auto& oob : plan.oob_sets) fraction += static_cast<double>(oob.size()) / 100.0;
    fraction /= 50.0;
    EXPECT_NEAR(fraction, 0.368, 0.05) << "seed " << seed;
    total += fraction;
  }
  // (1 - 1/N)^N for N = 100.
  EXPECT_NEAR(total / 20.0, std::pow(0.99, 100), 0.01);
}

TEST(BootstrapPlan, Deterministic) {
  Rng rng(2);
  const auto ds = random_dataset(rng, 20);
  const auto a = bootstrap_plan(ds, 10, 123);
  const auto b = bootstrap_plan(ds, 10, 123);
  EXPECT_EQ(a.replicates, b.replicates);
  EXPECT_EQ(a.oob_sets, b.oob_sets);
  EXPECT_NE(a.replicates, bootstrap_plan(ds, 10, 124).replicates);
}

TEST(PlanJson, RoundTrips) {
  Rng rng(4);
  const auto ds = random_dataset(rng, 17);
  const auto folds = stratified_kfold(ds, 4, 77);
  const auto folds_back = fold_plan_from_json(Json::parse(to_json(folds).dump()));
  EXPECT_EQ(folds_back.k, folds.k);
  EXPECT_EQ(folds_back.seed, folds.seed);
  EXPECT_EQ(folds_back.assignments, folds.assignments);

  const auto boot = bootstrap_plan(ds, 5, 78);
  const auto boot_back = bootstrap_plan_from_json(Json::parse(to_json(boot).dump()));
  EXPECT_EQ(boot_back.replicates, boot.replicates);
  EXPECT_EQ(boot_back.oob_sets, boot.oob_sets);
  EXPECT_EQ(boot_back.seed, boot.seed);
}

TEST(Dataset, SubsetKeepsOrder) {
  const auto ds = support::line_dataset(labels({1, -1, 1, -1}));
  const auto sub = ds.subset({3, 0});
  EXPECT_EQ(sub.size(), 2);
  EXPECT_DOUBLE_EQ(sub.features(0, 0), 3.0);
  EXPECT_EQ(sub.targets(0), -1);
  EXPECT_EQ(sub.targets(1), 1);
}
