#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "fairreg/bounds.hpp"
#include "fairreg/data.hpp"
#include "fairreg/metrics.hpp"

namespace data = fairreg::data;
namespace bounds = fairreg::bounds;
namespace metrics = fairreg::metrics;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path("fairreg_test_" + name) {
    std::ofstream out(path, std::ios::binary);
    out << content;
  }
  ~TempFile() {
    std::remove(path.c_str());
    std::remove((path + ".meta.json").c_str());
  }
};

}  // namespace

TEST_CASE("example1 ties target to the protected attribute") {
  const data::GroupedDataset d = data::gen_example1(1000, 5);
  REQUIRE(d.n == 1000);
  REQUIRE(d.d == 1);
  for (std::size_t i = 0; i < d.n; ++i) {
    CHECK(d.target[i] == static_cast<double>(d.groups[i]));
    CHECK((d.features[i] == 0.0 || d.features[i] == 1.0));
  }
  // group target means 0 and 1, so the mean-gap floor is 1 up to the rounding
  // of the merged sample weights
  CHECK(std::abs(bounds::mean_gap_bounds(d.group_target_dist(0),
                                         d.group_target_dist(1))
                     .mae_bound -
                 1.0) <= 1e-12);
  CHECK_THROWS_WITH_AS(data::gen_example1(3, 1), "dataset too small",
                       std::invalid_argument);
}

TEST_CASE("example1 admits a perfect group-aware predictor") {
  const data::GroupedDataset d = data::gen_example1(200, 9);
  std::vector<double> preds(d.n);
  for (std::size_t i = 0; i < d.n; ++i) preds[i] = static_cast<double>(d.groups[i]);
  const bounds::GroupErrors g = bounds::measure_group_errors(preds, d.target, d.groups, 1.0);
  CHECK(g.eps0 == 0.0);
  CHECK(g.eps1 == 0.0);
}

TEST_CASE("generators are seed-deterministic") {
  const data::GroupedDataset a = data::gen_example1(100, 3);
  const data::GroupedDataset b = data::gen_example1(100, 3);
  CHECK(a.features == b.features);
  CHECK(a.target == b.target);
  const data::GroupedDataset c = data::gen_lawschool_like(100, 3);
  const data::GroupedDataset e = data::gen_lawschool_like(100, 3);
  CHECK(c.features == e.features);
  CHECK(c.groups == e.groups);
}

TEST_CASE("example2 groups are unit-gaussians two apart pre-rescale") {
  const data::GroupedDataset d = data::gen_example2(100000, 3, 7);
  std::vector<double> raw0, raw1;
  for (std::size_t i = 0; i < d.n; ++i)
    (d.groups[i] ? raw1 : raw0).push_back(d.rescale.to_raw(d.target[i]));
  const auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  CHECK(mean(raw1) - mean(raw0) == doctest::Approx(2.0).epsilon(0.025));

  // the attribute-blind projection onto the signal direction has unit error
  // in each group, exactly
  std::vector<double> preds(d.n), raw(d.n);
  for (std::size_t i = 0; i < d.n; ++i) {
    preds[i] = d.features[i * d.d];
    raw[i] = d.rescale.to_raw(d.target[i]);
  }
  const bounds::GroupErrors g = bounds::measure_group_errors(preds, raw, d.groups, 2.0);
  CHECK(g.eps0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.eps1 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("generator targets stay inside the unit interval") {
  for (const data::GroupedDataset& d :
       {data::gen_example2(500, 2, 1), data::gen_lawschool_like(500, 1),
        data::gen_example1(500, 2)}) {
    for (double y : d.target) {
      CHECK(y <= 1.0);
      CHECK(y >= -1.0);
    }
  }
}

TEST_CASE("lawschool-like composition and shift") {
  const data::GroupedDataset d = data::gen_lawschool_like(1823, 11);
  const double frac1 = 1.0 - d.group0_fraction();
  CHECK(std::abs(frac1 - 0.452) <= 0.03);
  REQUIRE(d.d == 5);
  REQUIRE(d.feature_names.size() == 5);

  const data::GroupedDataset zero = data::gen_lawschool_like(20000, 4, 0.0);
  const double w1 = metrics::wasserstein_1_cdf(zero.group_target_dist(0),
                                               zero.group_target_dist(1));
  CHECK(w1 <= 3.0 / std::sqrt(20000.0));

  const data::GroupedDataset big = data::gen_lawschool_like(100000, 4, 0.15);
  const double gap =
      bounds::mean_gap_bounds(big.group_target_dist(0), big.group_target_dist(1))
          .mae_bound;
  CHECK(std::abs(gap - 0.15) <= 0.02);
  CHECK_THROWS_AS(data::gen_lawschool_like(5, 1), std::invalid_argument);
}

TEST_CASE("csv ingestion round-trips a toy table") {
  const TempFile f("toy.csv",
                   "age,score,sex,gpa\n"
                   "1.5,2.25,m,0\n"
                   "2.5,0.5,f,2\n"
                   "3.5,1.75,m,4\n");
  data::CsvLoadSpec spec;
  spec.path = f.path;
  spec.feature_columns = {"age", "score"};
  spec.protected_column = "sex";
  spec.target_column = "gpa";
  spec.protected_positive_value = "f";
  const data::CsvLoadResult res = data::load_csv(spec);
  CHECK(res.rejected.empty());
  const data::GroupedDataset& d = res.dataset;
  REQUIRE(d.n == 3);
  REQUIRE(d.d == 2);
  CHECK(d.features == std::vector<double>{1.5, 2.25, 2.5, 0.5, 3.5, 1.75});
  CHECK(d.groups == std::vector<std::uint8_t>{0, 1, 0});
  // target spans [0,4]: stored = 0.5*raw - 1
  CHECK(d.rescale.scale == 0.5);
  CHECK(d.rescale.offset == -1.0);
  CHECK(d.target == std::vector<double>{-1.0, 0.0, 1.0});
  for (std::size_t i = 0; i < d.n; ++i)
    CHECK(d.rescale.to_raw(d.target[i]) == doctest::Approx(i * 2.0));
}

TEST_CASE("csv rejects malformed rows individually") {
  const TempFile f("bad.csv",
                   "x,A,Y\n"
                   "1.0,0,0.5\n"
                   "oops,1,0.25\n"
                   "2.0,1,0.75\n"
                   "3.0,0\n");
  data::CsvLoadSpec spec;
  spec.path = f.path;
  spec.feature_columns = {"x"};
  spec.protected_column = "A";
  spec.target_column = "Y";
  spec.protected_positive_value = "1";
  const data::CsvLoadResult res = data::load_csv(spec);
  CHECK(res.dataset.n == 2);
  REQUIRE(res.rejected.size() == 2);
  CHECK(res.rejected[0].line == 3);
  CHECK(res.rejected[0].reason.find("x") != std::string::npos);
  CHECK(res.rejected[1].line == 5);
  CHECK(res.rejected[1].reason.find("field count") != std::string::npos);
}

TEST_CASE("csv error paths") {
  data::CsvLoadSpec spec;
  spec.path = "does_not_exist.csv";
  spec.feature_columns = {"x"};
  spec.protected_column = "A";
  spec.target_column = "Y";
  spec.protected_positive_value = "1";
  CHECK_THROWS_AS(data::load_csv(spec), std::runtime_error);

  const TempFile missing("missing.csv", "x,B,Y\n1,0,2\n");
  spec.path = missing.path;
  // naming an absent column is a caller mistake, not a data problem
  try {
    data::load_csv(spec);
    FAIL("expected a missing-column error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("A") != std::string::npos);
  }

  const TempFile onegroup("onegroup.csv", "x,A,Y\n1,0,2\n2,0,3\n");
  spec.path = onegroup.path;
  CHECK_THROWS_WITH_AS(data::load_csv(spec), "single-group data", std::runtime_error);

  const TempFile empty("allbad.csv", "x,A,Y\nnope,0,1\n");
  spec.path = empty.path;
  CHECK_THROWS_WITH_AS(data::load_csv(spec), "no usable rows", std::runtime_error);
}

TEST_CASE("csv z-scoring standardizes features") {
  const TempFile f("z.csv",
                   "x,A,Y\n"
                   "10,0,0\n"
                   "20,1,1\n"
                   "30,0,2\n"
                   "40,1,3\n");
  data::CsvLoadSpec spec;
  spec.path = f.path;
  spec.feature_columns = {"x"};
  spec.protected_column = "A";
  spec.target_column = "Y";
  spec.protected_positive_value = "1";
  spec.zscore_features = true;
  const data::GroupedDataset d = data::load_csv(spec).dataset;
  double mean = 0, var = 0;
  for (std::size_t i = 0; i < d.n; ++i) mean += d.features[i];
  mean /= static_cast<double>(d.n);
  for (std::size_t i = 0; i < d.n; ++i)
    var += (d.features[i] - mean) * (d.features[i] - mean);
  var /= static_cast<double>(d.n);
  CHECK(mean == doctest::Approx(0.0));
  CHECK(var == doctest::Approx(1.0));
}

TEST_CASE("snapshot save and load round-trip exactly") {
  const data::GroupedDataset d = data::gen_lawschool_like(200, 13);
  const TempFile f("snap.csv", "");
  data::save_dataset(d, f.path);
  const data::GroupedDataset back = data::load_snapshot(f.path);
  CHECK(back.features == d.features);
  CHECK(back.groups == d.groups);
  CHECK(back.target == d.target);
  CHECK(back.rescale.scale == d.rescale.scale);
  CHECK(back.rescale.offset == d.rescale.offset);
  CHECK(back.feature_names == d.feature_names);
}

TEST_CASE("split is stratified, sized, and deterministic") {
  const data::GroupedDataset d = data::gen_example1(100, 1);
  const data::Split s = data::split(d, {0.8, 5});
  CHECK(s.train.n == 80);
  CHECK(s.test.n == 20);
  CHECK(std::abs(s.train.group0_fraction() - d.group0_fraction()) <= 0.02);
  CHECK(std::abs(s.test.group0_fraction() - d.group0_fraction()) <= 0.02);
  const data::Split again = data::split(d, {0.8, 5});
  CHECK(again.train.features == s.train.features);
  CHECK(again.test.target == s.test.target);
  const data::Split other = data::split(d, {0.8, 6});
  CHECK(other.train.features != s.train.features);

  data::GroupedDataset lone = d;
  for (auto& g : lone.groups) g = 0;
  CHECK_THROWS_AS(data::split(lone, {0.8, 1}), std::invalid_argument);
  CHECK_THROWS_WITH_AS(data::split(d, {1.5, 1}), "train fraction out of range",
                       std::invalid_argument);
}

TEST_CASE("generator spec strings") {
  const data::GroupedDataset a = data::make_dataset("gen:example1:n=100", 4);
  CHECK(a.n == 100);
  const data::GroupedDataset b = data::make_dataset("gen:example2:n=50,d=3", 4);
  CHECK(b.n == 50);
  CHECK(b.d == 3);
  const data::GroupedDataset c = data::make_dataset("gen:lawschool:n=64,shift=0.3", 4);
  CHECK(c.n == 64);
  // inline seed wins over the argument
  const data::GroupedDataset s1 = data::make_dataset("gen:example2:n=20,d=1,seed=9", 1);
  const data::GroupedDataset s2 = data::make_dataset("gen:example2:n=20,d=1,seed=9", 2);
  CHECK(s1.features == s2.features);

  CHECK_THROWS_WITH_AS(data::make_dataset("example1:n=4", 1),
                       "not a generator spec: example1:n=4", std::invalid_argument);
  CHECK_THROWS_AS(data::make_dataset("gen:unknown:n=4", 1), std::invalid_argument);
  CHECK_THROWS_AS(data::make_dataset("gen:example1:m=4", 1), std::invalid_argument);
  CHECK_THROWS_AS(data::make_dataset("gen:example1:n=", 1), std::invalid_argument);
}

TEST_CASE("target rescale round trip") {
  const data::TargetRescale r{0.5, -1.0};
  CHECK(r.from_raw(4.0) == 1.0);
  CHECK(r.to_raw(1.0) == 4.0);
  CHECK(r.to_raw(r.from_raw(2.7)) == doctest::Approx(2.7).epsilon(1e-15));
}

TEST_CASE("dataset views") {
  const data::GroupedDataset d = data::gen_lawschool_like(50, 2);
  CHECK(d.group_count(0) + d.group_count(1) == d.n);
  CHECK(d.row(3).size() == d.d);
  CHECK(d.group_indices(0).size() == d.group_count(0));
  const auto y0 = d.group_target_dist(0);
  CHECK(y0.cumulative().back() == 1.0);
}
