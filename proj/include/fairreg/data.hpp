#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fairreg/dist1d.hpp"

namespace fairreg::data {

// Affine map applied to raw targets: stored = scale * raw + offset. Kept with
// the dataset so certificate values can be reported in original units.
struct TargetRescale {
  double scale = 1.0;
  double offset = 0.0;

  double to_raw(double stored) const { return (stored - offset) / scale; }
  double from_raw(double raw) const { return scale * raw + offset; }
};

struct GroupedDataset {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> features;        // row-major, n x d
  std::vector<std::uint8_t> groups;    // 0/1 per row
  std::vector<double> target;          // stored targets, within [-1, 1]
  TargetRescale rescale;
  std::vector<std::string> feature_names;

  std::vector<double> row(std::size_t i) const;
  std::size_t group_count(int a) const;
  double group0_fraction() const;
  std::vector<std::size_t> group_indices(int a) const;
  dist1d::EmpiricalDist1d group_target_dist(int a) const;

  // Throws "empty group" unless both groups are present.
  void require_both_groups() const;
};

// Worst-case instance where the target equals the protected attribute and the
// features carry no signal: X uniform on {0,1}, Y = A, groups balanced.
GroupedDataset gen_example1(std::size_t n, std::uint64_t seed);

// Gaussian features independent of the group, target w.x - 1 on group 0 and
// w.x + 1 on group 1 (w = first basis vector), min-max rescaled into [-1, 1]
// with the affine parameters recorded.
GroupedDataset gen_example2(std::size_t n, std::size_t d, std::uint64_t seed);

// Synthetic stand-in for a law-school admissions table (not the real data):
// three score-like columns, two binary columns, Pr(A=1) = 0.452, and a
// GPA-like target whose group means differ by `shift`. Targets stay inside
// [-1, 1] by construction.
GroupedDataset gen_lawschool_like(std::size_t n, std::uint64_t seed,
                                  double shift = 0.15);

struct CsvLoadSpec {
  std::string path;
  std::vector<std::string> feature_columns;
  std::string protected_column;
  std::string target_column;
  std::string protected_positive_value;
  bool zscore_features = false;
};

struct RowRejection {
  std::size_t line = 0;  // 1-based line number in the file
  std::string reason;
};

struct CsvLoadResult {
  GroupedDataset dataset;
  std::vector<RowRejection> rejected;
};

// Header CSV ingestion: named feature/protected/target columns, rows with
// unparseable cells rejected individually, target min-max rescaled to [-1, 1].
CsvLoadResult load_csv(const CsvLoadSpec& spec);

// Dataset snapshot: CSV with columns f0..f{d-1}, A, Y plus a JSON sidecar
// (path + ".meta.json") holding the rescale parameters and feature names.
void save_dataset(const GroupedDataset& data, const std::string& csv_path);

// Reads a snapshot back without re-rescaling, so values round-trip exactly.
GroupedDataset load_snapshot(const std::string& csv_path);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 1;
};

struct Split {
  GroupedDataset train;
  GroupedDataset test;
};

// Seeded, group-stratified shuffle split; throws if either side loses a group.
Split split(const GroupedDataset& data, const SplitSpec& spec);

// Inline generator specs, e.g. "gen:example2:n=100000,d=10" or
// "gen:lawschool:n=1823,shift=0.15". The seed argument applies unless the
// spec carries its own "seed=" entry.
GroupedDataset make_dataset(const std::string& spec, std::uint64_t seed);

}  // namespace fairreg::data
