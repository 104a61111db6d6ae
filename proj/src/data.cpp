#include "fairreg/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "fairreg/rng.hpp"

namespace fairreg::data {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc{} && p == e && std::isfinite(out);
}

// Min-max map of the stored target into [-1, 1]; constant targets map to 0.
TargetRescale fit_rescale(const std::vector<double>& raw) {
  const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  TargetRescale r;
  if (*hi_it == *lo_it) {
    r.scale = 1.0;
    r.offset = -*lo_it;
  } else {
    r.scale = 2.0 / (*hi_it - *lo_it);
    r.offset = -1.0 - r.scale * *lo_it;
  }
  return r;
}

}  // namespace

std::vector<double> GroupedDataset::row(std::size_t i) const {
  return std::vector<double>(features.begin() + static_cast<long>(i * d),
                             features.begin() + static_cast<long>((i + 1) * d));
}

std::size_t GroupedDataset::group_count(int a) const {
  std::size_t c = 0;
  for (std::uint8_t g : groups) c += (g == a) ? 1 : 0;
  return c;
}

double GroupedDataset::group0_fraction() const {
  return static_cast<double>(group_count(0)) / static_cast<double>(n);
}

std::vector<std::size_t> GroupedDataset::group_indices(int a) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (groups[i] == a) out.push_back(i);
  return out;
}

dist1d::EmpiricalDist1d GroupedDataset::group_target_dist(int a) const {
  std::vector<double> vals;
  for (std::size_t i = 0; i < n; ++i)
    if (groups[i] == a) vals.push_back(target[i]);
  return dist1d::EmpiricalDist1d::from_samples(vals);
}

void GroupedDataset::require_both_groups() const {
  if (n == 0 || group_count(0) == 0 || group_count(1) == 0)
    throw std::invalid_argument("empty group");
}

GroupedDataset gen_example1(std::size_t n, std::uint64_t seed) {
  if (n < 4) throw std::invalid_argument("dataset too small");
  Rng rng(seed);
  GroupedDataset out;
  out.n = n;
  out.d = 1;
  out.feature_names = {"x0"};
  out.features.resize(n);
  out.groups.resize(n);
  out.target.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.groups[i] = static_cast<std::uint8_t>(i % 2);
    out.features[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    out.target[i] = static_cast<double>(out.groups[i]);
  }
  return out;
}

GroupedDataset gen_example2(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("dataset too small");
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  Rng rng(seed);
  GroupedDataset out;
  out.n = n;
  out.d = d;
  for (std::size_t k = 0; k < d; ++k)
    out.feature_names.push_back("x" + std::to_string(k));
  out.features.resize(n * d);
  out.groups.resize(n);
  std::vector<double> raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.groups[i] = static_cast<std::uint8_t>(i % 2);
    for (std::size_t k = 0; k < d; ++k) out.features[i * d + k] = rng.normal();
    raw[i] = out.features[i * d] + (out.groups[i] ? 1.0 : -1.0);
  }
  out.rescale = fit_rescale(raw);
  out.target.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.target[i] = out.rescale.from_raw(raw[i]);
  return out;
}

GroupedDataset gen_lawschool_like(std::size_t n, std::uint64_t seed,
                                  double shift) {
  if (n < 10) throw std::invalid_argument("dataset too small");
  if (!(std::abs(shift) <= 1.0)) throw std::invalid_argument("shift out of range");
  Rng rng(seed);

  GroupedDataset out;
  out.n = n;
  out.d = 5;
  out.feature_names = {"score_a", "score_b", "score_c", "fulltime", "aid"};

  // Fixed group composition, then a seeded shuffle: the A=1 fraction matches
  // 0.452 as closely as n allows, independent of the seed.
  std::size_t n1 = static_cast<std::size_t>(std::llround(0.452 * static_cast<double>(n)));
  n1 = std::clamp<std::size_t>(n1, 1, n - 1);
  out.groups.assign(n, 0);
  for (std::size_t i = 0; i < n1; ++i) out.groups[i] = 1;
  rng.shuffle(out.groups);

  out.features.resize(n * out.d);
  out.target.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = out.groups[i] ? 1.0 : 0.0;
    const double z1 = rng.normal();
    const double z2 = rng.normal() + 0.8 * (2.0 * a - 1.0);
    const double z3 = rng.normal();
    const double b1 = rng.bernoulli(out.groups[i] ? 0.65 : 0.35) ? 1.0 : 0.0;
    const double b2 = rng.bernoulli(0.3) ? 1.0 : 0.0;
    out.features[i * out.d + 0] = z1;
    out.features[i * out.d + 1] = z2;
    out.features[i * out.d + 2] = z3;
    out.features[i * out.d + 3] = b1;
    out.features[i * out.d + 4] = b2;
    // Bounded by 0.3 + |shift|/2 + 0.05 < 1, so no rescale is needed; the
    // shift enters additively, making the group target mean gap exactly shift
    // in expectation.
    out.target[i] = 0.3 * std::tanh(z1) + shift * (a - 0.5) +
                    0.05 * std::tanh(rng.normal());
  }
  return out;
}

CsvLoadResult load_csv(const CsvLoadSpec& spec) {
  std::ifstream in(spec.path);
  if (!in) throw std::runtime_error("cannot open file: " + spec.path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("no usable rows");
  const std::vector<std::string> header = split_fields(line);
  const auto col_index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw std::invalid_argument("missing column: " + name);
    return static_cast<std::size_t>(it - header.begin());
  };

  std::vector<std::size_t> fcols;
  for (const std::string& name : spec.feature_columns)
    fcols.push_back(col_index(name));
  const std::size_t pcol = col_index(spec.protected_column);
  const std::size_t tcol = col_index(spec.target_column);

  CsvLoadResult out;
  GroupedDataset& ds = out.dataset;
  ds.d = fcols.size();
  ds.feature_names = spec.feature_columns;
  std::vector<double> raw_targets;

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size()) {
      out.rejected.push_back({lineno, "wrong field count"});
      continue;
    }
    std::vector<double> feats(ds.d);
    bool ok = true;
    for (std::size_t k = 0; k < fcols.size() && ok; ++k) {
      if (!parse_double(fields[fcols[k]], feats[k])) {
        out.rejected.push_back(
            {lineno, "unparseable value in column " + spec.feature_columns[k]});
        ok = false;
      }
    }
    if (!ok) continue;
    double t;
    if (!parse_double(fields[tcol], t)) {
      out.rejected.push_back(
          {lineno, "unparseable value in column " + spec.target_column});
      continue;
    }
    ds.features.insert(ds.features.end(), feats.begin(), feats.end());
    ds.groups.push_back(fields[pcol] == spec.protected_positive_value ? 1 : 0);
    raw_targets.push_back(t);
  }

  ds.n = raw_targets.size();
  if (ds.n == 0) throw std::runtime_error("no usable rows");
  if (ds.group_count(0) == 0 || ds.group_count(1) == 0)
    throw std::runtime_error("single-group data");

  if (spec.zscore_features) {
    for (std::size_t k = 0; k < ds.d; ++k) {
      double mean = 0.0;
      for (std::size_t i = 0; i < ds.n; ++i) mean += ds.features[i * ds.d + k];
      mean /= static_cast<double>(ds.n);
      double var = 0.0;
      for (std::size_t i = 0; i < ds.n; ++i) {
        const double c = ds.features[i * ds.d + k] - mean;
        var += c * c;
      }
      var /= static_cast<double>(ds.n);
      const double sd = std::sqrt(var);
      if (sd == 0.0) continue;
      for (std::size_t i = 0; i < ds.n; ++i)
        ds.features[i * ds.d + k] = (ds.features[i * ds.d + k] - mean) / sd;
    }
  }

  ds.rescale = fit_rescale(raw_targets);
  ds.target.resize(ds.n);
  for (std::size_t i = 0; i < ds.n; ++i)
    ds.target[i] = ds.rescale.from_raw(raw_targets[i]);
  return out;
}

void save_dataset(const GroupedDataset& data, const std::string& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot open file: " + csv_path);
  for (std::size_t k = 0; k < data.d; ++k) out << "f" << k << ",";
  out << "A,Y\n";
  char buf[64];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (std::size_t i = 0; i < data.n; ++i) {
    for (std::size_t k = 0; k < data.d; ++k) {
      put(data.features[i * data.d + k]);
      out << ",";
    }
    out << static_cast<int>(data.groups[i]) << ",";
    put(data.target[i]);
    out << "\n";
  }
  out.close();

  nlohmann::json meta{{"scale", data.rescale.scale},
                      {"offset", data.rescale.offset},
                      {"feature_names", data.feature_names}};
  std::ofstream side(csv_path + ".meta.json");
  if (!side) throw std::runtime_error("cannot open file: " + csv_path + ".meta.json");
  side << meta.dump(2) << "\n";
}

GroupedDataset load_snapshot(const std::string& csv_path) {
  std::ifstream side(csv_path + ".meta.json");
  if (!side)
    throw std::runtime_error("cannot open file: " + csv_path + ".meta.json");
  nlohmann::json meta;
  side >> meta;

  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open file: " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("no usable rows");
  const std::size_t cols = split_fields(line).size();
  if (cols < 2) throw std::runtime_error("malformed snapshot");

  GroupedDataset ds;
  ds.d = cols - 2;
  ds.rescale.scale = meta.at("scale").get<double>();
  ds.rescale.offset = meta.at("offset").get<double>();
  ds.feature_names = meta.at("feature_names").get<std::vector<std::string>>();

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != cols)
      throw std::runtime_error("malformed snapshot line " + std::to_string(lineno));
    double v;
    for (std::size_t k = 0; k < ds.d; ++k) {
      if (!parse_double(fields[k], v))
        throw std::runtime_error("malformed snapshot line " + std::to_string(lineno));
      ds.features.push_back(v);
    }
    if (!parse_double(fields[ds.d], v))
      throw std::runtime_error("malformed snapshot line " + std::to_string(lineno));
    ds.groups.push_back(v != 0.0 ? 1 : 0);
    if (!parse_double(fields[ds.d + 1], v))
      throw std::runtime_error("malformed snapshot line " + std::to_string(lineno));
    ds.target.push_back(v);
  }
  ds.n = ds.target.size();
  if (ds.n == 0) throw std::runtime_error("no usable rows");
  return ds;
}

Split split(const GroupedDataset& data, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw std::invalid_argument("train fraction out of range");
  data.require_both_groups();

  Rng rng(spec.seed);
  std::vector<std::size_t> train_idx, test_idx;
  for (int a = 0; a < 2; ++a) {
    std::vector<std::size_t> idx = data.group_indices(a);
    rng.shuffle(idx);
    const std::size_t take = static_cast<std::size_t>(std::llround(
        spec.train_fraction * static_cast<double>(idx.size())));
    if (take == 0 || take == idx.size())
      throw std::invalid_argument("split loses a group");
    train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<long>(take));
    test_idx.insert(test_idx.end(), idx.begin() + static_cast<long>(take), idx.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  const auto take_rows = [&](const std::vector<std::size_t>& idx) {
    GroupedDataset part;
    part.n = idx.size();
    part.d = data.d;
    part.rescale = data.rescale;
    part.feature_names = data.feature_names;
    part.features.reserve(idx.size() * data.d);
    for (std::size_t i : idx) {
      part.features.insert(part.features.end(),
                           data.features.begin() + static_cast<long>(i * data.d),
                           data.features.begin() + static_cast<long>((i + 1) * data.d));
      part.groups.push_back(data.groups[i]);
      part.target.push_back(data.target[i]);
    }
    return part;
  };

  Split out{take_rows(train_idx), take_rows(test_idx)};
  out.train.require_both_groups();
  out.test.require_both_groups();
  return out;
}

GroupedDataset make_dataset(const std::string& spec, std::uint64_t seed) {
  if (spec.rfind("gen:", 0) != 0)
    throw std::invalid_argument("not a generator spec: " + spec);
  const std::size_t name_end = spec.find(':', 4);
  const std::string name =
      name_end == std::string::npos ? spec.substr(4) : spec.substr(4, name_end - 4);

  std::size_t n = 1000, d = 10;
  double shift = 0.15;
  if (name_end != std::string::npos) {
    std::stringstream args(spec.substr(name_end + 1));
    std::string kv;
    while (std::getline(args, kv, ',')) {
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("malformed generator spec: " + spec);
      const std::string key = trim(kv.substr(0, eq));
      const std::string val = trim(kv.substr(eq + 1));
      double num;
      if (!parse_double(val, num))
        throw std::invalid_argument("malformed generator spec: " + spec);
      if (key == "n")
        n = static_cast<std::size_t>(num);
      else if (key == "d")
        d = static_cast<std::size_t>(num);
      else if (key == "shift")
        shift = num;
      else if (key == "seed")
        seed = static_cast<std::uint64_t>(num);
      else
        throw std::invalid_argument("unknown generator parameter: " + key);
    }
  }

  if (name == "example1") return gen_example1(n, seed);
  if (name == "example2") return gen_example2(n, d, seed);
  if (name == "lawschool") return gen_lawschool_like(n, seed, shift);
  throw std::invalid_argument("unknown generator: " + name);
}

}  // namespace fairreg::data
