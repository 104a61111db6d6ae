// fairreg: group-fairness certificates and adversarial training for 1-d
// regression targets. Subcommands: metrics, bounds, train, sweep, verify.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fairreg/bounds.hpp"
#include "fairreg/data.hpp"
#include "fairreg/dist1d.hpp"
#include "fairreg/metrics.hpp"
#include "fairreg/train.hpp"
#include "fairreg/verify.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fairreg;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// plumbing

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// One directory per (command, config) pair; re-running the same invocation
// rewrites the same files byte for byte. Timestamps appear only in the
// manifest.
struct RunContext {
  std::string command;
  fs::path dir;
  json config;
  json inputs = json::array();
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> artifacts;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  std::string started = utc_now();

  void add_input(const std::string& label, std::uint64_t digest) {
    inputs.push_back({{"label", label}, {"digest", hex16(digest)}});
  }

  void write_json(const std::string& name, const json& j) {
    std::ofstream out(dir / name, std::ios::binary);
    out << j.dump(2) << '\n';
    artifacts.push_back(name);
  }

  void write_text(const std::string& name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    out << text;
    artifacts.push_back(name);
  }

  std::ofstream open_lines(const std::string& name) {
    artifacts.push_back(name);
    return std::ofstream(dir / name, std::ios::binary);
  }

  void finish() {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    json m{{"command", command},       {"config", config},
           {"seeds", seeds},           {"inputs", inputs},
           {"artifacts", artifacts},   {"started_at", started},
           {"duration_seconds", secs}, {"output_dir", dir.string()}};
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    out << m.dump(2) << '\n';
  }
};

RunContext make_run(const std::string& command, const json& config) {
  const char* root_env = std::getenv("FAIRREG_OUT");
  const fs::path root = root_env && *root_env ? fs::path(root_env) : fs::path("runs");
  RunContext rc;
  rc.command = command;
  rc.config = config;
  rc.dir = root / (command + "-" + hex16(fnv1a(command + "\n" + config.dump())));
  fs::create_directories(rc.dir);
  return rc;
}

// ---------------------------------------------------------------------------
// inputs

std::vector<double> read_sample_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        out.push_back(v);
      } catch (const std::exception&) {
        throw std::runtime_error("unparseable value at " + path + ":" +
                                 std::to_string(lineno));
      }
    }
  }
  if (out.empty()) throw std::runtime_error("empty sample file: " + path);
  return out;
}

struct DatasetFlags {
  std::string spec;  // generator spec ("gen:...") or CSV path
  std::string protected_column = "A";
  std::string target_column = "Y";
  std::string protected_positive = "1";
  std::vector<std::string> feature_columns;  // empty: every other column
  bool zscore = false;
  std::uint64_t seed = 1;  // generator seed
};

void add_dataset_flags(CLI::App* cmd, DatasetFlags& f) {
  cmd->add_option("--data", f.spec,
                  "dataset: CSV path or generator spec like gen:lawschool:n=1823")
      ->required();
  cmd->add_option("--protected-column", f.protected_column,
                  "CSV column holding the protected attribute");
  cmd->add_option("--target-column", f.target_column, "CSV column holding the target");
  cmd->add_option("--protected-positive", f.protected_positive,
                  "value of the protected column mapped to group 1");
  cmd->add_option("--features", f.feature_columns,
                  "feature columns (default: all remaining columns)")
      ->delimiter(',');
  cmd->add_flag("--zscore", f.zscore, "z-score the features after loading");
}

std::vector<std::string> csv_header_features(const std::string& path,
                                             const std::string& protected_col,
                                             const std::string& target_col) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty file: " + path);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  std::vector<std::string> out;
  std::istringstream hs(header);
  std::string col;
  while (std::getline(hs, col, ','))
    if (col != protected_col && col != target_col) out.push_back(col);
  return out;
}

data::GroupedDataset resolve_dataset(const DatasetFlags& f, RunContext& rc) {
  if (f.spec.rfind("gen:", 0) == 0) {
    rc.add_input(f.spec, fnv1a(f.spec + "#seed=" + std::to_string(f.seed)));
    return data::make_dataset(f.spec, f.seed);
  }
  rc.add_input(f.spec, fnv1a(read_file_bytes(f.spec)));
  data::CsvLoadSpec spec;
  spec.path = f.spec;
  spec.protected_column = f.protected_column;
  spec.target_column = f.target_column;
  spec.protected_positive_value = f.protected_positive;
  spec.zscore_features = f.zscore;
  spec.feature_columns =
      f.feature_columns.empty()
          ? csv_header_features(f.spec, f.protected_column, f.target_column)
          : f.feature_columns;
  const data::CsvLoadResult res = data::load_csv(spec);
  for (const data::RowRejection& r : res.rejected)
    std::cerr << "note: " << f.spec << ":" << r.line << ": row skipped (" << r.reason
              << ")\n";
  return res.dataset;
}

// ---------------------------------------------------------------------------
// formatting

std::string fmt(double v, int prec = 6) {
  if (std::isnan(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string fmt_pm(const train::AggregateStat& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f±%.4f", s.mean, s.stddev);
  return buf;
}

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

std::string certificate_table(const std::vector<bounds::BoundCertificate>& certs) {
  std::ostringstream os;
  os << pad("certificate", 28) << pad("lower_bound", 14) << pad("measured", 14)
     << pad("slack", 14) << "vacuous\n";
  for (const bounds::BoundCertificate& c : certs)
    os << pad(c.name, 28) << pad(fmt(c.lower_bound), 14) << pad(fmt(c.measured_lhs), 14)
       << pad(fmt(c.slack), 14) << (c.vacuous ? "yes" : "no") << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// metrics

struct MetricsArgs {
  std::vector<std::string> files;  // two sample files
  DatasetFlags data;
  std::string column;
  double p = 2.0;
  bool have_data = false;
};

int cmd_metrics(const MetricsArgs& a) {
  json config{{"p", a.p}};
  dist1d::EmpiricalDist1d dist_a = dist1d::EmpiricalDist1d::point_mass(0);
  dist1d::EmpiricalDist1d dist_b = dist_a;
  std::size_t n0 = 0, n1 = 0;
  if (a.files.size() == 2 && !a.have_data) {
    config["inputs"] = a.files;
    RunContext rc = make_run("metrics", config);
    const std::vector<double> sa = read_sample_file(a.files[0]);
    const std::vector<double> sb = read_sample_file(a.files[1]);
    rc.add_input(a.files[0], fnv1a(read_file_bytes(a.files[0])));
    rc.add_input(a.files[1], fnv1a(read_file_bytes(a.files[1])));
    dist_a = dist1d::EmpiricalDist1d::from_samples(sa);
    dist_b = dist1d::EmpiricalDist1d::from_samples(sb);
    n0 = sa.size();
    n1 = sb.size();
    const json rep{{"w_p", metrics::wasserstein_p(dist_a, dist_b, a.p)},
                   {"w1_cdf", metrics::wasserstein_1_cdf(dist_a, dist_b)},
                   {"ks", metrics::ks_distance(dist_a, dist_b)},
                   {"n0", n0},
                   {"n1", n1}};
    rc.write_json("metrics.json", rep);
    rc.finish();
    std::cout << "w_p(p=" << a.p << ") = " << rep["w_p"].get<double>()
              << "\nw1_cdf   = " << rep["w1_cdf"].get<double>()
              << "\nks       = " << rep["ks"].get<double>() << "\nreport: "
              << (rc.dir / "metrics.json").string() << "\n";
    return 0;
  }
  if (a.have_data && a.files.empty()) {
    if (a.column.empty()) throw UsageError("--column is required with --data");
    config["data"] = a.data.spec;
    config["column"] = a.column;
    config["seed"] = a.data.seed;
    RunContext rc = make_run("metrics", config);
    const data::GroupedDataset ds = resolve_dataset(a.data, rc);
    ds.require_both_groups();
    std::vector<double> va, vb;
    if (a.column == "target" || a.column == a.data.target_column) {
      for (std::size_t i = 0; i < ds.n; ++i)
        (ds.groups[i] ? vb : va).push_back(ds.target[i]);
    } else {
      const auto it = std::find(ds.feature_names.begin(), ds.feature_names.end(),
                                a.column);
      if (it == ds.feature_names.end())
        throw UsageError("unknown column: " + a.column);
      const std::size_t j =
          static_cast<std::size_t>(it - ds.feature_names.begin());
      for (std::size_t i = 0; i < ds.n; ++i)
        (ds.groups[i] ? vb : va).push_back(ds.features[i * ds.d + j]);
    }
    dist_a = dist1d::EmpiricalDist1d::from_samples(va);
    dist_b = dist1d::EmpiricalDist1d::from_samples(vb);
    const json rep{{"w_p", metrics::wasserstein_p(dist_a, dist_b, a.p)},
                   {"w1_cdf", metrics::wasserstein_1_cdf(dist_a, dist_b)},
                   {"ks", metrics::ks_distance(dist_a, dist_b)},
                   {"n0", va.size()},
                   {"n1", vb.size()}};
    rc.write_json("metrics.json", rep);
    rc.finish();
    std::cout << "w_p(p=" << a.p << ") = " << rep["w_p"].get<double>()
              << "\nw1_cdf   = " << rep["w1_cdf"].get<double>()
              << "\nks       = " << rep["ks"].get<double>() << "\nreport: "
              << (rc.dir / "metrics.json").string() << "\n";
    return 0;
  }
  throw UsageError("give either two sample files or --data with --column");
}

// ---------------------------------------------------------------------------
// bounds

struct BoundsArgs {
  DatasetFlags data;
  double p = 2.0;
  double alpha = -1.0;  // <0: use the dataset's group-0 fraction
  double density_bound = 1.0;
  double c1 = 1.0;
  double delta = 0.05;
};

int cmd_bounds(const BoundsArgs& a) {
  const json config{{"data", a.data.spec}, {"p", a.p},
                    {"alpha", a.alpha},    {"density_bound", a.density_bound},
                    {"c1", a.c1},          {"delta", a.delta},
                    {"seed", a.data.seed}};
  RunContext rc = make_run("bounds", config);
  rc.seeds = {a.data.seed};
  const data::GroupedDataset ds = resolve_dataset(a.data, rc);
  ds.require_both_groups();
  const dist1d::EmpiricalDist1d y0 = ds.group_target_dist(0);
  const dist1d::EmpiricalDist1d y1 = ds.group_target_dist(1);
  const double alpha = a.alpha < 0 ? ds.group0_fraction() : a.alpha;
  const std::size_t nmin = std::min(ds.group_count(0), ds.group_count(1));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::string base = "n0=" + std::to_string(ds.group_count(0)) +
                           " n1=" + std::to_string(ds.group_count(1)) +
                           " p=" + fmt(a.p, 2) + " alpha=" + fmt(alpha, 4);

  std::vector<bounds::BoundCertificate> certs;
  const auto floor_cert = [&](const std::string& name, double lower) {
    certs.push_back({name, lower, nan, nan, !(lower > 0.0), base});
  };
  floor_cert("group_error_sum_floor", bounds::sp_error_sum_lower_bound(y0, y1, a.p));
  const bounds::MeanGapBounds mg = bounds::mean_gap_bounds(y0, y1);
  floor_cert("mean_gap_mae_floor", mg.mae_bound);
  floor_cert("mean_gap_mse_floor", mg.mse_bound);
  floor_cert("joint_error_floor",
             bounds::joint_error_lower_bound(y0, y1, alpha, a.p));
  floor_cert("finite_sample_floor",
             bounds::finite_sample_lower_bound(y0, y1, nmin, a.delta, a.c1));
  certs.back().inputs_digest += " delta=" + fmt(a.delta, 4) + " c1=" + fmt(a.c1, 2);
  {
    const bounds::PriceComparison pc = bounds::price_comparison(y0, y1, alpha);
    certs.push_back({"price_of_fairness", pc.without_attribute, pc.with_attribute,
                     pc.with_attribute - pc.without_attribute,
                     !(pc.without_attribute > 0.0), base});
  }
  {
    // here the certified side is an upper bound: observed KS must stay below
    // the level implied by W1 and the density bound
    const double ks = metrics::ks_distance(y0, y1);
    const double cap =
        bounds::ks_from_w1(metrics::wasserstein_1_cdf(y0, y1), a.density_bound);
    certs.push_back({"ks_w1_conversion", ks, cap, cap - ks, cap >= 1.0,
                     base + " C=" + fmt(a.density_bound, 2)});
  }

  json arr = json::array();
  for (const bounds::BoundCertificate& c : certs) arr.push_back(c.to_json());
  rc.write_json("certificates.json", arr);
  const std::string table = certificate_table(certs);
  rc.write_text("table.txt", table);
  rc.finish();
  std::cout << table << "report: " << (rc.dir / "certificates.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train / sweep

struct TrainArgs {
  DatasetFlags data;
  train::TrainConfig cfg;
  bool clip_given = false;
  std::string mode = "baseline";
  std::vector<std::uint64_t> seeds{1};
  double holdout = 0.2;
  double density_bound = 1.0;
  double c1 = 1.0;
  double delta = 0.05;
};

void add_train_flags(CLI::App* cmd, TrainArgs& a, bool with_tau_and_mode) {
  if (with_tau_and_mode) {
    cmd->add_option("--tau", a.cfg.tau, "adversary coefficient")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--mode", a.mode, "baseline or adversarial")
        ->check(CLI::IsMember({"baseline", "adversarial"}));
  }
  cmd->add_option("--lr", a.cfg.learning_rate, "learning rate")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", a.cfg.epochs, "training epochs");
  cmd->add_option("--batch-size", a.cfg.batch_size, "minibatch size")
      ->check(CLI::PositiveNumber);
  auto* clip = cmd->add_option("--clip", a.cfg.clip_bound,
                               "weight clip bound (default: tau, or 1 when tau=0)")
                   ->check(CLI::PositiveNumber);
  cmd->parse_complete_callback([clip, &a] { a.clip_given = clip->count() > 0; });
  cmd->add_option("--adversary-steps", a.cfg.adversary_steps,
                  "ascent steps per descent step")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--p", a.cfg.p, "loss order")->check(CLI::Range(1.0, 16.0));
  cmd->add_flag("--balanced", a.cfg.balanced, "equal-weight group errors in the loss");
  cmd->add_option("--seed", a.data.seed, "generator / base seed");
  cmd->add_option("--seeds", a.seeds, "training seeds")->delimiter(',');
  cmd->add_option("--holdout", a.holdout, "held-out evaluation fraction (0 = none)")
      ->check(CLI::Range(0.0, 0.9));
  cmd->add_option("--density-bound", a.density_bound, "density bound C")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--c1", a.c1, "finite-sample constant")->check(CLI::PositiveNumber);
  cmd->add_option("--delta", a.delta, "finite-sample failure probability")
      ->check(CLI::Range(1e-12, 0.999999));
}

double effective_clip(const TrainArgs& a, double tau) {
  if (a.clip_given) return a.cfg.clip_bound;
  return tau > 0.0 ? tau : 1.0;
}

struct EvalOutcome {
  train::RunEvaluation eval;
};

train::RunEvaluation run_one(const data::GroupedDataset& train_data,
                             const data::GroupedDataset& eval_data,
                             const train::TrainConfig& cfg, bool adversarial,
                             std::ofstream& epochs_out) {
  const train::EpochSink sink = [&epochs_out](const train::EpochRecord& r) {
    epochs_out << json{{"epoch", r.epoch},
                       {"objective", r.objective},
                       {"balanced_error", r.balanced_error},
                       {"gap_estimate", r.gap_estimate},
                       {"ks_disparity", r.ks_disparity}}
                      .dump()
               << '\n';
  };
  if (adversarial) {
    const train::AdversarialModels m = train::train_adversarial(train_data, cfg, sink);
    return train::evaluate_run(&m.encoder, m.predictor, eval_data, cfg.p);
  }
  const nn::FeedForwardModel m = train::train_baseline(train_data, cfg, sink);
  return train::evaluate_run(nullptr, m, eval_data, cfg.p);
}

json config_echo(const TrainArgs& a, const char* command) {
  return json{{"command", command},
              {"data", a.data.spec},
              {"mode", a.mode},
              {"tau", a.cfg.tau},
              {"lr", a.cfg.learning_rate},
              {"epochs", a.cfg.epochs},
              {"batch_size", a.cfg.batch_size},
              {"clip_given", a.clip_given},
              {"clip", a.clip_given ? json(a.cfg.clip_bound) : json()},
              {"adversary_steps", a.cfg.adversary_steps},
              {"p", a.cfg.p},
              {"balanced", a.cfg.balanced},
              {"seed", a.data.seed},
              {"seeds", a.seeds},
              {"holdout", a.holdout},
              {"density_bound", a.density_bound},
              {"c1", a.c1},
              {"delta", a.delta}};
}

int cmd_train(TrainArgs& a) {
  RunContext rc = make_run("train", config_echo(a, "train"));
  rc.seeds = a.seeds;
  const data::GroupedDataset full = resolve_dataset(a.data, rc);
  full.require_both_groups();
  data::GroupedDataset train_data = full, eval_data = full;
  if (a.holdout > 0.0) {
    const data::Split sp = data::split(full, {1.0 - a.holdout, 7});
    train_data = sp.train;
    eval_data = sp.test;
  }
  train::TrainConfig cfg = a.cfg;
  cfg.clip_bound = effective_clip(a, a.cfg.tau);
  const bool adversarial = a.mode == "adversarial";

  std::vector<train::RunEvaluation> runs;
  std::vector<train::FairnessReport> reports;
  for (std::uint64_t seed : a.seeds) {
    train::TrainConfig run_cfg = cfg;
    run_cfg.seed = seed;
    std::ofstream epochs = rc.open_lines("epochs-seed" + std::to_string(seed) + ".jsonl");
    runs.push_back(run_one(train_data, eval_data, run_cfg, adversarial, epochs));
    reports.push_back(runs.back().report);
  }
  const train::ReportAggregate agg = train::aggregate(reports);
  const std::vector<bounds::BoundCertificate> certs = train::certificate_sweep(
      eval_data, runs, cfg, {a.density_bound, a.c1, a.delta});

  json jruns = json::array();
  for (const train::FairnessReport& r : reports) jruns.push_back(r.to_json());
  json jcerts = json::array();
  for (const bounds::BoundCertificate& c : certs) jcerts.push_back(c.to_json());
  const json report{{"config", rc.config},
                    {"aggregate", agg.to_json()},
                    {"runs", jruns},
                    {"certificates", jcerts}};
  rc.write_json("report.json", report);
  rc.finish();

  std::cout << a.mode << " on " << a.data.spec << " (" << a.seeds.size()
            << " seed" << (a.seeds.size() == 1 ? "" : "s") << ")\n"
            << "  overall_error       " << fmt_pm(agg.overall_error) << "\n"
            << "  group_error_sum     " << fmt_pm(agg.group_error_sum) << "\n"
            << "  ks_disparity        " << fmt_pm(agg.ks_disparity) << "\n"
            << "  accuracy_disparity  " << fmt_pm(agg.accuracy_disparity) << "\n"
            << certificate_table(certs) << "report: "
            << (rc.dir / "report.json").string() << "\n";
  return 0;
}

struct SweepArgs {
  TrainArgs base;
  std::vector<double> taus;
};

int cmd_sweep(SweepArgs& s) {
  if (s.taus.size() < 2) throw UsageError("sweep needs at least two --taus values");
  s.base.mode = "adversarial";
  json config = config_echo(s.base, "sweep");
  config["taus"] = s.taus;
  config.erase("tau");
  config.erase("mode");
  RunContext rc = make_run("sweep", config);
  rc.seeds = s.base.seeds;
  const data::GroupedDataset full = resolve_dataset(s.base.data, rc);
  full.require_both_groups();
  data::GroupedDataset train_data = full, eval_data = full;
  if (s.base.holdout > 0.0) {
    const data::Split sp = data::split(full, {1.0 - s.base.holdout, 7});
    train_data = sp.train;
    eval_data = sp.test;
  }

  struct Row {
    std::string label;
    std::optional<double> tau;
    train::ReportAggregate agg;
  };
  std::vector<Row> rows;
  const auto run_row = [&](const std::string& label, std::optional<double> tau) {
    std::vector<train::FairnessReport> reports;
    for (std::uint64_t seed : s.base.seeds) {
      train::TrainConfig cfg = s.base.cfg;
      cfg.seed = seed;
      cfg.tau = tau.value_or(0.0);
      cfg.clip_bound = effective_clip(s.base, cfg.tau);
      std::ofstream epochs = rc.open_lines("epochs-" + label + "-seed" +
                                           std::to_string(seed) + ".jsonl");
      reports.push_back(
          run_one(train_data, eval_data, cfg, tau.has_value(), epochs).report);
    }
    rows.push_back({label, tau, train::aggregate(reports)});
  };
  run_row("baseline", std::nullopt);
  for (double tau : s.taus) run_row("tau=" + fmt(tau, 2), tau);

  bool ks_strict = true, acc_trend = true;
  for (std::size_t i = 2; i < rows.size(); ++i)
    if (!(rows[i].agg.ks_disparity.mean < rows[i - 1].agg.ks_disparity.mean))
      ks_strict = false;
  if (rows.size() > 2)
    acc_trend = rows.back().agg.accuracy_disparity.mean <=
                rows[1].agg.accuracy_disparity.mean;

  std::ostringstream table;
  table << pad("row", 12) << pad("overall_error", 18) << pad("group_error_sum", 18)
        << pad("ks_disparity", 18) << "accuracy_disparity\n";
  json jrows = json::array();
  for (const Row& r : rows) {
    table << pad(r.label, 12) << pad(fmt_pm(r.agg.overall_error), 18)
          << pad(fmt_pm(r.agg.group_error_sum), 18)
          << pad(fmt_pm(r.agg.ks_disparity), 18)
          << fmt_pm(r.agg.accuracy_disparity) << "\n";
    jrows.push_back({{"label", r.label},
                     {"tau", r.tau ? json(*r.tau) : json()},
                     {"aggregate", r.agg.to_json()}});
  }
  const json report{{"config", rc.config},
                    {"rows", jrows},
                    {"trend",
                     {{"ks_strictly_decreasing", ks_strict},
                      {"accuracy_disparity_last_le_first", acc_trend}}}};
  rc.write_json("sweep.json", report);
  rc.write_text("table.txt", table.str());
  rc.finish();
  std::cout << table.str() << "ks strictly decreasing in tau: "
            << (ks_strict ? "yes" : "no")
            << "\naccuracy disparity last<=first: " << (acc_trend ? "yes" : "no")
            << "\nreport: " << (rc.dir / "sweep.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const std::string& suite, double budget_seconds, std::uint64_t seed) {
  const json config{{"suite", suite}, {"budget_seconds", budget_seconds}, {"seed", seed}};
  RunContext rc = make_run("verify", config);
  rc.seeds = {seed};
  std::vector<std::pair<std::string, std::vector<verify::PropertyResult>>> groups;
  if (suite == "metrics" || suite == "all")
    groups.emplace_back("metrics", verify::metrics_suite(seed));
  if (suite == "bounds" || suite == "all")
    groups.emplace_back("bounds", verify::bounds_suite(seed));
  if (suite == "nn" || suite == "all")
    groups.emplace_back("nn", verify::nn_suite(seed));

  bool ok = true;
  json results = json::array();
  for (const auto& [label, res] : groups)
    for (const verify::PropertyResult& r : res) {
      ok = ok && r.pass;
      std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << label << "/" << r.name;
      if (!r.pass) std::cout << ": " << r.detail;
      std::cout << "\n";
      results.push_back({{"suite", label}, {"name", r.name}, {"pass", r.pass},
                         {"detail", r.detail}});
    }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - rc.t0).count();
  const bool in_budget = elapsed <= budget_seconds;
  if (!in_budget)
    std::cout << "[FAIL] " << suite << "/time_budget: " << fmt(elapsed, 1)
              << "s > " << fmt(budget_seconds, 1) << "s\n";
  ok = ok && in_budget;
  rc.write_json("verify.json", json{{"suite", suite},
                                    {"pass", ok},
                                    {"results", results}});
  rc.finish();
  std::cout << (ok ? "all properties hold" : "verification FAILED") << "\n";
  return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"group-fairness certificates and adversarial training for regression"};
  app.require_subcommand(1);

  MetricsArgs ma;
  CLI::App* metrics_cmd =
      app.add_subcommand("metrics", "Wasserstein and KS distances between two samples");
  metrics_cmd->add_option("files", ma.files, "two sample files (numbers, one per line)")
      ->expected(0, 2);
  metrics_cmd->add_option("--data", ma.data.spec, "dataset CSV path or generator spec");
  metrics_cmd->add_option("--column", ma.column,
                          "dataset column to compare across groups ('target' or a name)");
  metrics_cmd->add_option("--protected-column", ma.data.protected_column, "");
  metrics_cmd->add_option("--target-column", ma.data.target_column, "");
  metrics_cmd->add_option("--protected-positive", ma.data.protected_positive, "");
  metrics_cmd->add_option("--features", ma.data.feature_columns, "")->delimiter(',');
  metrics_cmd->add_flag("--zscore", ma.data.zscore, "");
  metrics_cmd->add_option("--seed", ma.data.seed, "generator seed");
  metrics_cmd->add_option("--p", ma.p, "Wasserstein order")->check(CLI::Range(1.0, 16.0));

  BoundsArgs ba;
  CLI::App* bounds_cmd =
      app.add_subcommand("bounds", "certificates for a dataset's group targets");
  add_dataset_flags(bounds_cmd, ba.data);
  bounds_cmd->add_option("--seed", ba.data.seed, "generator seed");
  bounds_cmd->add_option("--p", ba.p, "error order")->check(CLI::Range(1.0, 16.0));
  bounds_cmd->add_option("--alpha", ba.alpha, "group-0 fraction override")
      ->check(CLI::Range(0.0, 1.0));
  bounds_cmd->add_option("--density-bound", ba.density_bound, "density bound C")
      ->check(CLI::PositiveNumber);
  bounds_cmd->add_option("--c1", ba.c1, "finite-sample constant")
      ->check(CLI::PositiveNumber);
  bounds_cmd->add_option("--delta", ba.delta, "finite-sample failure probability")
      ->check(CLI::Range(1e-12, 0.999999));

  TrainArgs ta;
  CLI::App* train_cmd = app.add_subcommand("train", "train and evaluate a regressor");
  add_dataset_flags(train_cmd, ta.data);
  add_train_flags(train_cmd, ta, true);

  SweepArgs sa;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "tau sweep with a baseline row, mean±std panel");
  add_dataset_flags(sweep_cmd, sa.base.data);
  add_train_flags(sweep_cmd, sa.base, false);
  sweep_cmd->add_option("--taus", sa.taus, "adversary coefficients (at least two)")
      ->delimiter(',')
      ->required();

  std::string suite = "all";
  double budget = 300.0;
  std::uint64_t verify_seed = 42;
  CLI::App* verify_cmd = app.add_subcommand("verify", "run the property suites");
  verify_cmd->add_option("--suite", suite, "metrics, bounds, nn, or all")
      ->check(CLI::IsMember({"metrics", "bounds", "nn", "all"}));
  verify_cmd->add_option("--budget", budget, "time budget in seconds")
      ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--seed", verify_seed, "suite seed");

  try {
    app.parse(argc, argv);
    if (metrics_cmd->parsed()) {
      ma.have_data = !ma.data.spec.empty();
      return cmd_metrics(ma);
    }
    if (bounds_cmd->parsed()) return cmd_bounds(ba);
    if (train_cmd->parsed()) return cmd_train(ta);
    if (sweep_cmd->parsed()) return cmd_sweep(sa);
    if (verify_cmd->parsed()) return cmd_verify(suite, budget, verify_seed);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
