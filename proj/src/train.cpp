#include "fairreg/train.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fairreg/metrics.hpp"
#include "fairreg/rng.hpp"

namespace fairreg::train {

namespace {

using nn::FeedForwardModel;
using nn::ForwardCache;
using nn::GradientTape;

void check_config(const TrainConfig& cfg) {
  if (!(cfg.tau >= 0.0)) throw std::invalid_argument("tau must be nonnegative");
  if (!(cfg.learning_rate > 0.0))
    throw std::invalid_argument("learning rate must be positive");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch size must be positive");
  if (!(cfg.clip_bound > 0.0))
    throw std::invalid_argument("clip bound must be positive");
  if (cfg.adversary_steps < 1)
    throw std::invalid_argument("adversary steps must be positive");
  if (!(cfg.p >= 1.0)) throw std::invalid_argument("order below 1");
}

// Group-stratified mini-batches: both groups' shuffled indices are dealt
// round-robin, so every batch holds members of both groups and the group
// mean gap stays defined.
std::vector<std::vector<std::size_t>> make_batches(
    const std::vector<std::size_t>& idx0,
    const std::vector<std::size_t>& idx1, std::size_t batch_size, Rng& rng) {
  const std::size_t n = idx0.size() + idx1.size();
  std::size_t nb = std::max<std::size_t>(1, n / batch_size);
  nb = std::min({nb, idx0.size(), idx1.size()});
  std::vector<std::size_t> i0 = idx0, i1 = idx1;
  rng.shuffle(i0);
  rng.shuffle(i1);
  std::vector<std::vector<std::size_t>> batches(nb);
  for (std::size_t k = 0; k < i0.size(); ++k) batches[k % nb].push_back(i0[k]);
  for (std::size_t k = 0; k < i1.size(); ++k) batches[k % nb].push_back(i1[k]);
  return batches;
}

struct LossGrad {
  double loss = 0.0;
  std::vector<double> dpred;  // d loss / d prediction, one per member
};

// l_p regression loss and its gradient. eps = (mean |r|^p)^(1/p) over the
// whole batch, or the group-balanced average of per-group eps values. The
// 1/eps^(p-1) factor makes gradient magnitudes scale-free, which is what lets
// a fixed learning rate of 1.0 behave.
LossGrad lp_loss_gradient(const std::vector<double>& preds,
                          const std::vector<double>& targets,
                          const std::vector<std::uint8_t>& groups, double p,
                          bool balanced) {
  const std::size_t n = preds.size();
  LossGrad out;
  out.dpred.assign(n, 0.0);

  const auto fill = [&](const std::vector<std::size_t>& members) -> double {
    if (members.empty()) return 0.0;
    const double m = static_cast<double>(members.size());
    double acc = 0.0;
    for (std::size_t i : members) {
      const double r = std::abs(preds[i] - targets[i]);
      acc += (p == 1.0) ? r : (p == 2.0 ? r * r : std::pow(r, p));
    }
    const double eps = (p == 1.0)   ? acc / m
                       : (p == 2.0) ? std::sqrt(acc / m)
                                    : std::pow(acc / m, 1.0 / p);
    if (eps < 1e-12) return eps;
    const double denom = (p == 1.0) ? m : m * std::pow(eps, p - 1.0);
    for (std::size_t i : members) {
      const double r = preds[i] - targets[i];
      const double mag = (p == 1.0)   ? 1.0
                         : (p == 2.0) ? std::abs(r)
                                      : std::pow(std::abs(r), p - 1.0);
      out.dpred[i] = (r > 0.0 ? mag : (r < 0.0 ? -mag : 0.0)) / denom;
    }
    return eps;
  };

  if (!balanced) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    out.loss = fill(all);
    return out;
  }
  std::vector<std::size_t> g0, g1;
  for (std::size_t i = 0; i < n; ++i) (groups[i] ? g1 : g0).push_back(i);
  const double e0 = fill(g0);
  const double e1 = fill(g1);
  for (double& d : out.dpred) d *= 0.5;
  out.loss = 0.5 * (e0 + e1);
  return out;
}

// Mean adversary score gap (group 0 minus group 1) over the given rows.
double adversary_gap(const FeedForwardModel& adversary,
                     const std::vector<std::vector<double>>& reprs,
                     const std::vector<std::uint8_t>& groups) {
  double sum[2] = {0.0, 0.0};
  std::size_t cnt[2] = {0, 0};
  for (std::size_t i = 0; i < reprs.size(); ++i) {
    const int a = groups[i] ? 1 : 0;
    sum[a] += nn::forward_scalar(adversary, reprs[i]);
    ++cnt[a];
  }
  if (cnt[0] == 0 || cnt[1] == 0) throw std::invalid_argument("empty group");
  return sum[0] / static_cast<double>(cnt[0]) -
         sum[1] / static_cast<double>(cnt[1]);
}

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Full-data epoch checkpoint shared by both trainers. The objective is
// recomputed from scratch so the log is an exact statement about the current
// parameters, not a running average.
void log_epoch(const EpochSink& sink, std::size_t epoch,
               const data::GroupedDataset& data,
               const FeedForwardModel* encoder,
               const FeedForwardModel& predictor,
               const FeedForwardModel* adversary, const TrainConfig& cfg,
               bool balanced_loss) {
  if (!sink) return;
  const std::vector<double> preds = predict_all(encoder, predictor, data);
  const LossGrad lg =
      lp_loss_gradient(preds, data.target, data.groups, cfg.p, balanced_loss);
  const bounds::GroupErrors ge =
      bounds::measure_group_errors(preds, data.target, data.groups, cfg.p);

  EpochRecord rec;
  rec.epoch = epoch;
  rec.balanced_error = bounds::balanced_error(ge);
  if (adversary && encoder) {
    std::vector<std::vector<double>> reprs(data.n);
    for (std::size_t i = 0; i < data.n; ++i)
      reprs[i] = nn::forward(*encoder, data.row(i)).output;
    rec.gap_estimate = adversary_gap(*adversary, reprs, data.groups);
  }
  rec.objective = lg.loss + cfg.tau * std::abs(rec.gap_estimate);

  std::vector<double> p0, p1;
  for (std::size_t i = 0; i < data.n; ++i)
    (data.groups[i] ? p1 : p0).push_back(preds[i]);
  rec.ks_disparity =
      metrics::ks_distance(dist1d::EmpiricalDist1d::from_samples(p0),
                           dist1d::EmpiricalDist1d::from_samples(p1));
  sink(rec);
}

}  // namespace

nlohmann::json FairnessReport::to_json() const {
  return nlohmann::json{{"p", p},
                        {"alpha", alpha},
                        {"n0", n0},
                        {"n1", n1},
                        {"eps0", eps0},
                        {"eps1", eps1},
                        {"eps0_l1", eps0_l1},
                        {"eps1_l1", eps1_l1},
                        {"eps0_l2", eps0_l2},
                        {"eps1_l2", eps1_l2},
                        {"overall_error", overall_error},
                        {"group_error_sum", group_error_sum},
                        {"balanced_error", balanced_error},
                        {"ks_disparity", ks_disparity},
                        {"accuracy_disparity", accuracy_disparity}};
}

std::vector<double> predict_all(const FeedForwardModel* encoder,
                                const FeedForwardModel& predictor,
                                const data::GroupedDataset& data) {
  std::vector<double> out(data.n);
  for (std::size_t i = 0; i < data.n; ++i) {
    const std::vector<double> x = data.row(i);
    out[i] = encoder
                 ? nn::forward_scalar(predictor, nn::forward(*encoder, x).output)
                 : nn::forward_scalar(predictor, x);
  }
  return out;
}

FeedForwardModel train_baseline(const data::GroupedDataset& data,
                                const TrainConfig& cfg, const EpochSink& sink) {
  data.require_both_groups();
  check_config(cfg);

  FeedForwardModel model =
      nn::init_model({data.d, 50, 20, 1}, Rng::derive(cfg.seed, 101));
  Rng rng(Rng::derive(cfg.seed, 202));
  const std::vector<std::size_t> idx0 = data.group_indices(0);
  const std::vector<std::size_t> idx1 = data.group_indices(1);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (const auto& batch : make_batches(idx0, idx1, cfg.batch_size, rng)) {
      std::vector<ForwardCache> caches(batch.size());
      std::vector<double> preds(batch.size()), ys(batch.size());
      std::vector<std::uint8_t> gs(batch.size());
      for (std::size_t k = 0; k < batch.size(); ++k) {
        caches[k] = nn::forward(model, data.row(batch[k]));
        preds[k] = caches[k].output[0];
        ys[k] = data.target[batch[k]];
        gs[k] = data.groups[batch[k]];
      }
      const LossGrad lg = lp_loss_gradient(preds, ys, gs, cfg.p, cfg.balanced);
      GradientTape tape = GradientTape::zeros_like(model);
      for (std::size_t k = 0; k < batch.size(); ++k) {
        if (lg.dpred[k] == 0.0) continue;
        tape.add(nn::backward(model, caches[k], {lg.dpred[k]}));
      }
      nn::apply_gradient(model, tape, cfg.learning_rate);
    }
    log_epoch(sink, epoch, data, nullptr, model, nullptr, cfg, cfg.balanced);
  }
  return model;
}

AdversarialModels train_adversarial(const data::GroupedDataset& data,
                                    const TrainConfig& cfg,
                                    const EpochSink& sink) {
  data.require_both_groups();
  check_config(cfg);

  AdversarialModels m;
  m.encoder = nn::init_model({data.d, 50, 20}, Rng::derive(cfg.seed, 11),
                             std::nullopt, nn::Activation::relu);
  m.predictor = nn::init_model({20, 1}, Rng::derive(cfg.seed, 12), cfg.clip_bound);
  m.adversary =
      nn::init_model({20, 10, 1}, Rng::derive(cfg.seed, 13), cfg.clip_bound);
  Rng rng(Rng::derive(cfg.seed, 14));

  const std::vector<std::size_t> idx0 = data.group_indices(0);
  const std::vector<std::size_t> idx1 = data.group_indices(1);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (const auto& batch : make_batches(idx0, idx1, cfg.batch_size, rng)) {
      const std::size_t bs = batch.size();
      std::vector<std::uint8_t> gs(bs);
      double cnt[2] = {0.0, 0.0};
      for (std::size_t k = 0; k < bs; ++k) {
        gs[k] = data.groups[batch[k]];
        cnt[gs[k] ? 1 : 0] += 1.0;
      }
      // Per-member weight of the mean-gap term (group 0 positive).
      const auto gap_weight = [&](std::size_t k) {
        return gs[k] ? -1.0 / cnt[1] : 1.0 / cnt[0];
      };

      std::vector<ForwardCache> ecache(bs);
      for (std::size_t k = 0; k < bs; ++k)
        ecache[k] = nn::forward(m.encoder, data.row(batch[k]));

      // Ascent: push the adversary's group mean gap as far as clipping allows.
      for (std::size_t step = 0; step < cfg.adversary_steps; ++step) {
        std::vector<ForwardCache> acache(bs);
        double gap = 0.0;
        for (std::size_t k = 0; k < bs; ++k) {
          acache[k] = nn::forward(m.adversary, ecache[k].output);
          gap += gap_weight(k) * acache[k].output[0];
        }
        const double s = sign_of(gap);
        if (s != 0.0) {
          GradientTape tape = GradientTape::zeros_like(m.adversary);
          for (std::size_t k = 0; k < bs; ++k)
            tape.add(nn::backward(m.adversary, acache[k], {s * gap_weight(k)}));
          nn::apply_gradient(m.adversary, tape, -cfg.learning_rate);
        }
        nn::clip_weights(m.adversary);
      }

      // Descent on balanced error + tau * |gap| through predictor and encoder.
      std::vector<ForwardCache> pcache(bs), acache(bs);
      std::vector<double> preds(bs), ys(bs);
      double gap = 0.0;
      for (std::size_t k = 0; k < bs; ++k) {
        pcache[k] = nn::forward(m.predictor, ecache[k].output);
        acache[k] = nn::forward(m.adversary, ecache[k].output);
        preds[k] = pcache[k].output[0];
        ys[k] = data.target[batch[k]];
        gap += gap_weight(k) * acache[k].output[0];
      }
      const LossGrad lg = lp_loss_gradient(preds, ys, gs, cfg.p, true);
      const double s = sign_of(gap);

      GradientTape enc_tape = GradientTape::zeros_like(m.encoder);
      GradientTape pred_tape = GradientTape::zeros_like(m.predictor);
      for (std::size_t k = 0; k < bs; ++k) {
        std::vector<double> zgrad(20, 0.0);
        if (lg.dpred[k] != 0.0) {
          GradientTape gp = nn::backward(m.predictor, pcache[k], {lg.dpred[k]});
          zgrad = gp.input_grad;
          pred_tape.add(gp);
        }
        if (cfg.tau > 0.0 && s != 0.0) {
          const GradientTape ga = nn::backward(m.adversary, acache[k],
                                               {cfg.tau * s * gap_weight(k)});
          for (std::size_t j = 0; j < zgrad.size(); ++j)
            zgrad[j] += ga.input_grad[j];
        }
        bool any = false;
        for (double v : zgrad)
          if (v != 0.0) any = true;
        if (any) enc_tape.add(nn::backward(m.encoder, ecache[k], zgrad));
      }
      nn::apply_gradient(m.encoder, enc_tape, cfg.learning_rate);
      nn::apply_gradient(m.predictor, pred_tape, cfg.learning_rate);
      nn::clip_weights(m.predictor);
    }
    log_epoch(sink, epoch, data, &m.encoder, m.predictor, &m.adversary, cfg,
              true);
  }
  return m;
}

RunEvaluation evaluate_run(const FeedForwardModel* encoder,
                           const FeedForwardModel& predictor,
                           const data::GroupedDataset& data, double p) {
  data.require_both_groups();
  const std::vector<double> preds = predict_all(encoder, predictor, data);

  const bounds::GroupErrors ge =
      bounds::measure_group_errors(preds, data.target, data.groups, p);
  const bounds::GroupErrors g1 =
      bounds::measure_group_errors(preds, data.target, data.groups, 1.0);
  const bounds::GroupErrors g2 =
      bounds::measure_group_errors(preds, data.target, data.groups, 2.0);

  std::vector<double> p0, p1;
  for (std::size_t i = 0; i < data.n; ++i)
    (data.groups[i] ? p1 : p0).push_back(preds[i]);

  RunEvaluation out{FairnessReport{},
                    dist1d::EmpiricalDist1d::from_samples(p0),
                    dist1d::EmpiricalDist1d::from_samples(p1),
                    0.0,
                    std::nullopt,
                    std::nullopt};

  FairnessReport& r = out.report;
  r.p = p;
  r.alpha = ge.alpha;
  r.n0 = p0.size();
  r.n1 = p1.size();
  r.eps0 = ge.eps0;
  r.eps1 = ge.eps1;
  r.eps0_l1 = g1.eps0;
  r.eps1_l1 = g1.eps1;
  r.eps0_l2 = g2.eps0;
  r.eps1_l2 = g2.eps1;
  r.overall_error = bounds::joint_error(ge);
  r.group_error_sum = ge.eps0 + ge.eps1;
  r.balanced_error = bounds::balanced_error(ge);
  r.ks_disparity = metrics::ks_distance(out.pred_dist0, out.pred_dist1);
  r.accuracy_disparity = std::abs(ge.eps0 - ge.eps1);

  out.predictor_lipschitz = nn::lipschitz_upper(predictor) *
                            (encoder ? nn::lipschitz_upper(*encoder) : 1.0);
  if (encoder) {
    out.head_lipschitz = nn::lipschitz_upper(predictor);
    // Deterministic evenly-strided subsample of each group's representations,
    // small enough for the dense transport solver.
    const auto reprs_of = [&](int a) {
      const std::vector<std::size_t> idx = data.group_indices(a);
      const std::size_t take = std::min<std::size_t>(64, idx.size());
      std::vector<std::vector<double>> out_r;
      for (std::size_t k = 0; k < take; ++k) {
        const std::size_t i = idx[k * idx.size() / take];
        out_r.push_back(nn::forward(*encoder, data.row(i)).output);
      }
      return out_r;
    };
    out.representation_w1 = metrics::w1_point_clouds(reprs_of(0), reprs_of(1));
  }
  return out;
}

FairnessReport evaluate(const FeedForwardModel* encoder,
                        const FeedForwardModel& predictor,
                        const data::GroupedDataset& data, double p) {
  return evaluate_run(encoder, predictor, data, p).report;
}

std::vector<bounds::BoundCertificate> certificate_sweep(
    const data::GroupedDataset& data, const std::vector<RunEvaluation>& runs,
    const TrainConfig& cfg, const CertificateParams& params) {
  data.require_both_groups();
  const dist1d::EmpiricalDist1d y0 = data.group_target_dist(0);
  const dist1d::EmpiricalDist1d y1 = data.group_target_dist(1);
  const double alpha = data.group0_fraction();
  const std::size_t nmin = std::min(data.group_count(0), data.group_count(1));

  const double wp = bounds::sp_error_sum_lower_bound(y0, y1, cfg.p);
  const bounds::MeanGapBounds mg = bounds::mean_gap_bounds(y0, y1);
  const double joint = bounds::joint_error_lower_bound(y0, y1, alpha, cfg.p);
  const double fs = bounds::finite_sample_lower_bound(y0, y1, nmin,
                                                      params.delta, params.c1);

  const std::string base = "group targets: n0=" + std::to_string(data.group_count(0)) +
                           " n1=" + std::to_string(data.group_count(1)) +
                           " p=" + std::to_string(cfg.p);

  std::vector<bounds::BoundCertificate> certs;
  const auto push = [&](std::string name, double lower, double measured,
                        bool vacuous, std::string digest) {
    bounds::BoundCertificate c;
    c.name = std::move(name);
    c.lower_bound = lower;
    c.measured_lhs = measured;
    c.slack = measured - lower;
    c.vacuous = vacuous;
    c.inputs_digest = std::move(digest);
    certs.push_back(std::move(c));
  };

  for (std::size_t k = 0; k < runs.size(); ++k) {
    const RunEvaluation& r = runs[k];
    const std::string tag = base + "; run " + std::to_string(k);
    push("group_error_sum", wp, r.report.group_error_sum, wp <= 0.0,
         tag + "; floor for SP predictors");
    push("mean_gap_mae", mg.mae_bound, r.report.eps0_l1 + r.report.eps1_l1,
         mg.mae_bound <= 0.0, tag + "; sum of group MAEs vs mean gap");
    push("mean_gap_mse", mg.mse_bound,
         r.report.eps0_l2 * r.report.eps0_l2 +
             r.report.eps1_l2 * r.report.eps1_l2,
         mg.mse_bound <= 0.0, tag + "; sum of squared group l2 errors");
    push("joint_error", joint, r.report.overall_error, joint <= 0.0,
         tag + "; alpha=" + std::to_string(alpha));
    push("finite_sample", fs, r.report.eps0_l1 + r.report.eps1_l1, fs <= 0.0,
         tag + "; n=min group, delta=" + std::to_string(params.delta) +
             ", c1=" + std::to_string(params.c1));

    const double eps_sp =
        metrics::wasserstein_p(r.pred_dist0, r.pred_dist1, cfg.p);
    const double excess = bounds::excess_risk_lower_bound(
        {0.0, 0.0, wp, eps_sp});
    push("excess_risk", excess, r.report.group_error_sum, excess <= 0.0,
         tag + "; noiseless reference: optimal group errors 0, eps_sp=" +
             std::to_string(eps_sp));

    if (r.representation_w1 && r.head_lipschitz) {
      const double level = bounds::representation_sp_bound(
          *r.representation_w1, *r.head_lipschitz, params.density_bound);
      // Upper-bound certificate: measured_lhs holds the guaranteed KS level,
      // lower_bound the observed KS, so slack >= 0 still means "satisfied".
      push("representation_sp", r.report.ks_disparity, level, level >= 1.0,
           tag + "; repr W1=" + std::to_string(*r.representation_w1) +
               ", head Lipschitz=" + std::to_string(*r.head_lipschitz) +
               ", C=" + std::to_string(params.density_bound));
    }
  }
  return certs;
}

nlohmann::json ReportAggregate::to_json() const {
  const auto stat = [](const AggregateStat& s) {
    return nlohmann::json{{"mean", s.mean}, {"std", s.stddev}};
  };
  return nlohmann::json{{"runs", runs},
                        {"overall_error", stat(overall_error)},
                        {"group_error_sum", stat(group_error_sum)},
                        {"ks_disparity", stat(ks_disparity)},
                        {"accuracy_disparity", stat(accuracy_disparity)}};
}

ReportAggregate aggregate(const std::vector<FairnessReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("no reports");
  ReportAggregate out;
  out.runs = reports.size();
  const auto collect = [&](auto field) {
    AggregateStat s;
    double sum = 0.0;
    for (const FairnessReport& r : reports) sum += field(r);
    s.mean = sum / static_cast<double>(reports.size());
    if (reports.size() > 1) {
      double sq = 0.0;
      for (const FairnessReport& r : reports) {
        const double c = field(r) - s.mean;
        sq += c * c;
      }
      s.stddev = std::sqrt(sq / static_cast<double>(reports.size() - 1));
    }
    return s;
  };
  out.overall_error = collect([](const FairnessReport& r) { return r.overall_error; });
  out.group_error_sum =
      collect([](const FairnessReport& r) { return r.group_error_sum; });
  out.ks_disparity = collect([](const FairnessReport& r) { return r.ks_disparity; });
  out.accuracy_disparity =
      collect([](const FairnessReport& r) { return r.accuracy_disparity; });
  return out;
}

}  // namespace fairreg::train
