#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairreg/bounds.hpp"
#include "fairreg/data.hpp"
#include "fairreg/dist1d.hpp"
#include "fairreg/nn.hpp"

namespace fairreg::train {

struct TrainConfig {
  double tau = 0.0;
  double learning_rate = 1.0;
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  double clip_bound = 1.0;
  std::size_t adversary_steps = 5;  // ascent steps per descent step
  double p = 2.0;                   // loss order
  std::uint64_t seed = 1;
  bool balanced = false;            // equal-weight group errors in the loss
};

struct EpochRecord {
  std::size_t epoch = 0;
  double objective = 0.0;
  double balanced_error = 0.0;
  double gap_estimate = 0.0;  // adversary mean-score gap, full data
  double ks_disparity = 0.0;
};

using EpochSink = std::function<void(const EpochRecord&)>;

struct FairnessReport {
  double p = 2.0;
  double alpha = 0.5;       // group-0 fraction
  std::size_t n0 = 0;
  std::size_t n1 = 0;
  double eps0 = 0.0;        // group errors at order p
  double eps1 = 0.0;
  double eps0_l1 = 0.0;     // and at order 1 (mean absolute error)
  double eps1_l1 = 0.0;
  double eps0_l2 = 0.0;     // and at order 2
  double eps1_l2 = 0.0;
  double overall_error = 0.0;      // alpha*eps0 + (1-alpha)*eps1
  double group_error_sum = 0.0;    // eps0 + eps1
  double balanced_error = 0.0;     // (eps0 + eps1)/2
  double ks_disparity = 0.0;       // KS between group prediction laws
  double accuracy_disparity = 0.0; // |eps0 - eps1|

  nlohmann::json to_json() const;
};

// Evaluation bundle: the report plus the prediction distributions and
// auxiliary quantities the certificates need.
struct RunEvaluation {
  FairnessReport report;
  dist1d::EmpiricalDist1d pred_dist0;
  dist1d::EmpiricalDist1d pred_dist1;
  double predictor_lipschitz = 0.0;  // composed encoder+predictor upper bound
  std::optional<double> head_lipschitz;     // predictor acting on representations
  std::optional<double> representation_w1;  // subsampled LP estimate
};

// Plain mini-batch gradient descent on the l_p regression loss; architecture
// input -> 50 -> 20 -> 1 with relu hidden activations. Deterministic per seed.
nn::FeedForwardModel train_baseline(const data::GroupedDataset& data,
                                    const TrainConfig& cfg,
                                    const EpochSink& sink = {});

struct AdversarialModels {
  nn::FeedForwardModel encoder;    // input -> 50 -> 20, relu throughout
  nn::FeedForwardModel predictor;  // 20 -> 1
  nn::FeedForwardModel adversary;  // 20 -> 10 -> 1, weight-clipped
};

// Gradient descent-ascent on
//   balanced error of predictor(encoder(x)) + tau * |group mean adversary gap|
// with the adversary maximizing the gap under weight clipping, and the
// predictor clipped as well. Group-stratified batches keep the gap defined.
AdversarialModels train_adversarial(const data::GroupedDataset& data,
                                    const TrainConfig& cfg,
                                    const EpochSink& sink = {});

std::vector<double> predict_all(const nn::FeedForwardModel* encoder,
                                const nn::FeedForwardModel& predictor,
                                const data::GroupedDataset& data);

// Evaluate a (possibly composed) predictor. Pass a null encoder for a plain
// model.
RunEvaluation evaluate_run(const nn::FeedForwardModel* encoder,
                           const nn::FeedForwardModel& predictor,
                           const data::GroupedDataset& data, double p);

FairnessReport evaluate(const nn::FeedForwardModel* encoder,
                        const nn::FeedForwardModel& predictor,
                        const data::GroupedDataset& data, double p);

struct CertificateParams {
  double density_bound = 1.0;
  double c1 = 1.0;
  double delta = 0.05;
};

// All lower-bound certificates for each evaluated run against the dataset's
// group target distributions.
std::vector<bounds::BoundCertificate> certificate_sweep(
    const data::GroupedDataset& data, const std::vector<RunEvaluation>& runs,
    const TrainConfig& cfg, const CertificateParams& params);

struct AggregateStat {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single run
};

struct ReportAggregate {
  std::size_t runs = 0;
  AggregateStat overall_error;
  AggregateStat group_error_sum;
  AggregateStat ks_disparity;
  AggregateStat accuracy_disparity;

  nlohmann::json to_json() const;
};

ReportAggregate aggregate(const std::vector<FairnessReport>& reports);

}  // namespace fairreg::train
