#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

namespace fairreg::nn {

enum class Activation { relu, identity };

struct Layer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // row-major, out x in
  std::vector<double> bias;     // out
  Activation activation = Activation::identity;
};

// Plain dense feedforward net. Layer dimensions chain; widths here are tiny
// (<= 64), so all linear algebra is straightforward loops.
struct FeedForwardModel {
  std::vector<Layer> layers;
  std::optional<double> clip_bound;

  std::size_t input_dim() const { return layers.front().in; }
  std::size_t output_dim() const { return layers.back().out; }
};

// Everything backward() needs from one forward pass: the input fed to each
// layer plus each layer's pre-activation values.
struct ForwardCache {
  std::vector<std::vector<double>> inputs;  // inputs[l] = input to layer l
  std::vector<std::vector<double>> pre;     // pre[l] = affine output of layer l
  std::vector<double> output;
};

// Parameter gradients shaped exactly like the model, plus the gradient with
// respect to the model input (needed to chain through a composed encoder).
struct GradientTape {
  std::vector<std::vector<double>> weight_grads;
  std::vector<std::vector<double>> bias_grads;
  std::vector<double> input_grad;

  static GradientTape zeros_like(const FeedForwardModel& m);
  void add(const GradientTape& other);
};

// Seeded init: weights uniform on [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases
// zero. Hidden activations are relu; the final activation defaults to
// identity (regression output / adversary score) but an encoder producing an
// interior representation passes relu.
FeedForwardModel init_model(const std::vector<std::size_t>& layer_sizes,
                            std::uint64_t seed,
                            std::optional<double> clip_bound = std::nullopt,
                            Activation final_activation = Activation::identity);

ForwardCache forward(const FeedForwardModel& m, const std::vector<double>& x);

// Convenience for scalar-output models.
double forward_scalar(const FeedForwardModel& m, const std::vector<double>& x);

// Exact gradients of dot(output, output_grad) for every parameter and the
// input. The relu subgradient at exactly 0 is taken to be 0.
GradientTape backward(const FeedForwardModel& m, const ForwardCache& cache,
                      const std::vector<double>& output_grad);

// params -= step * grads
void apply_gradient(FeedForwardModel& m, const GradientTape& tape, double step);

// Clamp every weight and bias into [-clip_bound, clip_bound]. Idempotent.
void clip_weights(FeedForwardModel& m);

double max_abs_parameter(const FeedForwardModel& m);

// Upper bound on the Lipschitz constant under the Euclidean norm: product of
// the layers' spectral norms (power iteration), valid because relu and
// identity are 1-Lipschitz.
double lipschitz_upper(const FeedForwardModel& m);

// Empirical lower bound: max difference quotient over seeded random pairs.
double lipschitz_lower_estimate(const FeedForwardModel& m, std::size_t probes,
                                std::uint64_t seed);

nlohmann::json to_checkpoint(const FeedForwardModel& m);
FeedForwardModel from_checkpoint(const nlohmann::json& j);

}  // namespace fairreg::nn
