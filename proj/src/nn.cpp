#include "fairreg/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fairreg/rng.hpp"

namespace fairreg::nn {

namespace {

double activate(Activation a, double z) {
  return a == Activation::relu ? (z > 0.0 ? z : 0.0) : z;
}

// Subgradient of the activation at pre-activation z; relu at exactly 0 is 0.
double activate_grad(Activation a, double z) {
  return a == Activation::relu ? (z > 0.0 ? 1.0 : 0.0) : 1.0;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Largest singular value by power iteration on W^T W. Deterministic start,
// fixed iteration budget; matrices here are at most 64x64.
double spectral_norm(const Layer& layer) {
  const std::size_t in = layer.in, out = layer.out;
  std::vector<double> v(in), u(out), back(in);
  for (std::size_t i = 0; i < in; ++i)
    v[i] = 1.0 + 1e-3 * static_cast<double>(i);
  const double vn = norm2(v);
  for (double& x : v) x /= vn;

  double sigma = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    for (std::size_t o = 0; o < out; ++o) {
      double s = 0.0;
      for (std::size_t i = 0; i < in; ++i) s += layer.weights[o * in + i] * v[i];
      u[o] = s;
    }
    const double sig = norm2(u);
    if (sig == 0.0) return 0.0;
    for (std::size_t i = 0; i < in; ++i) {
      double s = 0.0;
      for (std::size_t o = 0; o < out; ++o) s += layer.weights[o * in + i] * u[o];
      back[i] = s;
    }
    const double bn = norm2(back);
    if (bn == 0.0) return sig;
    for (std::size_t i = 0; i < in; ++i) v[i] = back[i] / bn;
    if (std::abs(sig - sigma) <= 1e-8 * std::max(1.0, sig)) return sig;
    sigma = sig;
  }
  return sigma;
}

}  // namespace

GradientTape GradientTape::zeros_like(const FeedForwardModel& m) {
  GradientTape t;
  t.weight_grads.reserve(m.layers.size());
  t.bias_grads.reserve(m.layers.size());
  for (const Layer& l : m.layers) {
    t.weight_grads.emplace_back(l.weights.size(), 0.0);
    t.bias_grads.emplace_back(l.bias.size(), 0.0);
  }
  t.input_grad.assign(m.input_dim(), 0.0);
  return t;
}

void GradientTape::add(const GradientTape& other) {
  if (weight_grads.size() != other.weight_grads.size())
    throw std::invalid_argument("tape shape mismatch");
  for (std::size_t l = 0; l < weight_grads.size(); ++l) {
    for (std::size_t k = 0; k < weight_grads[l].size(); ++k)
      weight_grads[l][k] += other.weight_grads[l][k];
    for (std::size_t k = 0; k < bias_grads[l].size(); ++k)
      bias_grads[l][k] += other.bias_grads[l][k];
  }
  for (std::size_t k = 0; k < input_grad.size(); ++k)
    input_grad[k] += other.input_grad[k];
}

FeedForwardModel init_model(const std::vector<std::size_t>& layer_sizes,
                            std::uint64_t seed,
                            std::optional<double> clip_bound,
                            Activation final_activation) {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("need at least two layer sizes");
  for (std::size_t s : layer_sizes)
    if (s < 1) throw std::invalid_argument("layer size must be positive");
  if (clip_bound && !(*clip_bound > 0.0))
    throw std::invalid_argument("clip bound must be positive");

  Rng rng(seed);
  FeedForwardModel m;
  m.clip_bound = clip_bound;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    Layer layer;
    layer.in = layer_sizes[l];
    layer.out = layer_sizes[l + 1];
    layer.activation = (l + 2 < layer_sizes.size()) ? Activation::relu
                                                    : final_activation;
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer.in));
    layer.weights.resize(layer.out * layer.in);
    for (double& w : layer.weights) w = rng.uniform(-scale, scale);
    layer.bias.assign(layer.out, 0.0);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

ForwardCache forward(const FeedForwardModel& m, const std::vector<double>& x) {
  if (x.size() != m.input_dim())
    throw std::invalid_argument("input dimension mismatch");
  ForwardCache cache;
  cache.inputs.reserve(m.layers.size());
  cache.pre.reserve(m.layers.size());
  std::vector<double> a = x;
  for (const Layer& l : m.layers) {
    cache.inputs.push_back(a);
    std::vector<double> z(l.out);
    for (std::size_t o = 0; o < l.out; ++o) {
      double s = l.bias[o];
      for (std::size_t i = 0; i < l.in; ++i) s += l.weights[o * l.in + i] * a[i];
      z[o] = s;
    }
    cache.pre.push_back(z);
    a.resize(l.out);
    for (std::size_t o = 0; o < l.out; ++o) a[o] = activate(l.activation, z[o]);
  }
  cache.output = a;
  return cache;
}

double forward_scalar(const FeedForwardModel& m, const std::vector<double>& x) {
  const ForwardCache c = forward(m, x);
  if (c.output.size() != 1)
    throw std::invalid_argument("scalar output expected");
  return c.output[0];
}

GradientTape backward(const FeedForwardModel& m, const ForwardCache& cache,
                      const std::vector<double>& output_grad) {
  if (cache.inputs.size() != m.layers.size() ||
      cache.pre.size() != m.layers.size() ||
      output_grad.size() != m.output_dim())
    throw std::invalid_argument("cache shape mismatch");
  for (std::size_t li = 0; li < m.layers.size(); ++li)
    if (cache.inputs[li].size() != m.layers[li].in ||
        cache.pre[li].size() != m.layers[li].out)
      throw std::invalid_argument("cache shape mismatch");

  GradientTape tape = GradientTape::zeros_like(m);
  std::vector<double> grad = output_grad;  // d loss / d (layer output)
  for (std::size_t li = m.layers.size(); li-- > 0;) {
    const Layer& l = m.layers[li];
    const std::vector<double>& a = cache.inputs[li];
    const std::vector<double>& z = cache.pre[li];
    std::vector<double> down(l.in, 0.0);
    for (std::size_t o = 0; o < l.out; ++o) {
      const double dz = grad[o] * activate_grad(l.activation, z[o]);
      if (dz == 0.0) continue;
      tape.bias_grads[li][o] += dz;
      for (std::size_t i = 0; i < l.in; ++i) {
        tape.weight_grads[li][o * l.in + i] += dz * a[i];
        down[i] += dz * l.weights[o * l.in + i];
      }
    }
    grad = std::move(down);
  }
  tape.input_grad = std::move(grad);
  return tape;
}

void apply_gradient(FeedForwardModel& m, const GradientTape& tape, double step) {
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    for (std::size_t k = 0; k < m.layers[l].weights.size(); ++k)
      m.layers[l].weights[k] -= step * tape.weight_grads[l][k];
    for (std::size_t k = 0; k < m.layers[l].bias.size(); ++k)
      m.layers[l].bias[k] -= step * tape.bias_grads[l][k];
  }
}

void clip_weights(FeedForwardModel& m) {
  if (!m.clip_bound) throw std::logic_error("model not clip-configured");
  const double c = *m.clip_bound;
  for (Layer& l : m.layers) {
    for (double& w : l.weights) w = std::clamp(w, -c, c);
    for (double& b : l.bias) b = std::clamp(b, -c, c);
  }
}

double max_abs_parameter(const FeedForwardModel& m) {
  double peak = 0.0;
  for (const Layer& l : m.layers) {
    for (double w : l.weights) peak = std::max(peak, std::abs(w));
    for (double b : l.bias) peak = std::max(peak, std::abs(b));
  }
  return peak;
}

double lipschitz_upper(const FeedForwardModel& m) {
  double prod = 1.0;
  for (const Layer& l : m.layers) prod *= spectral_norm(l);
  return prod;
}

double lipschitz_lower_estimate(const FeedForwardModel& m, std::size_t probes,
                                std::uint64_t seed) {
  if (probes < 2) throw std::invalid_argument("need at least two probes");
  Rng rng(seed);
  const std::size_t d = m.input_dim();
  double best = 0.0;
  for (std::size_t k = 0; k < probes; ++k) {
    std::vector<double> x(d), y(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = rng.normal(0.0, 2.0);
    if (k % 2 == 0) {
      for (std::size_t i = 0; i < d; ++i) y[i] = rng.normal(0.0, 2.0);
    } else {
      // local probe: small perturbation picks up the steepest linear piece
      for (std::size_t i = 0; i < d; ++i) y[i] = x[i] + 1e-3 * rng.normal();
    }
    std::vector<double> dx(d);
    for (std::size_t i = 0; i < d; ++i) dx[i] = x[i] - y[i];
    const double denom = norm2(dx);
    if (denom < 1e-12) continue;
    const ForwardCache fx = forward(m, x);
    const ForwardCache fy = forward(m, y);
    std::vector<double> df(fx.output.size());
    for (std::size_t i = 0; i < df.size(); ++i)
      df[i] = fx.output[i] - fy.output[i];
    best = std::max(best, norm2(df) / denom);
  }
  return best;
}

nlohmann::json to_checkpoint(const FeedForwardModel& m) {
  nlohmann::json j;
  std::vector<std::size_t> sizes{m.input_dim()};
  std::vector<std::string> acts;
  for (const Layer& l : m.layers) {
    sizes.push_back(l.out);
    acts.push_back(l.activation == Activation::relu ? "relu" : "identity");
  }
  j["layer_sizes"] = sizes;
  j["activations"] = acts;
  if (m.clip_bound)
    j["clip_bound"] = *m.clip_bound;
  else
    j["clip_bound"] = nullptr;
  nlohmann::json layers = nlohmann::json::array();
  for (const Layer& l : m.layers)
    layers.push_back({{"weights", l.weights}, {"bias", l.bias}});
  j["layers"] = layers;
  return j;
}

namespace {

FeedForwardModel parse_checkpoint(const nlohmann::json& j) {
  const auto sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  const auto acts = j.at("activations").get<std::vector<std::string>>();
  if (sizes.size() < 2 || acts.size() + 1 != sizes.size())
    throw std::invalid_argument("malformed checkpoint");

  FeedForwardModel m;
  if (!j.at("clip_bound").is_null())
    m.clip_bound = j.at("clip_bound").get<double>();
  const auto& layers = j.at("layers");
  if (layers.size() != acts.size())
    throw std::invalid_argument("malformed checkpoint");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Layer layer;
    layer.in = sizes[l];
    layer.out = sizes[l + 1];
    if (acts[l] == "relu")
      layer.activation = Activation::relu;
    else if (acts[l] == "identity")
      layer.activation = Activation::identity;
    else
      throw std::invalid_argument("malformed checkpoint");
    layer.weights = layers[l].at("weights").get<std::vector<double>>();
    layer.bias = layers[l].at("bias").get<std::vector<double>>();
    if (layer.weights.size() != layer.in * layer.out ||
        layer.bias.size() != layer.out)
      throw std::invalid_argument("malformed checkpoint");
    m.layers.push_back(std::move(layer));
  }
  return m;
}

}  // namespace

FeedForwardModel from_checkpoint(const nlohmann::json& j) {
  // missing keys or wrong value kinds surface as json exceptions; fold them
  // into the same error the explicit shape checks raise
  try {
    return parse_checkpoint(j);
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument("malformed checkpoint");
  }
}

}  // namespace fairreg::nn
