#include "adsrnote/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "adsrnote/parallel.hpp"
#include "adsrnote/rng.hpp"

namespace adsrnote {

namespace {

constexpr double kBceFloor = 1e-12;
constexpr double kOneMinusUlp = 0x1.fffffffffffffp-1;

struct Tensor3 {
  int c = 0, h = 0, w = 0;
  std::vector<double> v;

  Tensor3() = default;
  Tensor3(int c_, int h_, int w_)
      : c(c_), h(h_), w(w_), v(static_cast<std::size_t>(c_) * h_ * w_, 0.0) {}

  double at(int ci, int hi, int wi) const {
    return v[(static_cast<std::size_t>(ci) * h + hi) * w + wi];
  }
  double& at(int ci, int hi, int wi) {
    return v[(static_cast<std::size_t>(ci) * h + hi) * w + wi];
  }
  std::size_t size() const { return v.size(); }
};

struct LayerCache {
  Tensor3 input;
  std::vector<double> noise_mult;  // only for noisy ELU layers
};

[[noreturn]] void shape_error(const std::string& layer_name,
                              const std::string& detail) {
  throw std::invalid_argument("layer " + layer_name + ": " + detail);
}

Tensor3 conv_forward(const LayerSpec& spec, const LayerParams& p,
                     const Tensor3& in, const std::string& name) {
  if (in.c != spec.in_channels) {
    shape_error(name, "expected " + std::to_string(spec.in_channels) +
                          " input channels, got " + std::to_string(in.c));
  }
  if (in.h < spec.kernel_time || in.w < spec.kernel_freq) {
    shape_error(name, "input " + std::to_string(in.h) + "x" +
                          std::to_string(in.w) + " smaller than kernel " +
                          std::to_string(spec.kernel_time) + "x" +
                          std::to_string(spec.kernel_freq));
  }
  const int oh = in.h - spec.kernel_time + 1;
  const int ow = in.w - spec.kernel_freq + 1;
  Tensor3 out(spec.out_channels, oh, ow);
  for (int co = 0; co < spec.out_channels; ++co) {
    const double* wbase =
        &p.weights[static_cast<std::size_t>(co) * spec.in_channels *
                   spec.kernel_time * spec.kernel_freq];
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        double acc = p.bias[co];
        const double* wk = wbase;
        for (int ci = 0; ci < spec.in_channels; ++ci) {
          for (int ky = 0; ky < spec.kernel_time; ++ky) {
            const double* row = &in.v[(static_cast<std::size_t>(ci) * in.h +
                                       (y + ky)) * in.w + x];
            for (int kx = 0; kx < spec.kernel_freq; ++kx) {
              acc += wk[kx] * row[kx];
            }
            wk += spec.kernel_freq;
          }
        }
        out.at(co, y, x) = acc;
      }
    }
  }
  return out;
}

void conv_backward(const LayerSpec& spec, const LayerParams& p,
                   const Tensor3& in, const Tensor3& grad_out,
                   Tensor3& grad_in, LayerParams& grad_p) {
  grad_in = Tensor3(in.c, in.h, in.w);
  for (int co = 0; co < spec.out_channels; ++co) {
    const std::size_t wbase = static_cast<std::size_t>(co) * spec.in_channels *
                              spec.kernel_time * spec.kernel_freq;
    for (int y = 0; y < grad_out.h; ++y) {
      for (int x = 0; x < grad_out.w; ++x) {
        const double g = grad_out.at(co, y, x);
        if (g == 0.0) continue;
        grad_p.bias[co] += g;
        std::size_t wk = wbase;
        for (int ci = 0; ci < spec.in_channels; ++ci) {
          for (int ky = 0; ky < spec.kernel_time; ++ky) {
            const std::size_t row =
                (static_cast<std::size_t>(ci) * in.h + (y + ky)) * in.w + x;
            for (int kx = 0; kx < spec.kernel_freq; ++kx) {
              grad_p.weights[wk + kx] += g * in.v[row + kx];
              grad_in.v[row + kx] += g * p.weights[wk + kx];
            }
            wk += spec.kernel_freq;
          }
        }
      }
    }
  }
}

Tensor3 dense_forward(const LayerSpec& spec, const LayerParams& p,
                      const Tensor3& in, const std::string& name) {
  if (static_cast<int>(in.size()) != spec.in_dim) {
    shape_error(name, "expected " + std::to_string(spec.in_dim) +
                          " inputs, got " + std::to_string(in.size()));
  }
  Tensor3 out(1, 1, spec.out_dim);
  for (int o = 0; o < spec.out_dim; ++o) {
    const double* w = &p.weights[static_cast<std::size_t>(o) * spec.in_dim];
    double acc = p.bias[o];
    for (int i = 0; i < spec.in_dim; ++i) acc += w[i] * in.v[i];
    out.v[o] = acc;
  }
  return out;
}

void dense_backward(const LayerSpec& spec, const LayerParams& p,
                    const Tensor3& in, const Tensor3& grad_out,
                    Tensor3& grad_in, LayerParams& grad_p) {
  grad_in = Tensor3(in.c, in.h, in.w);
  for (int o = 0; o < spec.out_dim; ++o) {
    const double g = grad_out.v[o];
    if (g == 0.0) continue;
    grad_p.bias[o] += g;
    double* gw = &grad_p.weights[static_cast<std::size_t>(o) * spec.in_dim];
    const double* w = &p.weights[static_cast<std::size_t>(o) * spec.in_dim];
    for (int i = 0; i < spec.in_dim; ++i) {
      gw[i] += g * in.v[i];
      grad_in.v[i] += g * w[i];
    }
  }
}

Tensor3 pool_forward(const LayerSpec& spec, const Tensor3& in,
                     const std::string& name) {
  if (in.w < spec.pool_freq) {
    shape_error(name, "input width " + std::to_string(in.w) +
                          " smaller than pool width " +
                          std::to_string(spec.pool_freq));
  }
  Tensor3 out(in.c, in.h, in.w / spec.pool_freq);
  for (int ci = 0; ci < in.c; ++ci) {
    for (int y = 0; y < in.h; ++y) {
      for (int xo = 0; xo < out.w; ++xo) {
        double acc = 0.0;
        for (int k = 0; k < spec.pool_freq; ++k) {
          acc += in.at(ci, y, xo * spec.pool_freq + k);
        }
        out.at(ci, y, xo) = acc / spec.pool_freq;
      }
    }
  }
  return out;
}

void pool_backward(const LayerSpec& spec, const Tensor3& in,
                   const Tensor3& grad_out, Tensor3& grad_in) {
  grad_in = Tensor3(in.c, in.h, in.w);
  for (int ci = 0; ci < in.c; ++ci) {
    for (int y = 0; y < in.h; ++y) {
      for (int xo = 0; xo < grad_out.w; ++xo) {
        for (int k = 0; k < spec.pool_freq; ++k) {
          grad_in.at(ci, y, xo * spec.pool_freq + k) +=
              grad_out.at(ci, y, xo) / spec.pool_freq;
        }
      }
    }
  }
}

// noise == nullptr means inference: deterministic, no injection.
Tensor3 chain_forward(std::span<const LayerSpec> specs,
                      std::span<const LayerParams> params, Tensor3 in,
                      const std::string& chain_name,
                      std::vector<LayerCache>* caches, const NoiseConfig* noise,
                      Rng* rng) {
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const LayerSpec& spec = specs[i];
    const std::string name = chain_name + "[" + std::to_string(i) + "]";
    LayerCache* cache = nullptr;
    if (caches != nullptr) {
      caches->emplace_back();
      cache = &caches->back();
      cache->input = in;
    }
    Tensor3 out;
    switch (spec.kind) {
      case LayerKind::kConv:
        out = conv_forward(spec, params[i], in, name);
        break;
      case LayerKind::kDense:
        out = dense_forward(spec, params[i], in, name);
        break;
      case LayerKind::kElu:
        out = in;
        for (double& x : out.v) x = x > 0.0 ? x : std::expm1(x);
        if (noise != nullptr && noise->enabled()) {
          const double stddev = noise->multiplicative_stddev();
          std::vector<double> local_mult;
          std::vector<double>& mult =
              cache != nullptr ? cache->noise_mult : local_mult;
          mult.resize(out.size());
          for (std::size_t j = 0; j < out.size(); ++j) {
            mult[j] = stddev > 0.0 ? rng->normal(1.0, stddev) : 1.0;
            out.v[j] = out.v[j] * mult[j] + rng->normal(0.0, noise->additive_sigma);
          }
        }
        break;
      case LayerKind::kSigmoid:
        out = in;
        for (double& x : out.v) {
          x = std::clamp(1.0 / (1.0 + std::exp(-x)), 1e-300, kOneMinusUlp);
        }
        break;
      case LayerKind::kPool:
        out = pool_forward(spec, in, name);
        break;
    }
    in = std::move(out);
  }
  return in;
}

// grad holds dL/d(chain output) on entry, dL/d(chain input) on return.
// Parameter gradients accumulate into grad_params (shapes must match).
Tensor3 chain_backward(std::span<const LayerSpec> specs,
                       std::span<const LayerParams> params,
                       const std::vector<LayerCache>& caches, Tensor3 grad,
                       std::vector<LayerParams>& grad_params) {
  for (int i = static_cast<int>(specs.size()) - 1; i >= 0; --i) {
    const LayerSpec& spec = specs[i];
    const Tensor3& in = caches[i].input;
    Tensor3 grad_in;
    switch (spec.kind) {
      case LayerKind::kConv:
        conv_backward(spec, params[i], in, grad, grad_in, grad_params[i]);
        break;
      case LayerKind::kDense:
        dense_backward(spec, params[i], in, grad, grad_in, grad_params[i]);
        break;
      case LayerKind::kElu: {
        grad_in = Tensor3(in.c, in.h, in.w);
        const std::vector<double>& mult = caches[i].noise_mult;
        for (std::size_t j = 0; j < in.size(); ++j) {
          double g = grad.v[j];
          if (!mult.empty()) g *= mult[j];
          grad_in.v[j] = g * (in.v[j] > 0.0 ? 1.0 : std::exp(in.v[j]));
        }
        break;
      }
      case LayerKind::kSigmoid: {
        grad_in = Tensor3(in.c, in.h, in.w);
        for (std::size_t j = 0; j < in.size(); ++j) {
          const double p = 1.0 / (1.0 + std::exp(-in.v[j]));
          grad_in.v[j] = grad.v[j] * p * (1.0 - p);
        }
        break;
      }
      case LayerKind::kPool:
        pool_backward(spec, in, grad, grad_in);
        break;
    }
    grad = std::move(grad_in);
  }
  return grad;
}

Tensor3 window_to_tensor(const ContextWindow& window) {
  Tensor3 t(1, window.rows, window.cols);
  t.v = window.values;
  return t;
}

std::vector<LayerParams> zero_like(const std::vector<LayerSpec>& specs) {
  std::vector<LayerParams> out(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    out[i].weights.assign(specs[i].weight_count(), 0.0);
    out[i].bias.assign(specs[i].bias_count(), 0.0);
  }
  return out;
}

}  // namespace

std::size_t LayerSpec::weight_count() const {
  switch (kind) {
    case LayerKind::kConv:
      return static_cast<std::size_t>(out_channels) * in_channels *
             kernel_time * kernel_freq;
    case LayerKind::kDense:
      return static_cast<std::size_t>(in_dim) * out_dim;
    default:
      return 0;
  }
}

std::size_t LayerSpec::bias_count() const {
  switch (kind) {
    case LayerKind::kConv:
      return static_cast<std::size_t>(out_channels);
    case LayerKind::kDense:
      return static_cast<std::size_t>(out_dim);
    default:
      return 0;
  }
}

LayerSpec conv_spec(int out_channels, int in_channels, int kernel_time,
                    int kernel_freq) {
  if (out_channels < 1 || in_channels < 1 || kernel_time < 1 || kernel_freq < 1) {
    throw std::invalid_argument("conv extents and channel counts must be >= 1");
  }
  LayerSpec s;
  s.kind = LayerKind::kConv;
  s.out_channels = out_channels;
  s.in_channels = in_channels;
  s.kernel_time = kernel_time;
  s.kernel_freq = kernel_freq;
  return s;
}

LayerSpec dense_spec(int in_dim, int out_dim) {
  if (in_dim < 1 || out_dim < 1) {
    throw std::invalid_argument("dense dimensions must be >= 1");
  }
  LayerSpec s;
  s.kind = LayerKind::kDense;
  s.in_dim = in_dim;
  s.out_dim = out_dim;
  return s;
}

LayerSpec elu_spec() {
  LayerSpec s;
  s.kind = LayerKind::kElu;
  return s;
}

LayerSpec sigmoid_spec() {
  LayerSpec s;
  s.kind = LayerKind::kSigmoid;
  return s;
}

LayerSpec pool_spec(int pool_freq) {
  if (pool_freq < 1) throw std::invalid_argument("pool width must be >= 1");
  LayerSpec s;
  s.kind = LayerKind::kPool;
  s.pool_freq = pool_freq;
  return s;
}

Shape3 layer_output_shape(const LayerSpec& spec, const Shape3& in,
                          const std::string& layer_name) {
  switch (spec.kind) {
    case LayerKind::kConv:
      if (in.channels != spec.in_channels || in.time < spec.kernel_time ||
          in.freq < spec.kernel_freq) {
        shape_error(layer_name,
                    "conv cannot consume input " + std::to_string(in.channels) +
                        "x" + std::to_string(in.time) + "x" +
                        std::to_string(in.freq));
      }
      return {spec.out_channels, in.time - spec.kernel_time + 1,
              in.freq - spec.kernel_freq + 1};
    case LayerKind::kDense:
      if (static_cast<int>(in.size()) != spec.in_dim) {
        shape_error(layer_name, "dense expects " + std::to_string(spec.in_dim) +
                                    " inputs, got " + std::to_string(in.size()));
      }
      return {1, 1, spec.out_dim};
    case LayerKind::kPool:
      if (in.freq < spec.pool_freq) {
        shape_error(layer_name, "pool width exceeds input frequency axis");
      }
      return {in.channels, in.time, in.freq / spec.pool_freq};
    case LayerKind::kElu:
    case LayerKind::kSigmoid:
      return in;
  }
  throw std::logic_error("unreachable layer kind");
}

Shape3 chain_output_shape(std::span<const LayerSpec> chain, Shape3 in,
                          const std::string& chain_name) {
  for (std::size_t i = 0; i < chain.size(); ++i) {
    in = layer_output_shape(chain[i], in,
                            chain_name + "[" + std::to_string(i) + "]");
  }
  return in;
}

void NetworkParams::validate() const {
  auto check_chain = [](const std::vector<LayerSpec>& specs,
                        const std::vector<LayerParams>& p,
                        const std::string& name) {
    if (specs.size() != p.size()) {
      throw std::invalid_argument(name + ": parameter list length mismatch");
    }
    for (std::size_t i = 0; i < specs.size(); ++i) {
      if (p[i].weights.size() != specs[i].weight_count() ||
          p[i].bias.size() != specs[i].bias_count()) {
        shape_error(name + "[" + std::to_string(i) + "]",
                    "weight storage does not match the layer spec");
      }
    }
  };
  check_chain(trunk, trunk_params, "trunk");
  const Shape3 trunk_out = chain_output_shape(trunk, input_shape, "trunk");
  static const char* head_names[kNumStreams] = {"onset_head",
                                                "intermediate_head",
                                                "offset_head"};
  for (int h = 0; h < kNumStreams; ++h) {
    check_chain(heads[h], head_params[h], head_names[h]);
    if (heads[h].empty() || heads[h].back().kind != LayerKind::kSigmoid) {
      throw std::invalid_argument(std::string(head_names[h]) +
                                  " must end in a sigmoid layer");
    }
    const Shape3 out = chain_output_shape(heads[h], trunk_out, head_names[h]);
    if (out.size() != kNumKeys) {
      throw std::invalid_argument(std::string(head_names[h]) + " produces " +
                                  std::to_string(out.size()) +
                                  " outputs, expected 88");
    }
  }
}

std::size_t count_params(const NetworkParams& params) {
  std::size_t n = 0;
  for (const LayerSpec& s : params.trunk) n += s.weight_count() + s.bias_count();
  for (const auto& head : params.heads) {
    for (const LayerSpec& s : head) n += s.weight_count() + s.bias_count();
  }
  return n;
}

namespace {

void he_init(const std::vector<LayerSpec>& specs, std::vector<LayerParams>& out,
             Rng& rng) {
  out = zero_like(specs);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const LayerSpec& s = specs[i];
    if (!s.trainable()) continue;
    const double fan_in =
        s.kind == LayerKind::kConv
            ? static_cast<double>(s.in_channels) * s.kernel_time * s.kernel_freq
            : static_cast<double>(s.in_dim);
    const double stddev = std::sqrt(2.0 / fan_in);
    for (double& w : out[i].weights) w = rng.normal(0.0, stddev);
  }
}

}  // namespace

NetworkParams reference_architecture(std::uint64_t seed) {
  NetworkParams net;
  net.input_shape = {1, 11, 144};
  net.trunk = {conv_spec(16, 1, 3, 7), elu_spec(), conv_spec(16, 16, 3, 5),
               elu_spec(), pool_spec(3)};
  const Shape3 trunk_out = chain_output_shape(net.trunk, net.input_shape, "trunk");

  auto head = [&](int kernel_time, int kernel_freq) {
    std::vector<LayerSpec> chain = {conv_spec(8, trunk_out.channels, kernel_time,
                                              kernel_freq),
                                    elu_spec()};
    const Shape3 conv_out =
        chain_output_shape(chain, trunk_out, "head");
    chain.push_back(dense_spec(static_cast<int>(conv_out.size()), kNumKeys));
    chain.push_back(sigmoid_spec());
    return chain;
  };
  net.heads[kOnsetStream] = head(5, 3);
  net.heads[kIntermediateStream] = head(3, 7);
  net.heads[kOffsetStream] = head(5, 3);

  Rng rng(seed);
  he_init(net.trunk, net.trunk_params, rng);
  for (int h = 0; h < kNumStreams; ++h) {
    he_init(net.heads[h], net.head_params[h], rng);
  }
  net.validate();
  return net;
}

double NoiseConfig::multiplicative_stddev() const {
  return multiplicative_rate > 0.0
             ? std::sqrt(multiplicative_rate / (1.0 - multiplicative_rate))
             : 0.0;
}

void NoiseConfig::validate() const {
  if (multiplicative_rate < 0.0 || multiplicative_rate >= 1.0) {
    throw std::invalid_argument("multiplicative noise rate must lie in [0,1)");
  }
  if (additive_sigma < 0.0) {
    throw std::invalid_argument("additive noise scale must be nonnegative");
  }
}

std::vector<double> forward(const NetworkParams& params,
                            const ContextWindow& window) {
  if (window.rows != params.input_shape.time ||
      window.cols != params.input_shape.freq) {
    shape_error("input", "window " + std::to_string(window.rows) + "x" +
                             std::to_string(window.cols) +
                             " does not match network input " +
                             std::to_string(params.input_shape.time) + "x" +
                             std::to_string(params.input_shape.freq));
  }
  const Tensor3 trunk_out =
      chain_forward(params.trunk, params.trunk_params, window_to_tensor(window),
                    "trunk", nullptr, nullptr, nullptr);
  std::vector<double> out(static_cast<std::size_t>(kNumKeys) * kNumStreams);
  for (int h = 0; h < kNumStreams; ++h) {
    const Tensor3 probs = chain_forward(params.heads[h], params.head_params[h],
                                        trunk_out, "head", nullptr, nullptr,
                                        nullptr);
    for (int k = 0; k < kNumKeys; ++k) {
      out[static_cast<std::size_t>(k) * kNumStreams + h] = probs.v[k];
    }
  }
  return out;
}

namespace {

struct Gradients {
  std::vector<LayerParams> trunk;
  std::array<std::vector<LayerParams>, kNumStreams> heads;
};

Gradients zero_gradients(const NetworkParams& params) {
  Gradients g;
  g.trunk = zero_like(params.trunk);
  for (int h = 0; h < kNumStreams; ++h) g.heads[h] = zero_like(params.heads[h]);
  return g;
}

// Forward + BCE + backward for one example; adds into `grads` when non-null.
// Loss contributions and gradients are scaled by `scale` (1 / (batch * 264)).
double example_loss_and_grad(const NetworkParams& params,
                             const TrainExample& example, double scale,
                             const NoiseConfig* noise, Rng* rng,
                             Gradients* grads) {
  if (example.targets.size() != static_cast<std::size_t>(kNumKeys) * kNumStreams) {
    throw std::invalid_argument("train example targets must be 88 x 3");
  }
  std::vector<LayerCache> trunk_cache;
  const Tensor3 trunk_out = chain_forward(
      params.trunk, params.trunk_params, window_to_tensor(example.window),
      "trunk", grads != nullptr ? &trunk_cache : nullptr, noise, rng);

  double loss = 0.0;
  Tensor3 trunk_grad(trunk_out.c, trunk_out.h, trunk_out.w);
  for (int h = 0; h < kNumStreams; ++h) {
    std::vector<LayerCache> head_cache;
    const Tensor3 probs = chain_forward(
        params.heads[h], params.head_params[h], trunk_out, "head",
        grads != nullptr ? &head_cache : nullptr, noise, rng);
    Tensor3 grad_probs(probs.c, probs.h, probs.w);
    for (int k = 0; k < kNumKeys; ++k) {
      const double p = std::clamp(probs.v[k], kBceFloor, 1.0 - kBceFloor);
      const bool y = example.targets[static_cast<std::size_t>(k) * kNumStreams + h] != 0;
      loss -= y ? std::log(p) : std::log1p(-p);
      grad_probs.v[k] = scale * (y ? -1.0 / p : 1.0 / (1.0 - p));
    }
    if (grads != nullptr) {
      const Tensor3 g =
          chain_backward(params.heads[h], params.head_params[h], head_cache,
                         std::move(grad_probs), grads->heads[h]);
      for (std::size_t j = 0; j < trunk_grad.size(); ++j) trunk_grad.v[j] += g.v[j];
    }
  }
  if (grads != nullptr) {
    chain_backward(params.trunk, params.trunk_params, trunk_cache,
                   std::move(trunk_grad), grads->trunk);
  }
  return loss;
}

void sgd_update(std::vector<LayerParams>& params,
                const std::vector<LayerParams>& grads, double lr) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t j = 0; j < params[i].weights.size(); ++j) {
      params[i].weights[j] -= lr * grads[i].weights[j];
    }
    for (std::size_t j = 0; j < params[i].bias.size(); ++j) {
      params[i].bias[j] -= lr * grads[i].bias[j];
    }
  }
}

}  // namespace

double train_step(NetworkParams& params, std::span<const TrainExample> batch,
                  double learning_rate, const NoiseConfig& noise,
                  std::uint64_t rng_seed) {
  if (batch.empty()) throw std::invalid_argument("train_step needs a nonempty batch");
  noise.validate();
  Rng rng(rng_seed);
  Gradients grads = zero_gradients(params);
  const double scale =
      1.0 / (static_cast<double>(batch.size()) * kNumKeys * kNumStreams);
  double total_loss = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const double loss = example_loss_and_grad(
        params, batch[b], scale, noise.enabled() ? &noise : nullptr, &rng, &grads);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("non-finite loss at batch index " +
                               std::to_string(b));
    }
    total_loss += loss;
  }
  sgd_update(params.trunk_params, grads.trunk, learning_rate);
  for (int h = 0; h < kNumStreams; ++h) {
    sgd_update(params.head_params[h], grads.heads[h], learning_rate);
  }
  return total_loss * scale;
}

double evaluate_loss(const NetworkParams& params,
                     std::span<const TrainExample> batch) {
  if (batch.empty()) throw std::invalid_argument("evaluate_loss needs a nonempty batch");
  double total = 0.0;
  for (const TrainExample& example : batch) {
    total += example_loss_and_grad(params, example, 0.0, nullptr, nullptr, nullptr);
  }
  return total /
         (static_cast<double>(batch.size()) * kNumKeys * kNumStreams);
}

double gradient_check(const NetworkParams& params,
                      std::span<const TrainExample> batch, double epsilon,
                      int samples_per_layer, std::uint64_t seed) {
  if (samples_per_layer <= 0) {
    throw std::invalid_argument("gradient check needs a positive sample count");
  }
  if (batch.empty()) throw std::invalid_argument("gradient check needs a batch");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");

  Gradients grads = zero_gradients(params);
  const double scale =
      1.0 / (static_cast<double>(batch.size()) * kNumKeys * kNumStreams);
  for (const TrainExample& example : batch) {
    example_loss_and_grad(params, example, scale, nullptr, nullptr, &grads);
  }

  NetworkParams probe = params;
  Rng rng(seed);
  double worst = 0.0;

  auto check_layer = [&](std::vector<LayerParams>& mutable_chain,
                         const std::vector<LayerParams>& grad_chain,
                         std::size_t layer) {
    LayerParams& p = mutable_chain[layer];
    const LayerParams& g = grad_chain[layer];
    const std::size_t total = p.weights.size() + p.bias.size();
    if (total == 0) return;

    std::vector<std::size_t> indices;
    if (total <= static_cast<std::size_t>(samples_per_layer)) {
      indices.resize(total);
      for (std::size_t i = 0; i < total; ++i) indices[i] = i;
    } else {
      std::unordered_set<std::size_t> seen;
      while (seen.size() < static_cast<std::size_t>(samples_per_layer)) {
        seen.insert(static_cast<std::size_t>(rng.uniform_int(total)));
      }
      indices.assign(seen.begin(), seen.end());
      std::sort(indices.begin(), indices.end());
    }

    for (std::size_t idx : indices) {
      double* slot = idx < p.weights.size() ? &p.weights[idx]
                                            : &p.bias[idx - p.weights.size()];
      const double analytic = idx < g.weights.size()
                                  ? g.weights[idx]
                                  : g.bias[idx - g.weights.size()];
      const double saved = *slot;
      *slot = saved + epsilon;
      const double up = evaluate_loss(probe, batch);
      *slot = saved - epsilon;
      const double down = evaluate_loss(probe, batch);
      *slot = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      worst = std::max(worst, rel);
    }
  };

  for (std::size_t i = 0; i < probe.trunk.size(); ++i) {
    if (probe.trunk[i].trainable()) check_layer(probe.trunk_params, grads.trunk, i);
  }
  for (int h = 0; h < kNumStreams; ++h) {
    for (std::size_t i = 0; i < probe.heads[h].size(); ++i) {
      if (probe.heads[h][i].trainable()) {
        check_layer(probe.head_params[h], grads.heads[h], i);
      }
    }
  }
  return worst;
}

ActivationMatrix infer_piece(const NetworkParams& params,
                             const FilteredSpectrogram& spec, int threads) {
  if (spec.bins != params.input_shape.freq) {
    shape_error("input", "spectrogram has " + std::to_string(spec.bins) +
                             " bins, network expects " +
                             std::to_string(params.input_shape.freq));
  }
  ActivationMatrix acts(spec.frames, spec.frame_rate);
  parallel_for(spec.frames, threads, [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      const std::vector<double> out =
          forward(params, context_window(spec, t, params.input_shape.time));
      for (std::size_t j = 0; j < out.size(); ++j) {
        acts.values[static_cast<std::size_t>(t) * out.size() + j] =
            std::clamp(static_cast<float>(out[j]), 0.0f, 1.0f);
      }
    }
  });
  return acts;
}

namespace {

nlohmann::json spec_to_json(const LayerSpec& s) {
  switch (s.kind) {
    case LayerKind::kConv:
      return {{"kind", "conv"},
              {"out_channels", s.out_channels},
              {"in_channels", s.in_channels},
              {"kernel_time", s.kernel_time},
              {"kernel_freq", s.kernel_freq}};
    case LayerKind::kDense:
      return {{"kind", "dense"}, {"in_dim", s.in_dim}, {"out_dim", s.out_dim}};
    case LayerKind::kElu:
      return {{"kind", "elu"}};
    case LayerKind::kSigmoid:
      return {{"kind", "sigmoid"}};
    case LayerKind::kPool:
      return {{"kind", "pool"}, {"pool_freq", s.pool_freq}};
  }
  throw std::logic_error("unreachable layer kind");
}

LayerSpec spec_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "conv") {
    return conv_spec(j.at("out_channels"), j.at("in_channels"),
                     j.at("kernel_time"), j.at("kernel_freq"));
  }
  if (kind == "dense") return dense_spec(j.at("in_dim"), j.at("out_dim"));
  if (kind == "elu") return elu_spec();
  if (kind == "sigmoid") return sigmoid_spec();
  if (kind == "pool") return pool_spec(j.at("pool_freq"));
  throw std::invalid_argument("unknown layer kind in weight manifest: " + kind);
}

constexpr char kWeightsMagic[4] = {'A', 'D', 'S', 'R'};

void append_payload(std::string& out, const std::vector<LayerParams>& params) {
  for (const LayerParams& p : params) {
    out.append(reinterpret_cast<const char*>(p.weights.data()),
               p.weights.size() * sizeof(double));
    out.append(reinterpret_cast<const char*>(p.bias.data()),
               p.bias.size() * sizeof(double));
  }
}

}  // namespace

void save_weights(const NetworkParams& params, const std::string& path) {
  params.validate();
  nlohmann::json manifest;
  manifest["file_kind"] = "weights";
  manifest["input_shape"] = {params.input_shape.channels,
                             params.input_shape.time, params.input_shape.freq};
  manifest["trunk"] = nlohmann::json::array();
  for (const LayerSpec& s : params.trunk) manifest["trunk"].push_back(spec_to_json(s));
  manifest["heads"] = nlohmann::json::array();
  for (const auto& head : params.heads) {
    nlohmann::json chain = nlohmann::json::array();
    for (const LayerSpec& s : head) chain.push_back(spec_to_json(s));
    manifest["heads"].push_back(chain);
  }
  const std::string manifest_text = manifest.dump();

  std::string out;
  out.append(kWeightsMagic, 4);
  auto put_u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  auto put_u64 = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  put_u32(1);          // format version
  put_u32(2);          // dtype tag: f64
  put_u64(manifest_text.size());
  out.append(manifest_text);
  append_payload(out, params.trunk_params);
  for (const auto& head : params.head_params) append_payload(out, head);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("write failed for " + path);
}

NetworkParams load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  auto need = [&](std::size_t n, const char* what) {
    if (pos + n > bytes.size()) {
      throw std::runtime_error(path + ": truncated " + what +
                               " at byte offset " + std::to_string(pos));
    }
  };
  need(4, "magic");
  if (std::memcmp(bytes.data(), kWeightsMagic, 4) != 0) {
    throw std::runtime_error(path + ": bad magic at byte offset 0");
  }
  pos = 4;
  auto get_u32 = [&](const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i]))
           << (8 * i);
    }
    pos += 4;
    return v;
  };
  auto get_u64 = [&](const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i]))
           << (8 * i);
    }
    pos += 8;
    return v;
  };
  const std::uint32_t version = get_u32("version");
  if (version != 1) {
    throw std::runtime_error(path + ": unsupported weight file version " +
                             std::to_string(version));
  }
  const std::uint32_t dtype = get_u32("dtype");
  if (dtype != 2) {
    throw std::runtime_error(path + ": weight payload must be f64");
  }
  const std::uint64_t manifest_len = get_u64("manifest length");
  need(manifest_len, "manifest");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.substr(pos, manifest_len));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": bad weight manifest: " + e.what());
  }
  pos += manifest_len;

  NetworkParams params;
  const auto& shape = manifest.at("input_shape");
  params.input_shape = {shape.at(0), shape.at(1), shape.at(2)};
  for (const auto& j : manifest.at("trunk")) params.trunk.push_back(spec_from_json(j));
  const auto& heads = manifest.at("heads");
  if (heads.size() != kNumStreams) {
    throw std::runtime_error(path + ": weight manifest must declare 3 heads");
  }
  for (int h = 0; h < kNumStreams; ++h) {
    for (const auto& j : heads[h]) params.heads[h].push_back(spec_from_json(j));
  }

  auto read_payload = [&](const std::vector<LayerSpec>& specs,
                          std::vector<LayerParams>& out) {
    out.resize(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
      out[i].weights.resize(specs[i].weight_count());
      out[i].bias.resize(specs[i].bias_count());
      need(out[i].weights.size() * sizeof(double), "weight payload");
      std::memcpy(out[i].weights.data(), bytes.data() + pos,
                  out[i].weights.size() * sizeof(double));
      pos += out[i].weights.size() * sizeof(double);
      need(out[i].bias.size() * sizeof(double), "bias payload");
      std::memcpy(out[i].bias.data(), bytes.data() + pos,
                  out[i].bias.size() * sizeof(double));
      pos += out[i].bias.size() * sizeof(double);
    }
  };
  read_payload(params.trunk, params.trunk_params);
  for (int h = 0; h < kNumStreams; ++h) {
    read_payload(params.heads[h], params.head_params[h]);
  }
  if (pos != bytes.size()) {
    throw std::runtime_error(path + ": trailing bytes at offset " +
                             std::to_string(pos));
  }
  params.validate();
  return params;
}

}  // namespace adsrnote
