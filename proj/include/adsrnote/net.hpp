#ifndef ADSRNOTE_NET_HPP
#define ADSRNOTE_NET_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adsrnote/activation.hpp"
#include "adsrnote/features.hpp"

namespace adsrnote {

enum class LayerKind : int { kConv = 0, kDense, kElu, kSigmoid, kPool };

// One layer of the chain. conv: valid cross-correlation, stride 1, kernel
// kernel_time x kernel_freq, out_channels maps. dense: flattens its input
// (channel-major) to in_dim and maps to out_dim. pool: frequency average
// pooling of width pool_freq, stride pool_freq, remainder columns dropped.
struct LayerSpec {
  LayerKind kind = LayerKind::kElu;
  int out_channels = 0;
  int in_channels = 0;
  int kernel_time = 0;
  int kernel_freq = 0;
  int in_dim = 0;
  int out_dim = 0;
  int pool_freq = 1;

  bool trainable() const {
    return kind == LayerKind::kConv || kind == LayerKind::kDense;
  }
  std::size_t weight_count() const;
  std::size_t bias_count() const;
};

LayerSpec conv_spec(int out_channels, int in_channels, int kernel_time,
                    int kernel_freq);
LayerSpec dense_spec(int in_dim, int out_dim);
LayerSpec elu_spec();
LayerSpec sigmoid_spec();
LayerSpec pool_spec(int pool_freq);

struct Shape3 {
  int channels = 0;
  int time = 0;
  int freq = 0;
  std::size_t size() const {
    return static_cast<std::size_t>(channels) * time * freq;
  }
  bool operator==(const Shape3&) const = default;
};

// Static shape propagation; throws std::invalid_argument naming the
// offending layer on any mismatch.
Shape3 layer_output_shape(const LayerSpec& spec, const Shape3& in,
                          const std::string& layer_name);
Shape3 chain_output_shape(std::span<const LayerSpec> chain, Shape3 in,
                          const std::string& chain_name);

struct LayerParams {
  std::vector<double> weights;
  std::vector<double> bias;
};

// Shared trunk plus three head branches (onset, intermediate, offset, in
// Stream order), each ending in 88 sigmoid units. Parameter vectors are
// aligned with the LayerSpec lists; non-trainable layers hold empty entries.
struct NetworkParams {
  Shape3 input_shape;
  std::vector<LayerSpec> trunk;
  std::array<std::vector<LayerSpec>, kNumStreams> heads;
  std::vector<LayerParams> trunk_params;
  std::array<std::vector<LayerParams>, kNumStreams> head_params;

  // Throws if the chains or parameter vectors are inconsistent.
  void validate() const;
};

std::size_t count_params(const NetworkParams& params);

// The reference architecture (input 1 x 11 x 144, 322 192 parameters):
//   trunk:  conv 16x3x7 -> ELU -> conv 16x3x5 -> ELU -> 1x3 freq avg pool
//   onset / offset heads:  conv 8x5x3 -> ELU -> dense -> 88 sigmoid
//   intermediate head:     conv 8x3x7 -> ELU -> dense -> 88 sigmoid
// Time-elongated head kernels emphasize loudness variations for the event
// streams; the frequency-elongated intermediate kernel emphasizes overtone
// structure. Weights are He-normal initialized from `seed`, biases zero.
NetworkParams reference_architecture(std::uint64_t seed);

// Training-time noise, injected after every hidden ELU: multiplication by
// N(1, sqrt(p_m / (1 - p_m))), then addition of N(0, p_a). Never applied at
// inference and never after the output sigmoids.
struct NoiseConfig {
  double multiplicative_rate = 0.0;  // p_m in [0, 1)
  double additive_sigma = 0.0;       // p_a >= 0

  bool enabled() const {
    return multiplicative_rate > 0.0 || additive_sigma > 0.0;
  }
  // Standard deviation of the multiplicative noise.
  double multiplicative_stddev() const;
  void validate() const;
};

// Deterministic forward pass (no noise). Returns 88 x 3 pseudo
// probabilities, key-major with the stream axis last, each strictly in
// (0, 1). Throws on window/input-shape mismatch.
std::vector<double> forward(const NetworkParams& params,
                            const ContextWindow& window);

struct TrainExample {
  ContextWindow window;
  std::vector<std::uint8_t> targets;  // 88 * 3, values 0/1
};

// One SGD step on the mean binary cross-entropy over all 3x88 outputs of
// the batch, with noise as configured. Returns the (noisy) batch loss.
// Throws std::invalid_argument on an empty batch and std::runtime_error
// (naming the batch index) if the loss turns non-finite.
double train_step(NetworkParams& params, std::span<const TrainExample> batch,
                  double learning_rate, const NoiseConfig& noise,
                  std::uint64_t rng_seed);

// Noise-free batch loss, no update.
double evaluate_loss(const NetworkParams& params,
                     std::span<const TrainExample> batch);

// Compares analytic gradients against central finite differences
// (f(p+eps) - f(p-eps)) / 2eps on min(samples_per_layer, layer size)
// parameters of every trainable layer; returns the worst relative error.
// samples_per_layer must be positive.
double gradient_check(const NetworkParams& params,
                      std::span<const TrainExample> batch, double epsilon,
                      int samples_per_layer = 100, std::uint64_t seed = 1);

// Versioned binary weight container; load(save(p)) is bit-exact.
void save_weights(const NetworkParams& params, const std::string& path);
NetworkParams load_weights(const std::string& path);

// forward() over every frame's context window. Frames are independent and
// processed in parallel when threads > 1; the result does not depend on the
// thread count.
ActivationMatrix infer_piece(const NetworkParams& params,
                             const FilteredSpectrogram& spec, int threads = 1);

}  // namespace adsrnote

#endif  // ADSRNOTE_NET_HPP
