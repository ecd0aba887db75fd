#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "posit/quantizer.hpp"
#include "posit/train/checkpoint.hpp"
#include "posit/train/idx.hpp"
#include "posit/train/layers.hpp"

namespace posit::train {

/// QuantSpec per (layer class, tensor class).
class QuantMap {
 public:
  /// Every site passthrough.
  QuantMap();

  const QuantSpec& at(LayerClass layer, TensorClass tensor) const;
  QuantSpec& at(LayerClass layer, TensorClass tensor);

  /// Sets Weight and Activation to posit(n, forward_es) and WeightGradient and
  /// Error to posit(n, backward_es) for one layer class.
  void set_layer(LayerClass layer, const QuantSpec& forward, const QuantSpec& backward);

  /// n-bit posits on Conv, BN and Dense layers with es = 1 for weights and
  /// activations and es = 2 for weight gradients and errors; Other layers
  /// stay passthrough.
  static QuantMap policy(int n, bool scaling = true, int sigma = kDefaultSigma);
  static QuantMap passthrough() { return QuantMap(); }

  bool all_passthrough() const;

  friend bool operator==(const QuantMap&, const QuantMap&) = default;

 private:
  std::array<std::array<QuantSpec, 4>, 4> specs_;
};

/// Weight and activation scale factors of one layer; empty when not measured.
struct LayerScale {
  std::optional<ScaleFactor> weight;
  std::optional<ScaleFactor> activation;
  friend bool operator==(const LayerScale&, const LayerScale&) = default;
};

/// Indexed like Network::layers(). An empty table means "measure on the fly".
using ScaleTable = std::vector<LayerScale>;

class NonFiniteWeightError : public std::runtime_error {
 public:
  NonFiniteWeightError(const std::string& layer, std::uint64_t step);
  const std::string& layer() const noexcept { return layer_; }
  std::uint64_t step() const noexcept { return step_; }

 private:
  std::string layer_;
  std::uint64_t step_;
};

class Network {
 public:
  /// sample_dims excludes the batch dimension, e.g. {1, 28, 28}.
  explicit Network(std::vector<std::size_t> sample_dims);
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;
  ~Network() = default;

  /// Appends a layer; throws std::invalid_argument when it does not accept
  /// the current output shape.
  void add(std::unique_ptr<Layer> layer);

  std::size_t size() const noexcept { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

  const std::vector<std::size_t>& sample_dims() const noexcept { return sample_dims_; }
  /// Output dims of the last layer for a batch of one, without the batch dim.
  std::vector<std::size_t> output_sample_dims() const;

  /// Parameters and buffers as "<layer>.<tensor>" in layer order.
  std::vector<NamedTensor> state();
  /// Loads tensors produced by state(); names and dims must match exactly.
  void load_state(std::span<const NamedTensor> tensors);

 private:
  std::vector<std::size_t> sample_dims_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Runs every layer in order. Before a Conv/BN/Dense layer its parameters are
/// replaced by their Weight-spec images and its input by the Activation-spec
/// image (scale factors from `scales`, or measured on the tensor itself when
/// the table has none). Logits are returned unquantized.
TensorF forward(Network& net, const TensorF& batch, const QuantMap& map, const ScaleTable& scales, Mode mode);

struct BackwardResult {
  std::vector<TensorF> errors;  // per layer: the quantized error fed to its backward
  TensorF input_grad;
};

/// Propagates the loss gradient from the last layer down. Each incoming error
/// is quantized with the layer's Error spec and each parameter gradient with
/// its WeightGradient spec, both using per-batch scale factors.
BackwardResult backward(Network& net, const TensorF& loss_grad, const QuantMap& map);

struct UpdateOptions {
  double learning_rate = 0.01;
  double momentum = 0.0;
  bool master_weights = false;  // keep wide weights and quantize only for compute
};

/// v <- momentum * v + grad; W <- P(W - lr * v) with the Weight spec.
/// Throws NonFiniteWeightError naming the layer when a weight is not finite.
void update_weights(Network& net, const QuantMap& map, const ScaleTable& scales, const UpdateOptions& opt,
                    std::uint64_t step = 0);

/// Weight scale factor over all parameters of each layer, activation scale
/// factor over the layer input on a passthrough calibration forward.
ScaleTable compute_layer_scale_factors(Network& net, const TensorF& calibration, const QuantMap& map);

/// Top-1 accuracy over the dataset with Weight/Activation quantization only.
/// Throws std::invalid_argument on an empty dataset.
double evaluate(Network& net, const Dataset& data, const QuantMap& map, const ScaleTable& scales,
                std::size_t batch_size = 256);

/// Rows [first, first + count) of a [N, ...] tensor.
TensorF slice_batch(const TensorF& x, std::size_t first, std::size_t count);
TensorF gather_batch(const TensorF& x, std::span<const std::size_t> rows);

/// Scale table entries as checkpoint tensors "<layer>.sf_weight" / ".sf_activation"
/// holding {center, sigma, degenerate}.
std::vector<NamedTensor> scale_table_tensors(const Network& net, const ScaleTable& scales);
ScaleTable scale_table_from_tensors(const Network& net, std::span<const NamedTensor> tensors);

}  // namespace posit::train
