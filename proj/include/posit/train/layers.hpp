#pragma once

#include <cstddef>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "posit/tensor.hpp"

namespace posit::train {

enum class LayerClass { Conv, BN, Dense, Other };
enum class TensorClass { Weight, Activation, WeightGradient, Error };

std::string_view to_string(LayerClass c);
std::string_view to_string(TensorClass c);

enum class Mode {
  Train,      // batch statistics, running statistics updated, caches kept
  Eval,       // running statistics
  Calibrate,  // batch statistics without touching running statistics
};

/// A trainable tensor. `compute` is the copy the layer arithmetic reads; it is
/// `value` itself or its quantized image, refreshed before every forward pass.
struct Param {
  std::string name;
  TensorF value;
  TensorF compute;
  TensorF grad;
  TensorF velocity;

  Param(std::string n, TensorF v)
      : name(std::move(n)), value(v), compute(v), grad(v.dims), velocity(v.dims) {}
};

class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;

  const std::string& name() const noexcept { return name_; }
  virtual std::string_view kind() const = 0;
  virtual LayerClass layer_class() const = 0;

  virtual std::vector<std::size_t> output_dims(const std::vector<std::size_t>& input) const = 0;

  virtual TensorF forward(const TensorF& x, Mode mode) = 0;
  /// Gradient w.r.t. the input of the last Train-mode forward; writes each
  /// Param::grad. Throws std::logic_error without a cached forward.
  virtual TensorF backward(const TensorF& grad_out) = 0;

  virtual std::span<Param> params() { return {}; }
  /// Non-trainable state saved with checkpoints.
  virtual std::vector<std::pair<std::string, TensorF*>> buffers() { return {}; }

  virtual std::unique_ptr<Layer> clone() const = 0;

 protected:
  static void require(bool cached, const std::string& layer);

 private:
  std::string name_;
};

struct Conv2dOptions {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t padding = 0;
};

class Conv2d final : public Layer {
 public:
  Conv2d(std::string name, const Conv2dOptions& opt);

  std::string_view kind() const override { return "conv2d"; }
  LayerClass layer_class() const override { return LayerClass::Conv; }
  std::vector<std::size_t> output_dims(const std::vector<std::size_t>& input) const override;
  TensorF forward(const TensorF& x, Mode mode) override;
  TensorF backward(const TensorF& grad_out) override;
  std::span<Param> params() override { return params_; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2d>(*this); }

  const Conv2dOptions& options() const noexcept { return opt_; }
  std::size_t fan_in() const noexcept { return opt_.in_channels * opt_.kernel * opt_.kernel; }

 private:
  Conv2dOptions opt_;
  std::vector<Param> params_;  // weight [OC, IC, K, K], bias [OC]
  std::vector<std::size_t> in_dims_;
  std::vector<double> cols_;  // im2col per sample: [N][IC*K*K][OH*OW]
  bool cached_ = false;
};

class Dense final : public Layer {
 public:
  Dense(std::string name, std::size_t in, std::size_t out);

  std::string_view kind() const override { return "dense"; }
  LayerClass layer_class() const override { return LayerClass::Dense; }
  std::vector<std::size_t> output_dims(const std::vector<std::size_t>& input) const override;
  TensorF forward(const TensorF& x, Mode mode) override;
  TensorF backward(const TensorF& grad_out) override;
  std::span<Param> params() override { return params_; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }

  std::size_t fan_in() const noexcept { return in_; }

 private:
  std::size_t in_;
  std::size_t out_;
  std::vector<Param> params_;  // weight [out, in], bias [out]
  TensorF input_;
  bool cached_ = false;
};

/// Batch normalization over dim 1 of [N, C] or [N, C, H, W] inputs.
class BatchNorm final : public Layer {
 public:
  BatchNorm(std::string name, std::size_t channels, double eps = 1e-5, double momentum = 0.1);

  std::string_view kind() const override { return "batchnorm"; }
  LayerClass layer_class() const override { return LayerClass::BN; }
  std::vector<std::size_t> output_dims(const std::vector<std::size_t>& input) const override { return input; }
  TensorF forward(const TensorF& x, Mode mode) override;
  TensorF backward(const TensorF& grad_out) override;
  std::span<Param> params() override { return params_; }
  std::vector<std::pair<std::string, TensorF*>> buffers() override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<BatchNorm>(*this); }

 private:
  std::size_t channels_;
  double eps_;
  double momentum_;
  std::vector<Param> params_;  // gamma [C], beta [C]
  TensorF running_mean_;
  TensorF running_var_;
  TensorF xhat_;
  std::vector<double> inv_std_;
  bool cached_ = false;
};

class ReLU final : public Layer {
 public:
  using Layer::Layer;
  std::string_view kind() const override { return "relu"; }
  LayerClass layer_class() const override { return LayerClass::Other; }
  std::vector<std::size_t> output_dims(const std::vector<std::size_t>& input) const override { return input; }
  TensorF forward(const TensorF& x, Mode mode) override;
  TensorF backward(const TensorF& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<ReLU>(*this); }

 private:
  std::vector<bool> positive_;
  bool cached_ = false;
};

/// [N, ...] -> [N, prod(...)]
class Flatten final : public Layer {
 public:
  using Layer::Layer;
  std::string_view kind() const override { return "flatten"; }
  LayerClass layer_class() const override { return LayerClass::Other; }
  std::vector<std::size_t> output_dims(const std::vector<std::size_t>& input) const override;
  TensorF forward(const TensorF& x, Mode mode) override;
  TensorF backward(const TensorF& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Flatten>(*this); }

 private:
  std::vector<std::size_t> in_dims_;
  bool cached_ = false;
};

/// He-normal weights (std = sqrt(2 / fan_in)) and zero biases for conv and
/// dense layers; BN keeps gamma = 1, beta = 0.
void he_normal_init(Layer& layer, std::mt19937_64& rng);

struct LossResult {
  double loss = 0.0;  // mean over the batch
  TensorF grad;       // d loss / d logits
};

LossResult softmax_cross_entropy(const TensorF& logits, std::span<const int> labels);

/// Index of the largest logit per row; ties go to the lowest index.
std::vector<int> argmax_rows(const TensorF& logits);

}  // namespace posit::train
