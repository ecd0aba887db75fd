#include "posit/train/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace posit::train {

namespace {

std::size_t index(LayerClass c) { return static_cast<std::size_t>(c); }
std::size_t index(TensorClass c) { return static_cast<std::size_t>(c); }

bool quantized_class(LayerClass c) { return c != LayerClass::Other; }

ScaleFactor measure_params(Layer& layer, int sigma) {
  std::vector<double> all;
  for (const Param& p : layer.params()) {
    all.insert(all.end(), p.value.data.begin(), p.value.data.end());
  }
  return scale_factor(all, sigma);
}

std::optional<ScaleFactor> weight_scale(Layer& layer, const QuantSpec& spec, const ScaleTable& scales,
                                        std::size_t i) {
  if (!spec.scaling_enabled) return std::nullopt;
  if (i < scales.size() && scales[i].weight) return scales[i].weight;
  return measure_params(layer, spec.sigma);
}

std::optional<ScaleFactor> tensor_scale(const TensorF& x, const QuantSpec& spec) {
  if (!spec.scaling_enabled) return std::nullopt;
  return scale_factor(x, spec.sigma);
}

void check_table(const Network& net, const ScaleTable& scales) {
  if (!scales.empty() && scales.size() != net.size()) {
    throw std::invalid_argument("scale table has " + std::to_string(scales.size()) + " entries for " +
                                std::to_string(net.size()) + " layers");
  }
}

}  // namespace

// ---------------------------------------------------------------- QuantMap

QuantMap::QuantMap() {
  for (auto& row : specs_) row.fill(QuantSpec::identity());
}

const QuantSpec& QuantMap::at(LayerClass layer, TensorClass tensor) const {
  return specs_[index(layer)][index(tensor)];
}

QuantSpec& QuantMap::at(LayerClass layer, TensorClass tensor) { return specs_[index(layer)][index(tensor)]; }

void QuantMap::set_layer(LayerClass layer, const QuantSpec& forward, const QuantSpec& backward) {
  at(layer, TensorClass::Weight) = forward;
  at(layer, TensorClass::Activation) = forward;
  at(layer, TensorClass::WeightGradient) = backward;
  at(layer, TensorClass::Error) = backward;
}

QuantMap QuantMap::policy(int n, bool scaling, int sigma) {
  QuantMap m;
  const QuantSpec fwd = QuantSpec::posit(n, 1, scaling, sigma);
  const QuantSpec bwd = QuantSpec::posit(n, 2, scaling, sigma);
  for (LayerClass c : {LayerClass::Conv, LayerClass::BN, LayerClass::Dense}) m.set_layer(c, fwd, bwd);
  return m;
}

bool QuantMap::all_passthrough() const {
  return std::all_of(specs_.begin(), specs_.end(), [](const auto& row) {
    return std::all_of(row.begin(), row.end(), [](const QuantSpec& s) { return s.passthrough; });
  });
}

NonFiniteWeightError::NonFiniteWeightError(const std::string& layer, std::uint64_t step)
    : std::runtime_error("non-finite weight in layer '" + layer + "' after step " + std::to_string(step)),
      layer_(layer),
      step_(step) {}

// ---------------------------------------------------------------- Network

Network::Network(std::vector<std::size_t> sample_dims) : sample_dims_(std::move(sample_dims)) {
  if (sample_dims_.empty() || TensorF::element_count(sample_dims_) == 0) {
    throw std::invalid_argument("network input needs nonzero dims, got " + format_dims(sample_dims_));
  }
}

Network::Network(const Network& other) : sample_dims_(other.sample_dims_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    Network copy(other);
    *this = std::move(copy);
  }
  return *this;
}

std::vector<std::size_t> Network::output_sample_dims() const {
  std::vector<std::size_t> dims{1};
  dims.insert(dims.end(), sample_dims_.begin(), sample_dims_.end());
  for (const auto& l : layers_) dims = l->output_dims(dims);
  return {dims.begin() + 1, dims.end()};
}

void Network::add(std::unique_ptr<Layer> layer) {
  std::vector<std::size_t> dims{1};
  const auto current = output_sample_dims();
  dims.insert(dims.end(), current.begin(), current.end());
  (void)layer->output_dims(dims);
  for (const auto& l : layers_) {
    if (l->name() == layer->name()) {
      throw std::invalid_argument("duplicate layer name '" + layer->name() + "'");
    }
  }
  layers_.push_back(std::move(layer));
}

std::vector<NamedTensor> Network::state() {
  std::vector<NamedTensor> out;
  for (auto& l : layers_) {
    for (const Param& p : l->params()) out.push_back({l->name() + "." + p.name, p.value});
    for (const auto& [name, t] : l->buffers()) out.push_back({l->name() + "." + name, *t});
  }
  return out;
}

void Network::load_state(std::span<const NamedTensor> tensors) {
  std::map<std::string, const TensorF*> by_name;
  for (const NamedTensor& t : tensors) by_name[t.name] = &t.tensor;
  auto fetch = [&](const std::string& name, const std::vector<std::size_t>& dims) -> const TensorF& {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw std::invalid_argument("checkpoint lacks tensor '" + name + "'");
    if (it->second->dims != dims) {
      throw std::invalid_argument("checkpoint tensor '" + name + "' has dims " + format_dims(it->second->dims) +
                                  ", model expects " + format_dims(dims));
    }
    return *it->second;
  };
  for (auto& l : layers_) {
    for (Param& p : l->params()) {
      p.value = fetch(l->name() + "." + p.name, p.value.dims);
      p.compute = p.value;
      std::fill(p.velocity.data.begin(), p.velocity.data.end(), 0.0);
    }
    for (auto& [name, t] : l->buffers()) *t = fetch(l->name() + "." + name, t->dims);
  }
}

// ---------------------------------------------------------------- passes

TensorF forward(Network& net, const TensorF& batch, const QuantMap& map, const ScaleTable& scales, Mode mode) {
  check_table(net, scales);
  if (batch.rank() != net.sample_dims().size() + 1 ||
      !std::equal(net.sample_dims().begin(), net.sample_dims().end(), batch.dims.begin() + 1)) {
    throw std::invalid_argument("batch dims " + format_dims(batch.dims) + " do not match network input [N," +
                                format_dims(net.sample_dims()).substr(1));
  }
  TensorF x = batch;
  for (std::size_t i = 0; i < net.size(); ++i) {
    Layer& layer = net.layer(i);
    const LayerClass cls = layer.layer_class();
    if (quantized_class(cls)) {
      const QuantSpec& ws = map.at(cls, TensorClass::Weight);
      if (ws.passthrough) {
        for (Param& p : layer.params()) p.compute = p.value;
      } else {
        const auto sf = weight_scale(layer, ws, scales, i);
        for (Param& p : layer.params()) p.compute = quantize_tensor(p.value, ws, sf);
      }
      const QuantSpec& as = map.at(cls, TensorClass::Activation);
      if (!as.passthrough) {
        std::optional<ScaleFactor> sf;
        if (as.scaling_enabled) {
          sf = i < scales.size() && scales[i].activation ? scales[i].activation : tensor_scale(x, as);
        }
        quantize_in_place(x.data, as, sf);
      }
    }
    x = layer.forward(x, mode);
  }
  return x;
}

BackwardResult backward(Network& net, const TensorF& loss_grad, const QuantMap& map) {
  BackwardResult r;
  r.errors.resize(net.size());
  TensorF g = loss_grad;
  for (std::size_t i = net.size(); i-- > 0;) {
    Layer& layer = net.layer(i);
    const LayerClass cls = layer.layer_class();
    if (quantized_class(cls)) {
      const QuantSpec& es = map.at(cls, TensorClass::Error);
      if (!es.passthrough) quantize_in_place(g.data, es, tensor_scale(g, es));
    }
    r.errors[i] = g;
    g = layer.backward(g);
    if (quantized_class(cls)) {
      const QuantSpec& gs = map.at(cls, TensorClass::WeightGradient);
      if (!gs.passthrough) {
        for (Param& p : layer.params()) quantize_in_place(p.grad.data, gs, tensor_scale(p.grad, gs));
      }
    }
  }
  r.input_grad = std::move(g);
  return r;
}

void update_weights(Network& net, const QuantMap& map, const ScaleTable& scales, const UpdateOptions& opt,
                    std::uint64_t step) {
  check_table(net, scales);
  for (std::size_t i = 0; i < net.size(); ++i) {
    Layer& layer = net.layer(i);
    auto params = layer.params();
    if (params.empty()) continue;
    for (Param& p : params) {
      for (std::size_t j = 0; j < p.value.size(); ++j) {
        p.velocity.data[j] = opt.momentum * p.velocity.data[j] + p.grad.data[j];
        p.value.data[j] -= opt.learning_rate * p.velocity.data[j];
      }
    }
    const QuantSpec& ws = map.at(layer.layer_class(), TensorClass::Weight);
    if (!opt.master_weights && !ws.passthrough) {
      const auto sf = weight_scale(layer, ws, scales, i);
      for (Param& p : params) quantize_in_place(p.value.data, ws, sf);
    }
    for (const Param& p : params) {
      if (!std::all_of(p.value.data.begin(), p.value.data.end(), [](double v) { return std::isfinite(v); })) {
        throw NonFiniteWeightError(layer.name(), step);
      }
    }
  }
}

ScaleTable compute_layer_scale_factors(Network& net, const TensorF& calibration, const QuantMap& map) {
  ScaleTable table(net.size());
  TensorF x = calibration;
  for (std::size_t i = 0; i < net.size(); ++i) {
    Layer& layer = net.layer(i);
    const LayerClass cls = layer.layer_class();
    if (quantized_class(cls)) {
      if (!layer.params().empty()) {
        table[i].weight = measure_params(layer, map.at(cls, TensorClass::Weight).sigma);
      }
      table[i].activation = scale_factor(x, map.at(cls, TensorClass::Activation).sigma);
    }
    for (Param& p : layer.params()) p.compute = p.value;
    x = layer.forward(x, Mode::Calibrate);
  }
  return table;
}

TensorF slice_batch(const TensorF& x, std::size_t first, std::size_t count) {
  if (x.rank() == 0 || first + count > x.dims[0]) {
    throw std::out_of_range("batch slice outside tensor " + format_dims(x.dims));
  }
  const std::size_t stride = x.dims[0] == 0 ? 0 : x.size() / x.dims[0];
  std::vector<std::size_t> dims = x.dims;
  dims[0] = count;
  const auto begin = x.data.begin() + static_cast<std::ptrdiff_t>(first * stride);
  return TensorF(std::move(dims), std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(count * stride)));
}

TensorF gather_batch(const TensorF& x, std::span<const std::size_t> rows) {
  const std::size_t stride = x.dims.at(0) == 0 ? 0 : x.size() / x.dims[0];
  std::vector<std::size_t> dims = x.dims;
  dims[0] = rows.size();
  TensorF out(std::move(dims));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= x.dims[0]) throw std::out_of_range("batch row outside tensor " + format_dims(x.dims));
    std::copy_n(x.data.begin() + static_cast<std::ptrdiff_t>(rows[r] * stride), stride,
                out.data.begin() + static_cast<std::ptrdiff_t>(r * stride));
  }
  return out;
}

double evaluate(Network& net, const Dataset& data, const QuantMap& map, const ScaleTable& scales,
                std::size_t batch_size) {
  if (data.empty()) throw std::invalid_argument("evaluation on an empty dataset");
  if (batch_size == 0) throw std::invalid_argument("evaluation batch size must be positive");
  std::size_t correct = 0;
  for (std::size_t first = 0; first < data.size(); first += batch_size) {
    const std::size_t count = std::min(batch_size, data.size() - first);
    const TensorF logits = forward(net, slice_batch(data.images, first, count), map, scales, Mode::Eval);
    const auto pred = argmax_rows(logits);
    for (std::size_t j = 0; j < count; ++j) correct += pred[j] == data.labels[first + j] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::vector<NamedTensor> scale_table_tensors(const Network& net, const ScaleTable& scales) {
  check_table(net, scales);
  std::vector<NamedTensor> out;
  auto pack = [](const ScaleFactor& sf) {
    return TensorF({3}, {static_cast<double>(sf.center), static_cast<double>(sf.sigma), sf.degenerate ? 1.0 : 0.0});
  };
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (scales[i].weight) out.push_back({net.layer(i).name() + ".sf_weight", pack(*scales[i].weight)});
    if (scales[i].activation) out.push_back({net.layer(i).name() + ".sf_activation", pack(*scales[i].activation)});
  }
  return out;
}

ScaleTable scale_table_from_tensors(const Network& net, std::span<const NamedTensor> tensors) {
  std::map<std::string, const TensorF*> by_name;
  for (const NamedTensor& t : tensors) by_name[t.name] = &t.tensor;
  auto unpack = [&](const std::string& name) -> std::optional<ScaleFactor> {
    const auto it = by_name.find(name);
    if (it == by_name.end()) return std::nullopt;
    const TensorF& t = *it->second;
    if (t.dims != std::vector<std::size_t>{3}) {
      throw std::invalid_argument("scale tensor '" + name + "' must have dims [3]");
    }
    return ScaleFactor{static_cast<int>(t.data[0]), static_cast<int>(t.data[1]), t.data[2] != 0.0};
  };
  ScaleTable table(net.size());
  bool any = false;
  for (std::size_t i = 0; i < net.size(); ++i) {
    table[i].weight = unpack(net.layer(i).name() + ".sf_weight");
    table[i].activation = unpack(net.layer(i).name() + ".sf_activation");
    any = any || table[i].weight || table[i].activation;
  }
  return any ? table : ScaleTable{};
}

}  // namespace posit::train
