#include "posit/train/plan.hpp"

#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"

namespace posit::train {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw PlanError(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.contains(key)) throw PlanError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw PlanError("bad value for '" + std::string(key) + "' in " + where);
  }
}

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw PlanError("missing '" + std::string(key) + "' in " + where);
  return get_or<T>(obj, key, T{}, where);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

LayerClass parse_layer_class(const std::string& key) {
  if (key == "conv") return LayerClass::Conv;
  if (key == "bn") return LayerClass::BN;
  if (key == "dense") return LayerClass::Dense;
  return LayerClass::Other;
}

QuantMap parse_quant(const json& q) {
  check_keys(q, "quant", {"scaling", "sigma", "conv", "bn", "dense", "other"});
  const bool scaling = get_or<bool>(q, "scaling", true, "quant");
  const int sigma = get_or<int>(q, "sigma", kDefaultSigma, "quant");
  QuantMap map;
  for (const char* key : {"conv", "bn", "dense", "other"}) {
    if (!q.contains(key)) continue;
    const LayerClass cls = parse_layer_class(key);
    const json& entry = q.at(key);
    const std::string where = std::string("quant.") + key;
    if (entry.is_string()) {
      const QuantSpec s = parse_quant_spec(entry.get<std::string>(), scaling, sigma);
      map.set_layer(cls, s, s);
      continue;
    }
    check_keys(entry, where, {"forward", "backward", "weight", "activation", "weight_gradient", "error"});
    auto spec = [&](const char* k) { return parse_quant_spec(require<std::string>(entry, k, where), scaling, sigma); };
    if (entry.contains("forward")) {
      map.at(cls, TensorClass::Weight) = spec("forward");
      map.at(cls, TensorClass::Activation) = spec("forward");
    }
    if (entry.contains("backward")) {
      map.at(cls, TensorClass::WeightGradient) = spec("backward");
      map.at(cls, TensorClass::Error) = spec("backward");
    }
    if (entry.contains("weight")) map.at(cls, TensorClass::Weight) = spec("weight");
    if (entry.contains("activation")) map.at(cls, TensorClass::Activation) = spec("activation");
    if (entry.contains("weight_gradient")) map.at(cls, TensorClass::WeightGradient) = spec("weight_gradient");
    if (entry.contains("error")) map.at(cls, TensorClass::Error) = spec("error");
  }
  return map;
}

LayerPlan parse_layer(const json& l, std::size_t i) {
  const std::string where = "model.layers[" + std::to_string(i) + "]";
  check_keys(l, where, {"type", "name", "out_channels", "kernel", "stride", "padding", "out"});
  LayerPlan p;
  p.type = require<std::string>(l, "type", where);
  p.name = get_or<std::string>(l, "name", p.type + std::to_string(i + 1), where);
  p.out_channels = get_or<std::size_t>(l, "out_channels", 0, where);
  p.kernel = get_or<std::size_t>(l, "kernel", 3, where);
  p.stride = get_or<std::size_t>(l, "stride", 1, where);
  p.padding = get_or<std::size_t>(l, "padding", 0, where);
  p.out = get_or<std::size_t>(l, "out", 0, where);
  return p;
}

}  // namespace

double LearningRate::at(int epoch) const {
  double lr = initial;
  for (int d : decay_epochs) {
    if (epoch >= d) lr *= factor;
  }
  return lr;
}

QuantSpec parse_quant_spec(const std::string& text, bool scaling, int sigma) {
  if (text == "passthrough") return QuantSpec::identity();
  static const std::regex pattern(R"(posit\(\s*(\d+)\s*,\s*(\d+)\s*\))");
  std::smatch m;
  if (!std::regex_match(text, m, pattern)) {
    throw PlanError("quantization spec '" + text + "' is neither posit(n,es) nor passthrough");
  }
  try {
    return QuantSpec::posit(std::stoi(m[1]), std::stoi(m[2]), scaling, sigma);
  } catch (const ConfigError& e) {
    throw PlanError(e.what());
  } catch (const std::out_of_range&) {
    throw PlanError("quantization spec '" + text + "' out of range");
  }
}

void TrainPlan::validate() const {
  if (epochs < 1) throw PlanError("epochs must be at least 1");
  if (warmup_epochs < 0 || warmup_epochs > epochs) throw PlanError("warmup_epochs must lie in [0, epochs]");
  if (batch_size == 0) throw PlanError("batch_size must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw PlanError("momentum must lie in [0, 1)");
  if (!(learning_rate.initial >= 0.0)) throw PlanError("learning_rate.initial must be nonnegative");
  if (layers.empty()) throw PlanError("model needs at least one layer");
  (void)build_network(*this);
}

TrainPlan parse_plan(const std::string& json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw PlanError(std::string("plan is not valid JSON: ") + e.what());
  }
  check_keys(doc, "plan",
             {"name", "seed", "epochs", "warmup_epochs", "batch_size", "momentum", "learning_rate", "master_weights",
              "dataset", "model", "quant"});
  TrainPlan p;
  p.name = get_or<std::string>(doc, "name", p.name, "plan");
  p.seed = get_or<std::uint64_t>(doc, "seed", p.seed, "plan");
  p.epochs = require<int>(doc, "epochs", "plan");
  p.warmup_epochs = get_or<int>(doc, "warmup_epochs", 0, "plan");
  p.batch_size = get_or<std::size_t>(doc, "batch_size", p.batch_size, "plan");
  p.momentum = get_or<double>(doc, "momentum", p.momentum, "plan");
  p.master_weights = get_or<bool>(doc, "master_weights", false, "plan");

  if (doc.contains("learning_rate")) {
    const json& lr = doc.at("learning_rate");
    if (lr.is_number()) {
      p.learning_rate.initial = lr.get<double>();
    } else {
      check_keys(lr, "learning_rate", {"initial", "decay_epochs", "factor"});
      p.learning_rate.initial = require<double>(lr, "initial", "learning_rate");
      p.learning_rate.decay_epochs = get_or<std::vector<int>>(lr, "decay_epochs", {}, "learning_rate");
      p.learning_rate.factor = get_or<double>(lr, "factor", 0.1, "learning_rate");
    }
  }

  if (!doc.contains("dataset")) throw PlanError("missing 'dataset' in plan");
  const json& ds = doc.at("dataset");
  check_keys(ds, "dataset",
             {"train_images", "train_labels", "val_images", "val_labels", "standardize", "train_limit", "val_limit"});
  p.dataset.train_images = resolve(base_dir, require<std::string>(ds, "train_images", "dataset"));
  p.dataset.train_labels = resolve(base_dir, require<std::string>(ds, "train_labels", "dataset"));
  p.dataset.val_images = resolve(base_dir, require<std::string>(ds, "val_images", "dataset"));
  p.dataset.val_labels = resolve(base_dir, require<std::string>(ds, "val_labels", "dataset"));
  p.dataset.standardize = get_or<bool>(ds, "standardize", false, "dataset");
  if (ds.contains("train_limit")) p.dataset.train_limit = require<std::size_t>(ds, "train_limit", "dataset");
  if (ds.contains("val_limit")) p.dataset.val_limit = require<std::size_t>(ds, "val_limit", "dataset");

  if (!doc.contains("model")) throw PlanError("missing 'model' in plan");
  const json& model = doc.at("model");
  check_keys(model, "model", {"input", "layers"});
  p.input = get_or<std::vector<std::size_t>>(model, "input", p.input, "model");
  const json layers = model.contains("layers") ? model.at("layers") : json::array();
  if (!layers.is_array()) throw PlanError("model.layers must be an array");
  for (std::size_t i = 0; i < layers.size(); ++i) p.layers.push_back(parse_layer(layers[i], i));

  if (doc.contains("quant")) p.quant = parse_quant(doc.at("quant"));
  p.validate();
  return p;
}

TrainPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PlanError("cannot read plan " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_plan(text.str(), path.parent_path());
}

Network build_network(const TrainPlan& plan) {
  Network net(plan.input);
  for (const LayerPlan& l : plan.layers) {
    auto dims = net.output_sample_dims();
    try {
      if (l.type == "conv2d") {
        if (dims.size() != 3) throw PlanError("conv2d '" + l.name + "' needs a [C,H,W] input");
        net.add(std::make_unique<Conv2d>(l.name, Conv2dOptions{dims[0], l.out_channels, l.kernel, l.stride, l.padding}));
      } else if (l.type == "batchnorm") {
        net.add(std::make_unique<BatchNorm>(l.name, dims.at(0)));
      } else if (l.type == "relu") {
        net.add(std::make_unique<ReLU>(l.name));
      } else if (l.type == "flatten") {
        net.add(std::make_unique<Flatten>(l.name));
      } else if (l.type == "dense") {
        if (dims.size() != 1) throw PlanError("dense '" + l.name + "' needs a flat input; add a flatten layer");
        net.add(std::make_unique<Dense>(l.name, dims[0], l.out));
      } else {
        throw PlanError("unknown layer type '" + l.type + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw PlanError(e.what());
    }
  }
  return net;
}

}  // namespace posit::train
