#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "posit/train/network.hpp"

namespace posit::train {

class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LearningRate {
  double initial = 0.05;
  std::vector<int> decay_epochs;  // 0-based epochs at which the rate is multiplied by factor
  double factor = 0.1;

  double at(int epoch) const;
};

struct LayerPlan {
  std::string type;  // conv2d | batchnorm | relu | flatten | dense
  std::string name;
  std::size_t out_channels = 0;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t out = 0;
};

struct DatasetPlan {
  std::filesystem::path train_images;
  std::filesystem::path train_labels;
  std::filesystem::path val_images;
  std::filesystem::path val_labels;
  bool standardize = false;
  std::optional<std::size_t> train_limit;
  std::optional<std::size_t> val_limit;
};

struct TrainPlan {
  std::string name = "plan";
  std::uint64_t seed = 1;
  int epochs = 1;
  int warmup_epochs = 0;
  std::size_t batch_size = 64;
  double momentum = 0.9;
  LearningRate learning_rate;
  bool master_weights = false;
  DatasetPlan dataset;
  std::vector<std::size_t> input = {1, 28, 28};
  std::vector<LayerPlan> layers;
  QuantMap quant;

  /// Throws PlanError on inconsistent fields (epochs, warm-up, batch size,
  /// empty or unknown layers).
  void validate() const;
};

/// Parses the JSON plan document. Relative dataset paths are resolved
/// against base_dir.
TrainPlan parse_plan(const std::string& json_text, const std::filesystem::path& base_dir = {});
TrainPlan load_plan(const std::filesystem::path& path);

/// "posit(n,es)" or "passthrough".
QuantSpec parse_quant_spec(const std::string& text, bool scaling, int sigma);

/// Builds the layer stack with input channel counts inferred from the
/// preceding layers. Parameters are left at zero (gamma = 1 for BN).
Network build_network(const TrainPlan& plan);

}  // namespace posit::train
