#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "posit/train/network.hpp"
#include "posit/train/plan.hpp"

namespace posit::train {

struct EpochRecord {
  int epoch = 0;  // 1-based
  double loss = 0.0;
  double val_acc = 0.0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct ScaleRecord {
  int epoch = 0;  // boundary: number of completed epochs
  std::string layer;
  TensorClass tensor = TensorClass::Weight;
  ScaleFactor sf;
  friend bool operator==(const ScaleRecord&, const ScaleRecord&) = default;
};

struct TrainMetrics {
  std::vector<EpochRecord> epochs;
  std::vector<ScaleRecord> scales;

  /// "epoch,loss,val_acc"
  void write_metrics_csv(std::ostream& out) const;
  /// "epoch,layer,class,center,sf"
  void write_scale_csv(std::ostream& out) const;

  friend bool operator==(const TrainMetrics&, const TrainMetrics&) = default;
};

struct TrainData {
  Dataset train;
  Dataset val;
};

/// Loads the plan's IDX files, applies the sample limits and, when enabled,
/// standardizes both sets with the training-set channel statistics.
TrainData load_train_data(const TrainPlan& plan);

struct TrainResult {
  Network net;
  ScaleTable scales;  // last table in effect; empty if quantization never ran
  TrainMetrics metrics;
};

/// He-normal initialization of a freshly built network from the plan seed.
void initialize(Network& net, std::uint64_t seed);

/// Runs the plan: warm-up epochs without quantization, then the plan's
/// quantization map with weight/activation scale factors refreshed at every
/// epoch boundary. Progress lines go to `log` when given.
TrainResult train(const TrainPlan& plan, const TrainData& data, std::ostream* log = nullptr);

}  // namespace posit::train
