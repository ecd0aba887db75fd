#include "posit/train/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <random>

#include "posit/dyadic.hpp"

namespace posit::train {

namespace {

Dataset limit(Dataset d, const std::optional<std::size_t>& count) {
  if (!count || *count >= d.size()) return d;
  d.images = slice_batch(d.images, 0, *count);
  d.labels.resize(*count);
  return d;
}

}  // namespace

void TrainMetrics::write_metrics_csv(std::ostream& out) const {
  out << "epoch,loss,val_acc\n";
  for (const EpochRecord& r : epochs) {
    out << r.epoch << ',' << format_real(r.loss) << ',' << format_real(r.val_acc) << '\n';
  }
}

void TrainMetrics::write_scale_csv(std::ostream& out) const {
  out << "epoch,layer,class,center,sf\n";
  for (const ScaleRecord& r : scales) {
    out << r.epoch << ',' << r.layer << ',' << to_string(r.tensor) << ',' << r.sf.center << ','
        << format_real(r.sf.value()) << '\n';
  }
}

TrainData load_train_data(const TrainPlan& plan) {
  TrainData d{limit(load_idx_dataset(plan.dataset.train_images, plan.dataset.train_labels), plan.dataset.train_limit),
              limit(load_idx_dataset(plan.dataset.val_images, plan.dataset.val_labels), plan.dataset.val_limit)};
  if (plan.dataset.standardize && !d.train.empty()) {
    const ChannelStats stats = channel_stats(d.train.images);
    standardize(d.train.images, stats);
    if (!d.val.empty()) standardize(d.val.images, stats);
  }
  return d;
}

void initialize(Network& net, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < net.size(); ++i) he_normal_init(net.layer(i), rng);
}

TrainResult train(const TrainPlan& plan, const TrainData& data, std::ostream* log) {
  plan.validate();
  if (data.train.empty()) throw std::invalid_argument("training set is empty");
  if (data.val.empty()) throw std::invalid_argument("validation set is empty");

  TrainResult result{build_network(plan), {}, {}};
  Network& net = result.net;
  initialize(net, plan.seed);

  const std::size_t n = data.train.size();
  const TensorF calibration = slice_batch(data.train.images, 0, std::min(plan.batch_size, n));
  const QuantMap passthrough;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(plan.seed + 1);
  std::uint64_t step = 0;

  for (int epoch = 0; epoch < plan.epochs; ++epoch) {
    const bool quantized = epoch >= plan.warmup_epochs;
    const QuantMap& map = quantized ? plan.quant : passthrough;
    if (quantized && !plan.quant.all_passthrough()) {
      result.scales = compute_layer_scale_factors(net, calibration, plan.quant);
      for (std::size_t i = 0; i < net.size(); ++i) {
        if (result.scales[i].weight) {
          result.metrics.scales.push_back({epoch, net.layer(i).name(), TensorClass::Weight, *result.scales[i].weight});
        }
        if (result.scales[i].activation) {
          result.metrics.scales.push_back(
              {epoch, net.layer(i).name(), TensorClass::Activation, *result.scales[i].activation});
        }
      }
    }
    const ScaleTable& scales = quantized ? result.scales : ScaleTable{};

    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const UpdateOptions update{plan.learning_rate.at(epoch), plan.momentum, plan.master_weights};
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t first = 0; first < n; first += plan.batch_size) {
      const std::size_t count = std::min(plan.batch_size, n - first);
      const std::span<const std::size_t> rows(order.data() + first, count);
      std::vector<int> labels(count);
      for (std::size_t j = 0; j < count; ++j) labels[j] = data.train.labels[rows[j]];

      const TensorF logits = forward(net, gather_batch(data.train.images, rows), map, scales, Mode::Train);
      const LossResult loss = softmax_cross_entropy(logits, labels);
      backward(net, loss.grad, map);
      update_weights(net, map, scales, update, ++step);
      loss_sum += loss.loss;
      ++batches;
    }

    const EpochRecord record{epoch + 1, loss_sum / static_cast<double>(batches),
                             evaluate(net, data.val, map, scales)};
    result.metrics.epochs.push_back(record);
    if (log != nullptr) {
      *log << plan.name << " epoch " << record.epoch << "/" << plan.epochs << (quantized ? "" : " (warm-up)")
           << " loss " << format_real(record.loss) << " val_acc " << format_real(record.val_acc) << '\n';
    }
  }
  if (plan.warmup_epochs == plan.epochs) result.scales.clear();
  return result;
}

}  // namespace posit::train
