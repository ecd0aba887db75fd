#include "posit/train/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "posit/train/parallel.hpp"

namespace posit::train {

std::string_view to_string(LayerClass c) {
  switch (c) {
    case LayerClass::Conv: return "conv";
    case LayerClass::BN: return "bn";
    case LayerClass::Dense: return "dense";
    case LayerClass::Other: return "other";
  }
  return "?";
}

std::string_view to_string(TensorClass c) {
  switch (c) {
    case TensorClass::Weight: return "weight";
    case TensorClass::Activation: return "activation";
    case TensorClass::WeightGradient: return "weight_gradient";
    case TensorClass::Error: return "error";
  }
  return "?";
}

void Layer::require(bool cached, const std::string& layer) {
  if (!cached) {
    throw std::logic_error("backward on layer '" + layer + "' without a cached training forward pass");
  }
}

namespace {

[[noreturn]] void shape_error(const std::string& layer, const std::string& expected,
                              const std::vector<std::size_t>& got) {
  throw std::invalid_argument("layer '" + layer + "' expects " + expected + ", got " + format_dims(got));
}

std::size_t conv_extent(std::size_t in, const Conv2dOptions& o) {
  return (in + 2 * o.padding - o.kernel) / o.stride + 1;
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(std::string name, const Conv2dOptions& opt) : Layer(std::move(name)), opt_(opt) {
  if (opt.in_channels == 0 || opt.out_channels == 0 || opt.kernel == 0 || opt.stride == 0) {
    throw std::invalid_argument("conv2d '" + this->name() + "' needs nonzero channels, kernel and stride");
  }
  params_.emplace_back("weight", TensorF({opt.out_channels, opt.in_channels, opt.kernel, opt.kernel}));
  params_.emplace_back("bias", TensorF({opt.out_channels}));
}

std::vector<std::size_t> Conv2d::output_dims(const std::vector<std::size_t>& in) const {
  if (in.size() != 4 || in[1] != opt_.in_channels || in[2] + 2 * opt_.padding < opt_.kernel ||
      in[3] + 2 * opt_.padding < opt_.kernel) {
    shape_error(name(), "[N, " + std::to_string(opt_.in_channels) + ", H, W] with H, W >= kernel", in);
  }
  return {in[0], opt_.out_channels, conv_extent(in[2], opt_), conv_extent(in[3], opt_)};
}

TensorF Conv2d::forward(const TensorF& x, Mode mode) {
  const auto od = output_dims(x.dims);
  const std::size_t batch = x.dims[0], ic = opt_.in_channels, h = x.dims[2], w = x.dims[3];
  const std::size_t k = opt_.kernel, oh = od[2], ow = od[3], oc = opt_.out_channels;
  const std::size_t rows = ic * k * k, plane = oh * ow;

  std::vector<double> cols(batch * rows * plane, 0.0);
  TensorF y(od);
  const double* weight = params_[0].compute.data.data();
  const double* bias = params_[1].compute.data.data();

  parallel_for(0, batch, [&](std::size_t n) {
    double* c = cols.data() + n * rows * plane;
    for (std::size_t ci = 0; ci < ic; ++ci) {
      for (std::size_t ky = 0; ky < k; ++ky) {
        for (std::size_t kx = 0; kx < k; ++kx) {
          double* row = c + ((ci * k + ky) * k + kx) * plane;
          for (std::size_t oy = 0; oy < oh; ++oy) {
            const auto iy = static_cast<std::ptrdiff_t>(oy * opt_.stride + ky) -
                            static_cast<std::ptrdiff_t>(opt_.padding);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::size_t ox = 0; ox < ow; ++ox) {
              const auto ix = static_cast<std::ptrdiff_t>(ox * opt_.stride + kx) -
                              static_cast<std::ptrdiff_t>(opt_.padding);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
              row[oy * ow + ox] = x.data[((n * ic + ci) * h + static_cast<std::size_t>(iy)) * w +
                                         static_cast<std::size_t>(ix)];
            }
          }
        }
      }
    }
    double* out = y.data.data() + n * oc * plane;
    for (std::size_t o = 0; o < oc; ++o) {
      double* dst = out + o * plane;
      const double* wrow = weight + o * rows;
      for (std::size_t r = 0; r < rows; ++r) {
        const double wv = wrow[r];
        const double* src = c + r * plane;
        for (std::size_t p = 0; p < plane; ++p) dst[p] += wv * src[p];
      }
      for (std::size_t p = 0; p < plane; ++p) dst[p] += bias[o];
    }
  });

  if (mode == Mode::Train) {
    in_dims_ = x.dims;
    cols_ = std::move(cols);
    cached_ = true;
  }
  return y;
}

TensorF Conv2d::backward(const TensorF& g) {
  require(cached_, name());
  const std::size_t batch = in_dims_[0], ic = opt_.in_channels, h = in_dims_[2], w = in_dims_[3];
  const std::size_t k = opt_.kernel, oc = opt_.out_channels;
  const std::size_t oh = conv_extent(h, opt_), ow = conv_extent(w, opt_);
  const std::size_t rows = ic * k * k, plane = oh * ow;
  if (g.dims != std::vector<std::size_t>{batch, oc, oh, ow}) {
    shape_error(name(), "gradient " + format_dims({batch, oc, oh, ow}), g.dims);
  }

  TensorF& dw = params_[0].grad;
  TensorF& db = params_[1].grad;
  parallel_for(0, oc, [&](std::size_t o) {
    double* dwrow = dw.data.data() + o * rows;
    std::fill(dwrow, dwrow + rows, 0.0);
    double bsum = 0.0;
    for (std::size_t n = 0; n < batch; ++n) {
      const double* go = g.data.data() + (n * oc + o) * plane;
      const double* c = cols_.data() + n * rows * plane;
      for (std::size_t r = 0; r < rows; ++r) {
        const double* src = c + r * plane;
        double acc = 0.0;
        for (std::size_t p = 0; p < plane; ++p) acc += go[p] * src[p];
        dwrow[r] += acc;
      }
      for (std::size_t p = 0; p < plane; ++p) bsum += go[p];
    }
    db.data[o] = bsum;
  });

  TensorF dx(in_dims_);
  const double* weight = params_[0].compute.data.data();
  parallel_for(0, batch, [&](std::size_t n) {
    std::vector<double> dcol(rows * plane, 0.0);
    for (std::size_t o = 0; o < oc; ++o) {
      const double* go = g.data.data() + (n * oc + o) * plane;
      const double* wrow = weight + o * rows;
      for (std::size_t r = 0; r < rows; ++r) {
        const double wv = wrow[r];
        double* dst = dcol.data() + r * plane;
        for (std::size_t p = 0; p < plane; ++p) dst[p] += wv * go[p];
      }
    }
    for (std::size_t ci = 0; ci < ic; ++ci) {
      for (std::size_t ky = 0; ky < k; ++ky) {
        for (std::size_t kx = 0; kx < k; ++kx) {
          const double* row = dcol.data() + ((ci * k + ky) * k + kx) * plane;
          for (std::size_t oy = 0; oy < oh; ++oy) {
            const auto iy = static_cast<std::ptrdiff_t>(oy * opt_.stride + ky) -
                            static_cast<std::ptrdiff_t>(opt_.padding);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::size_t ox = 0; ox < ow; ++ox) {
              const auto ix = static_cast<std::ptrdiff_t>(ox * opt_.stride + kx) -
                              static_cast<std::ptrdiff_t>(opt_.padding);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
              dx.data[((n * ic + ci) * h + static_cast<std::size_t>(iy)) * w + static_cast<std::size_t>(ix)] +=
                  row[oy * ow + ox];
            }
          }
        }
      }
    }
  });
  return dx;
}

// ---------------------------------------------------------------- Dense

Dense::Dense(std::string name, std::size_t in, std::size_t out) : Layer(std::move(name)), in_(in), out_(out) {
  if (in == 0 || out == 0) {
    throw std::invalid_argument("dense '" + this->name() + "' needs nonzero widths");
  }
  params_.emplace_back("weight", TensorF({out, in}));
  params_.emplace_back("bias", TensorF({out}));
}

std::vector<std::size_t> Dense::output_dims(const std::vector<std::size_t>& in) const {
  if (in.size() != 2 || in[1] != in_) {
    shape_error(name(), "[N, " + std::to_string(in_) + "]", in);
  }
  return {in[0], out_};
}

TensorF Dense::forward(const TensorF& x, Mode mode) {
  TensorF y(output_dims(x.dims));
  const std::size_t batch = x.dims[0];
  const double* weight = params_[0].compute.data.data();
  const double* bias = params_[1].compute.data.data();
  parallel_for(0, batch, [&](std::size_t n) {
    const double* xi = x.data.data() + n * in_;
    for (std::size_t o = 0; o < out_; ++o) {
      const double* wrow = weight + o * in_;
      double acc = 0.0;
      for (std::size_t i = 0; i < in_; ++i) acc += wrow[i] * xi[i];
      y.data[n * out_ + o] = acc + bias[o];
    }
  });
  if (mode == Mode::Train) {
    input_ = x;
    cached_ = true;
  }
  return y;
}

TensorF Dense::backward(const TensorF& g) {
  require(cached_, name());
  const std::size_t batch = input_.dims[0];
  if (g.dims != std::vector<std::size_t>{batch, out_}) {
    shape_error(name(), "gradient " + format_dims({batch, out_}), g.dims);
  }
  TensorF& dw = params_[0].grad;
  TensorF& db = params_[1].grad;
  parallel_for(0, out_, [&](std::size_t o) {
    double* dwrow = dw.data.data() + o * in_;
    std::fill(dwrow, dwrow + in_, 0.0);
    double bsum = 0.0;
    for (std::size_t n = 0; n < batch; ++n) {
      const double go = g.data[n * out_ + o];
      const double* xi = input_.data.data() + n * in_;
      for (std::size_t i = 0; i < in_; ++i) dwrow[i] += go * xi[i];
      bsum += go;
    }
    db.data[o] = bsum;
  });

  TensorF dx(input_.dims);
  const double* weight = params_[0].compute.data.data();
  parallel_for(0, batch, [&](std::size_t n) {
    double* dxi = dx.data.data() + n * in_;
    for (std::size_t o = 0; o < out_; ++o) {
      const double go = g.data[n * out_ + o];
      const double* wrow = weight + o * in_;
      for (std::size_t i = 0; i < in_; ++i) dxi[i] += go * wrow[i];
    }
  });
  return dx;
}

// ---------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(std::string name, std::size_t channels, double eps, double momentum)
    : Layer(std::move(name)),
      channels_(channels),
      eps_(eps),
      momentum_(momentum),
      running_mean_({channels}, 0.0),
      running_var_({channels}, 1.0) {
  if (channels == 0) {
    throw std::invalid_argument("batchnorm '" + this->name() + "' needs at least one channel");
  }
  params_.emplace_back("gamma", TensorF({channels}, 1.0));
  params_.emplace_back("beta", TensorF({channels}, 0.0));
}

std::vector<std::pair<std::string, TensorF*>> BatchNorm::buffers() {
  return {{"running_mean", &running_mean_}, {"running_var", &running_var_}};
}

TensorF BatchNorm::forward(const TensorF& x, Mode mode) {
  if ((x.rank() != 2 && x.rank() != 4) || x.dims[1] != channels_) {
    shape_error(name(), "[N, " + std::to_string(channels_) + "] or [N, " + std::to_string(channels_) + ", H, W]",
                x.dims);
  }
  const std::size_t batch = x.dims[0];
  const std::size_t plane = x.rank() == 4 ? x.dims[2] * x.dims[3] : 1;
  const std::size_t count = batch * plane;
  const double* gamma = params_[0].compute.data.data();
  const double* beta = params_[1].compute.data.data();

  TensorF y(x.dims);
  TensorF xhat(x.dims);
  std::vector<double> inv_std(channels_);
  parallel_for(0, channels_, [&](std::size_t c) {
    double mean;
    double var;
    if (mode == Mode::Eval) {
      mean = running_mean_.data[c];
      var = running_var_.data[c];
    } else {
      double sum = 0.0;
      for (std::size_t n = 0; n < batch; ++n) {
        const double* src = x.data.data() + (n * channels_ + c) * plane;
        for (std::size_t p = 0; p < plane; ++p) sum += src[p];
      }
      mean = sum / static_cast<double>(count);
      double sq = 0.0;
      for (std::size_t n = 0; n < batch; ++n) {
        const double* src = x.data.data() + (n * channels_ + c) * plane;
        for (std::size_t p = 0; p < plane; ++p) sq += (src[p] - mean) * (src[p] - mean);
      }
      var = sq / static_cast<double>(count);
      if (mode == Mode::Train) {
        const double unbiased = count > 1 ? sq / static_cast<double>(count - 1) : var;
        running_mean_.data[c] = (1.0 - momentum_) * running_mean_.data[c] + momentum_ * mean;
        running_var_.data[c] = (1.0 - momentum_) * running_var_.data[c] + momentum_ * unbiased;
      }
    }
    const double is = 1.0 / std::sqrt(var + eps_);
    inv_std[c] = is;
    for (std::size_t n = 0; n < batch; ++n) {
      const std::size_t base = (n * channels_ + c) * plane;
      for (std::size_t p = 0; p < plane; ++p) {
        const double xh = (x.data[base + p] - mean) * is;
        xhat.data[base + p] = xh;
        y.data[base + p] = gamma[c] * xh + beta[c];
      }
    }
  });
  if (mode == Mode::Train) {
    xhat_ = std::move(xhat);
    inv_std_ = std::move(inv_std);
    cached_ = true;
  }
  return y;
}

TensorF BatchNorm::backward(const TensorF& g) {
  require(cached_, name());
  if (g.dims != xhat_.dims) {
    shape_error(name(), "gradient " + format_dims(xhat_.dims), g.dims);
  }
  const std::size_t batch = g.dims[0];
  const std::size_t plane = g.rank() == 4 ? g.dims[2] * g.dims[3] : 1;
  const double count = static_cast<double>(batch * plane);
  const double* gamma = params_[0].compute.data.data();
  TensorF dx(g.dims);
  parallel_for(0, channels_, [&](std::size_t c) {
    double gsum = 0.0;
    double gxsum = 0.0;
    for (std::size_t n = 0; n < batch; ++n) {
      const std::size_t base = (n * channels_ + c) * plane;
      for (std::size_t p = 0; p < plane; ++p) {
        gsum += g.data[base + p];
        gxsum += g.data[base + p] * xhat_.data[base + p];
      }
    }
    params_[0].grad.data[c] = gxsum;
    params_[1].grad.data[c] = gsum;
    const double scale = gamma[c] * inv_std_[c] / count;
    for (std::size_t n = 0; n < batch; ++n) {
      const std::size_t base = (n * channels_ + c) * plane;
      for (std::size_t p = 0; p < plane; ++p) {
        dx.data[base + p] = scale * (count * g.data[base + p] - gsum - xhat_.data[base + p] * gxsum);
      }
    }
  });
  return dx;
}

// ---------------------------------------------------------------- ReLU, Flatten

TensorF ReLU::forward(const TensorF& x, Mode mode) {
  TensorF y(x.dims);
  std::vector<bool> positive(mode == Mode::Train ? x.size() : 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool on = x.data[i] > 0.0;
    y.data[i] = on ? x.data[i] : 0.0;
    if (mode == Mode::Train) positive[i] = on;
  }
  if (mode == Mode::Train) {
    positive_ = std::move(positive);
    cached_ = true;
  }
  return y;
}

TensorF ReLU::backward(const TensorF& g) {
  require(cached_, name());
  if (g.size() != positive_.size()) {
    shape_error(name(), "gradient with " + std::to_string(positive_.size()) + " elements", g.dims);
  }
  TensorF dx(g.dims);
  for (std::size_t i = 0; i < g.size(); ++i) dx.data[i] = positive_[i] ? g.data[i] : 0.0;
  return dx;
}

std::vector<std::size_t> Flatten::output_dims(const std::vector<std::size_t>& in) const {
  if (in.empty()) shape_error(name(), "a batch dimension", in);
  const std::vector<std::size_t> rest(in.begin() + 1, in.end());
  return {in[0], TensorF::element_count(rest)};
}

TensorF Flatten::forward(const TensorF& x, Mode mode) {
  if (mode == Mode::Train) {
    in_dims_ = x.dims;
    cached_ = true;
  }
  return TensorF(output_dims(x.dims), x.data);
}

TensorF Flatten::backward(const TensorF& g) {
  require(cached_, name());
  return TensorF(in_dims_, g.data);
}

// ---------------------------------------------------------------- init, loss

void he_normal_init(Layer& layer, std::mt19937_64& rng) {
  std::size_t fan_in = 0;
  if (const auto* conv = dynamic_cast<const Conv2d*>(&layer)) fan_in = conv->fan_in();
  if (const auto* dense = dynamic_cast<const Dense*>(&layer)) fan_in = dense->fan_in();
  if (fan_in == 0) return;
  auto params = layer.params();
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (double& v : params[0].value.data) v = dist(rng);
  std::fill(params[1].value.data.begin(), params[1].value.data.end(), 0.0);
  for (Param& p : params) p.compute = p.value;
}

LossResult softmax_cross_entropy(const TensorF& logits, std::span<const int> labels) {
  if (logits.rank() != 2 || logits.dims[0] != labels.size() || logits.dims[0] == 0) {
    throw std::invalid_argument("softmax cross-entropy expects [N, classes] logits and N labels, got " +
                                format_dims(logits.dims) + " and " + std::to_string(labels.size()));
  }
  const std::size_t batch = logits.dims[0], classes = logits.dims[1];
  LossResult r{0.0, TensorF(logits.dims)};
  for (std::size_t n = 0; n < batch; ++n) {
    const int label = labels[n];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw std::invalid_argument("label " + std::to_string(label) + " outside [0, " + std::to_string(classes) + ")");
    }
    const double* z = logits.data.data() + n * classes;
    const double zmax = *std::max_element(z, z + classes);
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) sum += std::exp(z[c] - zmax);
    const double log_sum = std::log(sum) + zmax;
    r.loss += log_sum - z[label];
    double* g = r.grad.data.data() + n * classes;
    for (std::size_t c = 0; c < classes; ++c) {
      g[c] = (std::exp(z[c] - log_sum) - (static_cast<std::size_t>(label) == c ? 1.0 : 0.0)) /
             static_cast<double>(batch);
    }
  }
  r.loss /= static_cast<double>(batch);
  return r;
}

std::vector<int> argmax_rows(const TensorF& logits) {
  if (logits.rank() != 2) {
    throw std::invalid_argument("argmax expects [N, classes], got " + format_dims(logits.dims));
  }
  const std::size_t classes = logits.dims[1];
  std::vector<int> out(logits.dims[0]);
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double* z = logits.data.data() + n * classes;
    out[n] = static_cast<int>(std::max_element(z, z + classes) - z);
  }
  return out;
}

}  // namespace posit::train
