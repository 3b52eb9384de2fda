#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include "chris/tcn.hpp"

namespace chris::predictors {
namespace {

using Matrix = std::vector<std::vector<double>>;  // [channel][time]

Matrix conv_forward(const Matrix& x, const ConvLayerSpec& layer, const FloatLayer& w) {
  const int in_len = static_cast<int>(x.front().size());
  const int out_len = layer.output_length(in_len);
  Matrix y(layer.out_channels, std::vector<double>(out_len));
  for (int co = 0; co < layer.out_channels; ++co) {
    auto& out = y[co];
    std::fill(out.begin(), out.end(), w.bias[co]);
    for (int ci = 0; ci < layer.in_channels; ++ci) {
      const auto& row = x[ci];
      for (int j = 0; j < layer.kernel; ++j) {
        const double wv = w.weights[(static_cast<std::size_t>(co) * layer.in_channels + ci) * layer.kernel + j];
        const int offset = j * layer.dilation - layer.padding;
        for (int t = 0; t < out_len; ++t) {
          const int src = t * layer.stride + offset;
          if (src >= 0 && src < in_len) out[t] += wv * row[src];
        }
      }
    }
    if (layer.relu) {
      for (double& v : out) v = std::max(v, 0.0);
    }
  }
  return y;
}

Matrix pool_forward(const Matrix& x, int factor) {
  if (factor <= 1) return x;
  Matrix y(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) {
    const std::size_t out_len = x[c].size() / factor;
    y[c].resize(out_len);
    for (std::size_t t = 0; t < out_len; ++t) {
      double s = 0.0;
      for (int k = 0; k < factor; ++k) s += x[c][t * factor + k];
      y[c][t] = s / factor;
    }
  }
  return y;
}

QuantParams symmetric_params(std::span<const double> values) {
  double max_abs = 0.0;
  for (double v : values) max_abs = std::max(max_abs, std::abs(v));
  return QuantParams{std::max(max_abs, 1e-8) / 127.0, 0};
}

std::vector<std::int8_t> quantize_weights(std::span<const double> values, const QuantParams& q) {
  std::vector<std::int8_t> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = static_cast<std::int8_t>(std::clamp(round_half_away(values[i] / q.scale), -127, 127));
  }
  return out;
}

std::vector<std::int32_t> quantize_bias(std::span<const double> values, double scale) {
  std::vector<std::int32_t> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = round_half_away(values[i] / scale);
  return out;
}

}  // namespace

FloatTcn random_float_tcn(const TcnSpec& architecture, std::uint64_t seed) {
  check_structure(architecture);
  FloatTcn model;
  model.spec = architecture;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < kConvLayers; ++i) {
    const ConvLayerSpec& layer = architecture.layer(i);
    const double he = std::sqrt(2.0 / (layer.in_channels * layer.kernel));
    auto& w = model.conv[i];
    w.weights.resize(static_cast<std::size_t>(layer.out_channels) * layer.in_channels * layer.kernel);
    for (double& v : w.weights) v = he * gauss(rng);
    w.bias.resize(layer.out_channels);
    for (double& v : w.bias) v = 0.05 * gauss(rng);
  }
  const int c = architecture.head.in_channels;
  model.head.weights.resize(c);
  for (double& v : model.head.weights) v = 40.0 / std::sqrt(static_cast<double>(c)) * gauss(rng);
  model.head.bias = {100.0};
  return model;
}

std::vector<double> float_features(const FloatTcn& model, const signal::SampleWindow& window,
                                   std::array<double, kConvLayers>* layer_max) {
  const auto input = normalized_channels(window);
  Matrix x(input.begin(), input.end());
  for (int b = 0; b < 3; ++b) {
    for (int l = 0; l < 3; ++l) {
      const int idx = b * 3 + l;
      x = conv_forward(x, model.spec.blocks[b].layers[l], model.conv[idx]);
      if (layer_max) {
        for (const auto& row : x) {
          for (double v : row) (*layer_max)[idx] = std::max((*layer_max)[idx], std::abs(v));
        }
      }
    }
    x = pool_forward(x, model.spec.blocks[b].pool);
  }
  std::vector<double> features(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) {
    double s = 0.0;
    for (double v : x[c]) s += v;
    features[c] = s / static_cast<double>(x[c].size());
  }
  return features;
}

double float_infer(const FloatTcn& model, const signal::SampleWindow& window) {
  const auto f = float_features(model, window);
  double y = model.head.bias[0];
  for (std::size_t c = 0; c < f.size(); ++c) y += model.head.weights[c] * f[c];
  return clamp_bpm(y);
}

void fit_head(FloatTcn& model, std::span<const signal::SampleWindow> windows, double ridge) {
  if (windows.empty()) throw Error(ErrorKind::EmptyDataset, "no windows to fit the head on");
  const int p = model.spec.head.in_channels;
  const auto n = static_cast<Eigen::Index>(windows.size());
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& w = windows[static_cast<std::size_t>(i)];
    if (!w.hr_ref) throw Error(ErrorKind::MissingLabels, "window without hr_ref in head fit");
    const auto f = float_features(model, w);
    for (int c = 0; c < p; ++c) x(i, c) = f[c];
    y(i) = *w.hr_ref;
  }
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;
  Eigen::MatrixXd gram = xc.transpose() * xc;
  const double lambda = ridge * std::max(gram.diagonal().mean(), 1e-12);
  gram.diagonal().array() += lambda;
  const Eigen::VectorXd coef = gram.ldlt().solve(xc.transpose() * yc);

  for (int c = 0; c < p; ++c) model.head.weights[c] = coef(c);
  model.head.bias = {y_mean - x_mean.dot(coef)};
}

QuantizedTcn quantize(const FloatTcn& model, std::span<const signal::SampleWindow> calibration,
                      double headroom) {
  if (calibration.empty()) throw Error(ErrorKind::EmptyDataset, "no calibration windows");
  std::array<double, kConvLayers> layer_max{};
  for (const auto& w : calibration) float_features(model, w, &layer_max);

  QuantizedTcn q;
  q.spec = model.spec;
  double in_scale = q.spec.input_q.scale;
  for (int i = 0; i < kConvLayers; ++i) {
    ConvLayerSpec& layer = q.spec.layer(i);
    layer.weight_q = symmetric_params(model.conv[i].weights);
    const double range = std::max(layer_max[i] * headroom, 1e-6);
    layer.output_q = layer.relu ? QuantParams{range / 255.0, -128} : QuantParams{range / 127.0, 0};
    q.weights.conv[i].weights = quantize_weights(model.conv[i].weights, layer.weight_q);
    q.weights.conv[i].bias = quantize_bias(model.conv[i].bias, in_scale * layer.weight_q.scale);
    in_scale = layer.output_q.scale;
  }
  q.spec.head.weight_q = symmetric_params(model.head.weights);
  q.weights.head.weights = quantize_weights(model.head.weights, q.spec.head.weight_q);
  q.weights.head.bias = quantize_bias(model.head.bias, in_scale * q.spec.head.weight_q.scale);
  return q;
}

std::vector<signal::SampleWindow> calibration_windows(std::uint64_t seed, int per_activity) {
  std::vector<signal::SampleWindow> out;
  for (int a = ActivityId::kMin; a <= ActivityId::kMax; ++a) {
    for (int i = 0; i < per_activity; ++i) {
      const double hr = 45.0 + std::fmod(37.0 * i + 17.0 * a, 150.0);
      out.push_back(signal::synth_window(hr, ActivityId(a), seed * 1000 + static_cast<std::uint64_t>(a * 100 + i)));
    }
  }
  return out;
}


std::vector<signal::SampleWindow> training_windows(std::uint64_t seed, int per_activity) {
  std::vector<signal::SampleWindow> out;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> hr(40.0, 200.0);
  for (int a = ActivityId::kMin; a <= ActivityId::kMax; ++a) {
    for (int i = 0; i < per_activity; ++i) out.push_back(signal::synth_window(hr(rng), ActivityId(a), rng()));
  }
  return out;
}

QuantizedTcn build_tcn(ModelKind kind, const BuildOptions& options) {
  FloatTcn model = random_float_tcn(architecture_for(kind), options.seed);
  if (options.fit_windows_per_activity > 0) {
    const auto train = training_windows(options.seed, options.fit_windows_per_activity);
    fit_head(model, train, options.ridge);
  }
  const auto calibration = calibration_windows(options.seed);
  return quantize(model, calibration);
}

}  // namespace chris::predictors
