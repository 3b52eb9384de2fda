#include "chris/tcn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace chris::predictors {
namespace {

[[noreturn]] void shape_error(const std::string& what) { throw Error(ErrorKind::ShapeMismatch, what); }

std::int8_t saturate(std::int64_t v) {
  return static_cast<std::int8_t>(std::clamp<std::int64_t>(v, std::numeric_limits<std::int8_t>::min(),
                                                           std::numeric_limits<std::int8_t>::max()));
}

void check_quant(const QuantParams& q, const std::string& what) {
  if (!q.calibrated()) throw Error(ErrorKind::UncalibratedQuantization, what + " has no valid scale");
}

TcnSpec make_spec(std::string name, std::array<int, 3> widths, std::array<int, 3> pools) {
  TcnSpec spec;
  spec.name = std::move(name);
  spec.input_q = {4.0 / 127.0, 0};
  int channels = spec.input_channels;
  constexpr int kKernel = 3;
  constexpr std::array<int, 3> kDilation = {1, 2, 4};
  constexpr std::array<int, 3> kStride = {2, 1, 1};
  for (int b = 0; b < 3; ++b) {
    for (int l = 0; l < 3; ++l) {
      ConvLayerSpec& layer = spec.blocks[b].layers[l];
      layer.in_channels = channels;
      layer.out_channels = widths[b];
      layer.kernel = kKernel;
      layer.dilation = kDilation[l];
      layer.stride = kStride[l];
      layer.padding = same_padding(kKernel, kDilation[l]);
      layer.relu = true;
      channels = widths[b];
    }
    spec.blocks[b].pool = pools[b];
  }
  spec.head.in_channels = channels;
  return spec;
}

}  // namespace

bool QuantParams::calibrated() const noexcept {
  return std::isfinite(scale) && scale > 0.0 && zero_point >= -128 && zero_point <= 127;
}

int ConvLayerSpec::output_length(int input_length) const noexcept {
  if (stride <= 0) return 0;
  const int span = input_length + 2 * padding - dilation * (kernel - 1) - 1;
  if (span < 0) return 0;
  return span / stride + 1;
}

int same_padding(int kernel, int dilation) { return dilation * (kernel - 1) / 2; }

std::int32_t round_half_away(double v) {
  const double r = std::round(v);
  if (r >= static_cast<double>(std::numeric_limits<std::int32_t>::max())) return std::numeric_limits<std::int32_t>::max();
  if (r <= static_cast<double>(std::numeric_limits<std::int32_t>::min())) return std::numeric_limits<std::int32_t>::min();
  return static_cast<std::int32_t>(r);
}

std::int8_t quantize_value(double real, const QuantParams& q) {
  return saturate(static_cast<std::int64_t>(round_half_away(real / q.scale)) + q.zero_point);
}

double dequantize_value(std::int32_t q_value, const QuantParams& q) {
  return q.scale * static_cast<double>(q_value - q.zero_point);
}

void check_structure(const TcnSpec& spec) {
  if (spec.input_channels <= 0 || spec.input_length <= 0) shape_error("input shape must be positive");
  int channels = spec.input_channels;
  int length = spec.input_length;
  for (int b = 0; b < 3; ++b) {
    const TcnBlockSpec& block = spec.blocks[b];
    int strided = 0;
    int dilated = 0;
    for (const ConvLayerSpec& layer : block.layers) {
      if (layer.in_channels != channels) shape_error("block " + std::to_string(b) + ": channel chain broken");
      if (layer.out_channels <= 0 || layer.kernel <= 0 || layer.dilation < 1 || layer.padding < 0) {
        shape_error("block " + std::to_string(b) + ": invalid layer geometry");
      }
      if (layer.stride != 1 && layer.stride != 2) shape_error("stride must be 1 or 2");
      strided += layer.stride == 2;
      dilated += layer.dilation > 1;
      length = layer.output_length(length);
      if (length <= 0) shape_error("block " + std::to_string(b) + ": sequence length collapses");
      channels = layer.out_channels;
    }
    if (strided != 1 || dilated != 2) {
      shape_error("block " + std::to_string(b) + " needs two dilated layers and one stride-2 layer");
    }
    if (block.pool < 1) shape_error("pool factor must be >= 1");
    length /= block.pool;
    if (length <= 0) shape_error("pooling collapses the sequence");
  }
  if (spec.head.in_channels != channels) shape_error("head input channels do not match the last conv");
}

void validate(const TcnSpec& spec, const TcnWeights& weights) {
  check_structure(spec);
  check_quant(spec.input_q, "input");
  for (int i = 0; i < kConvLayers; ++i) {
    const ConvLayerSpec& layer = spec.layer(i);
    check_quant(layer.weight_q, "layer " + std::to_string(i) + " weights");
    check_quant(layer.output_q, "layer " + std::to_string(i) + " output");
    const auto expected = static_cast<std::size_t>(layer.out_channels) * layer.in_channels * layer.kernel;
    if (weights.conv[i].weights.size() != expected || weights.conv[i].bias.size() != static_cast<std::size_t>(layer.out_channels)) {
      shape_error("layer " + std::to_string(i) + " weight/bias size mismatch");
    }
  }
  check_quant(spec.head.weight_q, "head weights");
  if (weights.head.weights.size() != static_cast<std::size_t>(spec.head.in_channels) || weights.head.bias.size() != 1) {
    shape_error("head weight/bias size mismatch");
  }
}

std::vector<std::int32_t> conv1d_accumulate(const QTensor& input, const ConvLayerSpec& layer,
                                            const LayerWeights& weights) {
  if (input.channels != layer.in_channels) shape_error("conv1d: input channels differ from layer");
  if (layer.dilation < 1 || (layer.stride != 1 && layer.stride != 2) || layer.kernel < 1 || layer.padding < 0) {
    shape_error("conv1d: invalid geometry");
  }
  const auto n_weights = static_cast<std::size_t>(layer.out_channels) * layer.in_channels * layer.kernel;
  if (weights.weights.size() != n_weights || weights.bias.size() != static_cast<std::size_t>(layer.out_channels)) {
    shape_error("conv1d: weight/bias size mismatch");
  }
  if (input.data.size() != static_cast<std::size_t>(input.channels) * input.length) {
    shape_error("conv1d: tensor data size mismatch");
  }
  const int out_len = layer.output_length(input.length);
  if (out_len <= 0) shape_error("conv1d: output length <= 0");

  // Zero-point-centred, zero-padded int16 copy of the input.
  const int padded_len = input.length + 2 * layer.padding + layer.stride;
  std::vector<std::int16_t> xp(static_cast<std::size_t>(input.channels) * padded_len, 0);
  for (int c = 0; c < input.channels; ++c) {
    std::int16_t* row = xp.data() + static_cast<std::size_t>(c) * padded_len + layer.padding;
    for (int t = 0; t < input.length; ++t) row[t] = static_cast<std::int16_t>(input.at(c, t) - input.q.zero_point);
  }
  const std::int32_t w_zp = layer.weight_q.zero_point;

  std::vector<std::int32_t> acc(static_cast<std::size_t>(layer.out_channels) * out_len);
  for (int co = 0; co < layer.out_channels; ++co) {
    std::int32_t* out = acc.data() + static_cast<std::size_t>(co) * out_len;
    std::fill(out, out + out_len, weights.bias[co]);
    for (int ci = 0; ci < layer.in_channels; ++ci) {
      const std::int16_t* row = xp.data() + static_cast<std::size_t>(ci) * padded_len;
      for (int j = 0; j < layer.kernel; ++j) {
        const std::int32_t w =
            weights.weights[(static_cast<std::size_t>(co) * layer.in_channels + ci) * layer.kernel + j] - w_zp;
        if (w == 0) continue;
        const std::int16_t* tap = row + j * layer.dilation;
        if (layer.stride == 1) {
          for (int t = 0; t < out_len; ++t) out[t] += w * tap[t];
        } else {
          for (int t = 0; t < out_len; ++t) out[t] += w * tap[2 * t];
        }
      }
    }
  }
  return acc;
}

QTensor requantize(std::span<const std::int32_t> acc, int channels, int length, double input_scale,
                   const ConvLayerSpec& layer) {
  if (acc.size() != static_cast<std::size_t>(channels) * length) shape_error("requantize: size mismatch");
  QTensor out(channels, length, layer.output_q);
  const double multiplier = input_scale * layer.weight_q.scale / layer.output_q.scale;
  const std::int64_t zp = layer.output_q.zero_point;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    std::int64_t q = static_cast<std::int64_t>(round_half_away(static_cast<double>(acc[i]) * multiplier)) + zp;
    if (layer.relu) q = std::max(q, zp);
    out.data[i] = saturate(q);
  }
  return out;
}

QTensor conv1d(const QTensor& input, const ConvLayerSpec& layer, const LayerWeights& weights) {
  check_quant(input.q, "conv1d input");
  check_quant(layer.weight_q, "conv1d weights");
  check_quant(layer.output_q, "conv1d output");
  const auto acc = conv1d_accumulate(input, layer, weights);
  return requantize(acc, layer.out_channels, layer.output_length(input.length), input.q.scale, layer);
}

QTensor avg_pool(const QTensor& input, int factor) {
  if (factor < 1) shape_error("avg_pool: factor must be >= 1");
  if (factor == 1) return input;
  const int out_len = input.length / factor;
  if (out_len <= 0) shape_error("avg_pool: output length <= 0");
  QTensor out(input.channels, out_len, input.q);
  for (int c = 0; c < input.channels; ++c) {
    for (int t = 0; t < out_len; ++t) {
      std::int32_t sum = 0;
      for (int k = 0; k < factor; ++k) sum += input.at(c, t * factor + k) - input.q.zero_point;
      out.at(c, t) = saturate(static_cast<std::int64_t>(round_half_away(static_cast<double>(sum) / factor)) +
                              input.q.zero_point);
    }
  }
  return out;
}

std::array<std::vector<double>, 4> normalized_channels(const signal::SampleWindow& window) {
  std::array<std::vector<double>, 4> out;
  const std::array<const signal::Channel*, 4> src = {&window.ppg, &window.accel[0], &window.accel[1], &window.accel[2]};
  for (std::size_t c = 0; c < 4; ++c) {
    const signal::Channel& x = *src[c];
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(x.size()));
    out[c].resize(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) out[c][n] = sd > 1e-12 ? (x[n] - mean) / sd : 0.0;
  }
  return out;
}

QTensor quantize_input(const TcnSpec& spec, const signal::SampleWindow& window) {
  check_quant(spec.input_q, "input");
  if (spec.input_channels != 4 || spec.input_length != static_cast<int>(signal::kWindowLength)) {
    shape_error("network input must be 4 x 256");
  }
  const auto channels = normalized_channels(window);
  QTensor x(4, spec.input_length, spec.input_q);
  for (int c = 0; c < 4; ++c) {
    for (int t = 0; t < spec.input_length; ++t) x.at(c, t) = quantize_value(channels[c][t], spec.input_q);
  }
  return x;
}

HrEstimate tcn_infer(const TcnSpec& spec, const TcnWeights& weights, const signal::SampleWindow& window) {
  validate(spec, weights);
  QTensor x = quantize_input(spec, window);
  for (int b = 0; b < 3; ++b) {
    for (int l = 0; l < 3; ++l) x = conv1d(x, spec.blocks[b].layers[l], weights.conv[b * 3 + l]);
    x = avg_pool(x, spec.blocks[b].pool);
  }

  const std::int64_t w_zp = spec.head.weight_q.zero_point;
  std::int64_t acc = static_cast<std::int64_t>(weights.head.bias[0]) * x.length;
  for (int c = 0; c < x.channels; ++c) {
    std::int64_t sum = 0;
    for (int t = 0; t < x.length; ++t) sum += x.at(c, t) - x.q.zero_point;
    acc += (weights.head.weights[c] - w_zp) * sum;
  }
  const double bpm = static_cast<double>(acc) * x.q.scale * spec.head.weight_q.scale / x.length;
  return HrEstimate{clamp_bpm(bpm)};
}

OpCount count_layer_ops(const ConvLayerSpec& layer, int input_length) {
  const std::int64_t taps = static_cast<std::int64_t>(layer.in_channels) * layer.out_channels * layer.kernel;
  return OpCount{taps + layer.out_channels, taps * layer.output_length(input_length)};
}

OpCount count_ops(const TcnSpec& spec) {
  OpCount total;
  int length = spec.input_length;
  for (const TcnBlockSpec& block : spec.blocks) {
    for (const ConvLayerSpec& layer : block.layers) {
      total += count_layer_ops(layer, length);
      length = layer.output_length(length);
    }
    length /= std::max(block.pool, 1);
  }
  total += OpCount{spec.head.in_channels + 1, spec.head.in_channels};
  return total;
}

TcnSpec timeppg_small_spec() { return make_spec("TimePPG-Small", {6, 8, 24}, {4, 1, 1}); }

TcnSpec timeppg_big_spec() { return make_spec("TimePPG-Big", {64, 96, 128}, {1, 1, 1}); }

TcnSpec architecture_for(ModelKind kind) {
  switch (kind) {
    case ModelKind::TimePPGSmall: return timeppg_small_spec();
    case ModelKind::TimePPGBig: return timeppg_big_spec();
    case ModelKind::AT: break;
  }
  throw Error(ErrorKind::InvalidArgument, "AT has no network architecture");
}

}  // namespace chris::predictors
