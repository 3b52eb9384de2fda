#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "chris/at.hpp"
#include "chris/signal.hpp"
#include "chris/types.hpp"

namespace chris::predictors {

/// Per-tensor affine int8 quantization: real = scale * (q - zero_point).
struct QuantParams {
  double scale = 0.0;
  std::int32_t zero_point = 0;

  bool calibrated() const noexcept;
};

struct ConvLayerSpec {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  int dilation = 1;
  int stride = 1;
  int padding = 0;
  bool relu = true;
  QuantParams weight_q;
  QuantParams output_q;

  int output_length(int input_length) const noexcept;
};

/// Three convolutions followed by an optional average pool (factor 1 = none).
struct TcnBlockSpec {
  std::array<ConvLayerSpec, 3> layers;
  int pool = 1;
};

/// Global average pool over time, then one affine output. The int32 bias is
/// stored at scale (input scale * weight scale).
struct HeadSpec {
  int in_channels = 0;
  QuantParams weight_q;
};

struct TcnSpec {
  std::string name;
  int input_channels = 4;  // ppg, ax, ay, az
  int input_length = static_cast<int>(signal::kWindowLength);
  QuantParams input_q;
  std::array<TcnBlockSpec, 3> blocks;
  HeadSpec head;

  const ConvLayerSpec& layer(int index) const { return blocks[index / 3].layers[index % 3]; }
  ConvLayerSpec& layer(int index) { return blocks[index / 3].layers[index % 3]; }
};

inline constexpr int kConvLayers = 9;

/// Weights laid out [out_channel][in_channel][tap].
struct LayerWeights {
  std::vector<std::int8_t> weights;
  std::vector<std::int32_t> bias;
};

struct TcnWeights {
  std::array<LayerWeights, kConvLayers> conv;
  LayerWeights head;
};

struct QuantizedTcn {
  TcnSpec spec;
  TcnWeights weights;
};

struct QTensor {
  int channels = 0;
  int length = 0;
  QuantParams q;
  std::vector<std::int8_t> data;  // [channel][time]

  QTensor() = default;
  QTensor(int c, int l, QuantParams qp) : channels(c), length(l), q(qp), data(static_cast<std::size_t>(c) * l) {}
  std::int8_t& at(int c, int t) { return data[static_cast<std::size_t>(c) * length + t]; }
  std::int8_t at(int c, int t) const { return data[static_cast<std::size_t>(c) * length + t]; }
};

std::int8_t quantize_value(double real, const QuantParams& q);
double dequantize_value(std::int32_t q_value, const QuantParams& q);
std::int32_t round_half_away(double v);

/// Shapes and block structure: 3 blocks of 3 convs, two with dilation > 1 and
/// one with stride 2 per block, matching channel chains. Throws ShapeMismatch.
void check_structure(const TcnSpec& spec);
/// Structure plus every scale > 0 and weight/bias sizes. Throws
/// ShapeMismatch or UncalibratedQuantization.
void validate(const TcnSpec& spec, const TcnWeights& weights);

/// Dilated cross-correlation accumulated in int32 (bias included), before
/// requantization. Output is [out_channel][time].
std::vector<std::int32_t> conv1d_accumulate(const QTensor& input, const ConvLayerSpec& layer,
                                            const LayerWeights& weights);

/// Requantizes accumulators (scale input.scale * weight.scale) to the layer's
/// output params: round half away from zero, saturate, optional ReLU.
QTensor requantize(std::span<const std::int32_t> acc, int channels, int length, double input_scale,
                   const ConvLayerSpec& layer);

QTensor conv1d(const QTensor& input, const ConvLayerSpec& layer, const LayerWeights& weights);

/// Average pool over non-overlapping groups of `factor`; keeps the quant params.
QTensor avg_pool(const QTensor& input, int factor);

/// Per-window z-scored channels (ppg, ax, ay, az) fed to the network.
std::array<std::vector<double>, 4> normalized_channels(const signal::SampleWindow& window);

QTensor quantize_input(const TcnSpec& spec, const signal::SampleWindow& window);

/// Full int8 forward pass; the head output is dequantized to BPM and clamped
/// to (20, 300).
HrEstimate tcn_infer(const TcnSpec& spec, const TcnWeights& weights, const signal::SampleWindow& window);

struct OpCount {
  std::int64_t params = 0;
  std::int64_t macs = 0;

  OpCount& operator+=(const OpCount& o) {
    params += o.params;
    macs += o.macs;
    return *this;
  }
};

OpCount count_layer_ops(const ConvLayerSpec& layer, int input_length);
OpCount count_ops(const TcnSpec& spec);

// Architectures sized so count_ops lands near the published figures.
TcnSpec timeppg_small_spec();
TcnSpec timeppg_big_spec();
TcnSpec architecture_for(ModelKind kind);

int same_padding(int kernel, int dilation);

// ---------------------------------------------------------------------------
// Float model used to build shipped weights: random init, calibration of the
// activation ranges, and a ridge fit of the head on labeled windows.

struct FloatLayer {
  std::vector<double> weights;  // [out][in][tap]
  std::vector<double> bias;
};

struct FloatTcn {
  TcnSpec spec;
  std::array<FloatLayer, kConvLayers> conv;
  FloatLayer head;
};

FloatTcn random_float_tcn(const TcnSpec& architecture, std::uint64_t seed);

/// Global-average-pooled features entering the head; `layer_max` (optional)
/// receives the running max activation per conv layer.
std::vector<double> float_features(const FloatTcn& model, const signal::SampleWindow& window,
                                   std::array<double, kConvLayers>* layer_max = nullptr);
double float_infer(const FloatTcn& model, const signal::SampleWindow& window);

/// Ridge least squares of the head against hr_ref. Throws EmptyDataset or
/// MissingLabels.
void fit_head(FloatTcn& model, std::span<const signal::SampleWindow> windows, double ridge = 1e-2);

/// Symmetric per-tensor weight quantization; activation ranges from the max
/// observed over `calibration` times `headroom`.
QuantizedTcn quantize(const FloatTcn& model, std::span<const signal::SampleWindow> calibration,
                      double headroom = 1.25);

/// Default calibration set: one synthetic window per activity and HR step.
std::vector<signal::SampleWindow> calibration_windows(std::uint64_t seed, int per_activity = 2);

// ---------------------------------------------------------------------------
// Container: "CHRISTCN", u32 version, u32 json length, spec JSON, then for the
// 9 conv layers and the head: u32 n, int8[n] weights, u32 m, int32[m] bias.
// All integers little-endian.

inline constexpr std::uint32_t kTcnFormatVersion = 1;

std::string tcn_spec_to_json(const TcnSpec& spec);
TcnSpec tcn_spec_from_json(const std::string& json);

std::vector<std::uint8_t> encode_tcn(const QuantizedTcn& model);
QuantizedTcn decode_tcn(std::span<const std::uint8_t> bytes);
void save_tcn(const QuantizedTcn& model, const std::filesystem::path& path);
QuantizedTcn load_tcn(const std::filesystem::path& path);


struct BuildOptions {
  std::uint64_t seed = 1;
  // Synthetic labeled windows per activity for the head fit; 0 keeps the
  // random head.
  int fit_windows_per_activity = 0;
  double ridge = 1e-2;
};

/// Random conv stack, optional ridge-fitted head, int8 calibration on
/// calibration_windows(seed).
QuantizedTcn build_tcn(ModelKind kind, const BuildOptions& options = {});

/// Labeled synthetic windows spanning 40..200 BPM for every activity.
std::vector<signal::SampleWindow> training_windows(std::uint64_t seed, int per_activity);

}  // namespace chris::predictors
