#include <cstring>
#include <fstream>
#include <iterator>

#include "chris/tcn.hpp"
#include "json.hpp"

namespace chris::predictors {
namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'C', 'H', 'R', 'I', 'S', 'T', 'C', 'N'};

json quant_to_json(const QuantParams& q) { return {{"scale", q.scale}, {"zero_point", q.zero_point}}; }

QuantParams quant_from_json(const json& j) {
  if (j.is_null()) return {};
  return QuantParams{j.value("scale", 0.0), j.value("zero_point", 0)};
}

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw Error(ErrorKind::ShapeMismatch, "TCN container truncated");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void write_layer(Writer& w, const LayerWeights& layer) {
  w.u32(static_cast<std::uint32_t>(layer.weights.size()));
  w.raw(layer.weights.data(), layer.weights.size());
  w.u32(static_cast<std::uint32_t>(layer.bias.size()));
  for (std::int32_t b : layer.bias) w.i32(b);
}

LayerWeights read_layer(Reader& r) {
  LayerWeights layer;
  const auto n = r.u32();
  const auto raw = r.take(n);
  layer.weights.resize(n);
  std::memcpy(layer.weights.data(), raw.data(), n);
  const auto m = r.u32();
  layer.bias.resize(m);
  for (auto& b : layer.bias) b = r.i32();
  return layer;
}

}  // namespace

std::string tcn_spec_to_json(const TcnSpec& spec) {
  json blocks = json::array();
  for (const auto& block : spec.blocks) {
    json layers = json::array();
    for (const auto& l : block.layers) {
      layers.push_back({{"in_channels", l.in_channels},
                        {"out_channels", l.out_channels},
                        {"kernel", l.kernel},
                        {"dilation", l.dilation},
                        {"stride", l.stride},
                        {"padding", l.padding},
                        {"relu", l.relu},
                        {"weight_q", quant_to_json(l.weight_q)},
                        {"output_q", quant_to_json(l.output_q)}});
    }
    blocks.push_back({{"layers", layers}, {"pool", block.pool}});
  }
  json j = {{"format", "chris-tcn-spec"},
            {"version", kTcnFormatVersion},
            {"name", spec.name},
            {"input_channels", spec.input_channels},
            {"input_length", spec.input_length},
            {"input_q", quant_to_json(spec.input_q)},
            {"blocks", blocks},
            {"head", {{"in_channels", spec.head.in_channels}, {"pooling", "global_average"},
                      {"weight_q", quant_to_json(spec.head.weight_q)}}}};
  return j.dump(2);
}

TcnSpec tcn_spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ShapeMismatch, std::string("TCN spec JSON: ") + e.what());
  }
  if (j.value("format", "") != "chris-tcn-spec") throw Error(ErrorKind::ShapeMismatch, "not a chris-tcn-spec document");
  if (j.value("version", 0u) != kTcnFormatVersion) throw Error(ErrorKind::ShapeMismatch, "unsupported TCN spec version");
  try {
    TcnSpec spec;
    spec.name = j.at("name").get<std::string>();
    spec.input_channels = j.at("input_channels").get<int>();
    spec.input_length = j.at("input_length").get<int>();
    spec.input_q = quant_from_json(j.value("input_q", json()));
    const auto& blocks = j.at("blocks");
    if (blocks.size() != 3) throw Error(ErrorKind::ShapeMismatch, "expected 3 blocks");
    for (std::size_t b = 0; b < 3; ++b) {
      const auto& layers = blocks[b].at("layers");
      if (layers.size() != 3) throw Error(ErrorKind::ShapeMismatch, "expected 3 layers per block");
      for (std::size_t l = 0; l < 3; ++l) {
        const auto& lj = layers[l];
        ConvLayerSpec& layer = spec.blocks[b].layers[l];
        layer.in_channels = lj.at("in_channels").get<int>();
        layer.out_channels = lj.at("out_channels").get<int>();
        layer.kernel = lj.at("kernel").get<int>();
        layer.dilation = lj.at("dilation").get<int>();
        layer.stride = lj.at("stride").get<int>();
        layer.padding = lj.at("padding").get<int>();
        layer.relu = lj.value("relu", true);
        layer.weight_q = quant_from_json(lj.value("weight_q", json()));
        layer.output_q = quant_from_json(lj.value("output_q", json()));
      }
      spec.blocks[b].pool = blocks[b].value("pool", 1);
    }
    spec.head.in_channels = j.at("head").at("in_channels").get<int>();
    spec.head.weight_q = quant_from_json(j.at("head").value("weight_q", json()));
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ShapeMismatch, std::string("TCN spec JSON: ") + e.what());
  }
}

std::vector<std::uint8_t> encode_tcn(const QuantizedTcn& model) {
  validate(model.spec, model.weights);
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kTcnFormatVersion);
  const std::string spec = tcn_spec_to_json(model.spec);
  w.u32(static_cast<std::uint32_t>(spec.size()));
  w.raw(spec.data(), spec.size());
  for (const auto& layer : model.weights.conv) write_layer(w, layer);
  write_layer(w, model.weights.head);
  return w.take();
}

QuantizedTcn decode_tcn(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.take(sizeof kMagic);
  if (std::memcmp(magic.data(), kMagic, sizeof kMagic) != 0) throw Error(ErrorKind::ShapeMismatch, "bad TCN magic");
  if (r.u32() != kTcnFormatVersion) throw Error(ErrorKind::ShapeMismatch, "unsupported TCN container version");
  const auto len = r.u32();
  const auto spec_bytes = r.take(len);
  QuantizedTcn model;
  model.spec = tcn_spec_from_json(std::string(spec_bytes.begin(), spec_bytes.end()));
  for (auto& layer : model.weights.conv) layer = read_layer(r);
  model.weights.head = read_layer(r);
  if (!r.done()) throw Error(ErrorKind::ShapeMismatch, "trailing bytes in TCN container");
  validate(model.spec, model.weights);
  return model;
}

void save_tcn(const QuantizedTcn& model, const std::filesystem::path& path) {
  const auto bytes = encode_tcn(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

QuantizedTcn load_tcn(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_tcn(bytes);
}

}  // namespace chris::predictors
