#include "chris/bank.hpp"

#include <memory>

namespace chris::predictors {

PredictorBank::PredictorBank() {
  set(ModelKind::AT, [](const signal::SampleWindow& w) -> std::optional<double> {
    if (auto est = at_try_predict(w.ppg)) return est->bpm;
    return std::nullopt;
  });
}

void PredictorBank::set(ModelKind kind, PredictFn fn) { fns_[static_cast<std::size_t>(kind)] = std::move(fn); }

void PredictorBank::set_tcn(ModelKind kind, QuantizedTcn model) {
  validate(model.spec, model.weights);
  auto shared = std::make_shared<const QuantizedTcn>(std::move(model));
  set(kind, [shared](const signal::SampleWindow& w) -> std::optional<double> {
    return tcn_infer(shared->spec, shared->weights, w).bpm;
  });
}

bool PredictorBank::has(ModelKind kind) const { return static_cast<bool>(fns_[static_cast<std::size_t>(kind)]); }

std::optional<double> PredictorBank::predict(ModelKind kind, const signal::SampleWindow& window) const {
  const auto& fn = fns_[static_cast<std::size_t>(kind)];
  if (!fn) throw Error(ErrorKind::InvalidArgument, "no predictor loaded for " + std::string(to_string(kind)));
  return fn(window);
}

PredictorBank default_bank(const BuildOptions& options) {
  PredictorBank bank;
  bank.set_tcn(ModelKind::TimePPGSmall, build_tcn(ModelKind::TimePPGSmall, options));
  bank.set_tcn(ModelKind::TimePPGBig, build_tcn(ModelKind::TimePPGBig, options));
  return bank;
}

PredictionCache::PredictionCache(const PredictorBank& bank, std::span<const signal::SampleWindow> windows)
    : bank_(bank), windows_(windows) {
  for (std::size_t k = 0; k < 3; ++k) {
    values_[k].resize(windows.size());
    ready_[k].assign(windows.size(), false);
  }
}

std::optional<double> PredictionCache::get(ModelKind kind, std::size_t index) {
  const auto k = static_cast<std::size_t>(kind);
  if (index >= windows_.size()) throw Error(ErrorKind::InvalidArgument, "window index out of range");
  if (!ready_[k][index]) {
    values_[k][index] = bank_.predict(kind, windows_[index]);
    ready_[k][index] = true;
  }
  return values_[k][index];
}

}  // namespace chris::predictors
