#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "chris/signal.hpp"
#include "chris/types.hpp"

namespace chris::difficulty {

/// Statistics of the per-sample acceleration magnitude sqrt(ax^2+ay^2+az^2).
struct FeatureVector {
  double mean = 0.0;
  double energy = 0.0;  // mean of squares
  double std = 0.0;     // population standard deviation
  int n_peaks = 0;      // strict sign changes of the discrete derivative

  static constexpr int kCount = 4;
  double operator[](int index) const;
};

FeatureVector extract_features(const std::array<signal::Channel, 3>& accel);
FeatureVector extract_features(std::span<const double> ax, std::span<const double> ay, std::span<const double> az);

/// Features of a scalar signal (the magnitude is computed by the overloads above).
FeatureVector magnitude_features(std::span<const double> magnitude);

inline constexpr int kTrees = 8;
inline constexpr int kMaxDepth = 5;

/// Flat binary tree. Leaves have feature == -1. A sample goes left when
/// feature value <= threshold.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int label = ActivityId::kMin;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  ActivityId predict(const FeatureVector& f) const;
  int depth() const;  // internal nodes on the longest root-to-leaf path
};

struct RandomForest {
  std::vector<DecisionTree> trees;
};

/// Throws InvalidArgument unless the forest has 8 trees of depth <= 5 with
/// valid feature indices, children and labels.
void validate(const RandomForest& forest);

/// Majority vote of the trees; ties go to the higher activity id.
ActivityId rf_predict(const RandomForest& forest, const FeatureVector& f);

struct LabeledFeatures {
  FeatureVector features;
  ActivityId activity;
};

struct TrainOptions {
  int trees = kTrees;
  int max_depth = kMaxDepth;
  int features_per_split = 2;  // sqrt(4)
  std::uint64_t seed = 0;
};

/// Bagged CART (Gini impurity, random feature subset per split), deterministic
/// for a given seed. Throws EmptyDataset.
RandomForest rf_train(std::span<const LabeledFeatures> dataset, const TrainOptions& options = {});

std::vector<LabeledFeatures> labeled_features(std::span<const signal::SampleWindow> windows);

/// Versioned JSON: {"format":"chris-forest","version":1,"features":[...],
/// "trees":[node,...]} with node = {"feature","threshold","left","right"} or
/// {"leaf": activity}.
std::string forest_to_json(const RandomForest& forest);
RandomForest forest_from_json(const std::string& json);
void save_forest(const RandomForest& forest, const std::filesystem::path& path);
RandomForest load_forest(const std::filesystem::path& path);

/// Anything mapping a window to a predicted activity.
class ActivityClassifier {
 public:
  virtual ~ActivityClassifier() = default;
  virtual ActivityId classify(const signal::SampleWindow& window) const = 0;
};

class ForestClassifier final : public ActivityClassifier {
 public:
  explicit ForestClassifier(RandomForest forest);
  ActivityId classify(const signal::SampleWindow& window) const override;
  const RandomForest& forest() const noexcept { return forest_; }

 private:
  RandomForest forest_;
};

/// Returns the window's true label: a perfect classifier.
class OracleClassifier final : public ActivityClassifier {
 public:
  ActivityId classify(const signal::SampleWindow& window) const override { return window.activity; }
};

}  // namespace chris::difficulty
