#include "chris/difficulty.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace chris::difficulty {
namespace {

using Counts = std::array<int, ActivityId::kMax + 1>;

int majority(const Counts& counts) {
  int best = ActivityId::kMin;
  for (int a = ActivityId::kMin; a <= ActivityId::kMax; ++a) {
    if (counts[a] >= counts[best]) best = a;
  }
  return best;
}

double gini(const Counts& counts, int total) {
  if (total == 0) return 0.0;
  double sum_sq = 0.0;
  for (int a = ActivityId::kMin; a <= ActivityId::kMax; ++a) {
    const double p = static_cast<double>(counts[a]) / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

class TreeBuilder {
 public:
  TreeBuilder(std::span<const LabeledFeatures> data, const TrainOptions& options, std::mt19937_64& rng)
      : data_(data), options_(options), rng_(rng) {}

  DecisionTree build(std::vector<int> sample) {
    tree_.nodes.clear();
    grow(sample, 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<int>& idx, int depth) {
    const int node = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    Counts counts{};
    for (int i : idx) ++counts[data_[i].activity.value()];
    const int total = static_cast<int>(idx.size());
    tree_.nodes[node].label = majority(counts);

    const bool pure = counts[tree_.nodes[node].label] == total;
    if (pure || depth >= options_.max_depth || total < 2) return node;

    std::array<int, FeatureVector::kCount> features{0, 1, 2, 3};
    const int k = std::clamp(options_.features_per_split, 1, FeatureVector::kCount);
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<int> pick(i, FeatureVector::kCount - 1);
      std::swap(features[i], features[pick(rng_)]);
    }

    const double parent = gini(counts, total);
    double best_score = parent;
    int best_feature = -1;
    double best_threshold = 0.0;
    for (int fi = 0; fi < k; ++fi) {
      const int f = features[fi];
      std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        const double va = data_[a].features[f], vb = data_[b].features[f];
        return va < vb || (va == vb && a < b);
      });
      Counts left{};
      for (int pos = 0; pos + 1 < total; ++pos) {
        ++left[data_[idx[pos]].activity.value()];
        const double v = data_[idx[pos]].features[f];
        const double next = data_[idx[pos + 1]].features[f];
        if (v == next) continue;
        Counts right{};
        for (int a = ActivityId::kMin; a <= ActivityId::kMax; ++a) right[a] = counts[a] - left[a];
        const int nl = pos + 1, nr = total - nl;
        const double score = (nl * gini(left, nl) + nr * gini(right, nr)) / total;
        if (score < best_score - 1e-12) {
          best_score = score;
          best_feature = f;
          best_threshold = 0.5 * (v + next);
        }
      }
    }
    if (best_feature < 0) return node;

    std::vector<int> left_idx, right_idx;
    for (int i : idx) {
      (data_[i].features[best_feature] <= best_threshold ? left_idx : right_idx).push_back(i);
    }
    tree_.nodes[node].feature = best_feature;
    tree_.nodes[node].threshold = best_threshold;
    const int l = grow(left_idx, depth + 1);
    const int r = grow(right_idx, depth + 1);
    tree_.nodes[node].left = l;
    tree_.nodes[node].right = r;
    return node;
  }

  std::span<const LabeledFeatures> data_;
  const TrainOptions& options_;
  std::mt19937_64& rng_;
  DecisionTree tree_;
};

using nlohmann::json;

json node_to_json(const DecisionTree& tree, int index) {
  const TreeNode& n = tree.nodes[index];
  if (n.feature < 0) return {{"leaf", n.label}};
  return {{"feature", n.feature},
          {"threshold", n.threshold},
          {"left", node_to_json(tree, n.left)},
          {"right", node_to_json(tree, n.right)}};
}

int node_from_json(DecisionTree& tree, const json& j, int depth) {
  if (depth > 64) throw Error(ErrorKind::InvalidArgument, "forest JSON nested too deeply");
  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("leaf")) {
    tree.nodes[index].label = ActivityId(j.at("leaf").get<int>()).value();
    return index;
  }
  tree.nodes[index].feature = j.at("feature").get<int>();
  tree.nodes[index].threshold = j.at("threshold").get<double>();
  const int l = node_from_json(tree, j.at("left"), depth + 1);
  const int r = node_from_json(tree, j.at("right"), depth + 1);
  tree.nodes[index].left = l;
  tree.nodes[index].right = r;
  return index;
}

int depth_from(const DecisionTree& tree, int index) {
  const TreeNode& n = tree.nodes[index];
  if (n.feature < 0) return 0;
  return 1 + std::max(depth_from(tree, n.left), depth_from(tree, n.right));
}

}  // namespace

double FeatureVector::operator[](int index) const {
  switch (index) {
    case 0: return mean;
    case 1: return energy;
    case 2: return std;
    case 3: return static_cast<double>(n_peaks);
  }
  throw Error(ErrorKind::InvalidArgument, "feature index " + std::to_string(index) + " outside 0..3");
}

FeatureVector magnitude_features(std::span<const double> m) {
  FeatureVector f;
  if (m.empty()) return f;
  const auto n = static_cast<double>(m.size());
  double sum = 0.0, sum_sq = 0.0;
  for (double v : m) {
    sum += v;
    sum_sq += v * v;
  }
  f.mean = sum / n;
  f.energy = sum_sq / n;
  double var = 0.0;
  for (double v : m) var += (v - f.mean) * (v - f.mean);
  f.std = std::sqrt(var / n);
  for (std::size_t i = 1; i + 1 < m.size(); ++i) {
    const double d_prev = m[i] - m[i - 1];
    const double d_next = m[i + 1] - m[i];
    if ((d_prev > 0.0 && d_next < 0.0) || (d_prev < 0.0 && d_next > 0.0)) ++f.n_peaks;
  }
  return f;
}

FeatureVector extract_features(std::span<const double> ax, std::span<const double> ay, std::span<const double> az) {
  if (ax.size() != ay.size() || ax.size() != az.size()) {
    throw Error(ErrorKind::ShapeMismatch, "accelerometer axes differ in length");
  }
  std::vector<double> m(ax.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::sqrt(ax[i] * ax[i] + ay[i] * ay[i] + az[i] * az[i]);
  return magnitude_features(m);
}

FeatureVector extract_features(const std::array<signal::Channel, 3>& accel) {
  return extract_features(accel[0], accel[1], accel[2]);
}

ActivityId DecisionTree::predict(const FeatureVector& f) const {
  int i = 0;
  while (nodes[i].feature >= 0) i = f[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  return ActivityId(nodes[i].label);
}

int DecisionTree::depth() const { return nodes.empty() ? 0 : depth_from(*this, 0); }

void validate(const RandomForest& forest) {
  if (forest.trees.size() != static_cast<std::size_t>(kTrees)) {
    throw Error(ErrorKind::InvalidArgument, "forest must have exactly 8 trees");
  }
  for (const auto& tree : forest.trees) {
    if (tree.nodes.empty()) throw Error(ErrorKind::InvalidArgument, "empty tree");
    const int n = static_cast<int>(tree.nodes.size());
    for (int i = 0; i < n; ++i) {
      const TreeNode& node = tree.nodes[i];
      if (node.feature < 0) {
        if (node.label < ActivityId::kMin || node.label > ActivityId::kMax) {
          throw Error(ErrorKind::InvalidArgument, "leaf label outside 1..9");
        }
        continue;
      }
      if (node.feature >= FeatureVector::kCount) throw Error(ErrorKind::InvalidArgument, "invalid feature index");
      // Children come after their parent in the flat layout, which also rules out cycles.
      if (node.left <= i || node.right <= i || node.left >= n || node.right >= n) {
        throw Error(ErrorKind::InvalidArgument, "invalid child index");
      }
    }
    if (tree.depth() > kMaxDepth) throw Error(ErrorKind::InvalidArgument, "tree deeper than 5");
  }
}

ActivityId rf_predict(const RandomForest& forest, const FeatureVector& f) {
  Counts votes{};
  for (const auto& tree : forest.trees) ++votes[tree.predict(f).value()];
  return ActivityId(majority(votes));
}

RandomForest rf_train(std::span<const LabeledFeatures> dataset, const TrainOptions& options) {
  if (dataset.empty()) throw Error(ErrorKind::EmptyDataset, "no training samples");
  if (options.trees < 1 || options.max_depth < 0) throw Error(ErrorKind::InvalidArgument, "bad forest options");
  std::mt19937_64 rng(options.seed);
  const int n = static_cast<int>(dataset.size());
  std::uniform_int_distribution<int> draw(0, n - 1);
  RandomForest forest;
  TreeBuilder builder(dataset, options, rng);
  for (int t = 0; t < options.trees; ++t) {
    std::vector<int> sample(n);
    for (int& s : sample) s = draw(rng);
    forest.trees.push_back(builder.build(std::move(sample)));
  }
  return forest;
}

std::vector<LabeledFeatures> labeled_features(std::span<const signal::SampleWindow> windows) {
  std::vector<LabeledFeatures> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back({extract_features(w.accel), w.activity});
  return out;
}

std::string forest_to_json(const RandomForest& forest) {
  json trees = json::array();
  for (const auto& tree : forest.trees) trees.push_back(node_to_json(tree, 0));
  json j = {{"format", "chris-forest"},
            {"version", 1},
            {"features", {"mean", "energy", "std", "n_peaks"}},
            {"input", "accel_magnitude"},
            {"decision", "feature <= threshold goes left"},
            {"vote", "majority, ties to higher activity"},
            {"trees", trees}};
  return j.dump(2);
}

RandomForest forest_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "chris-forest" || j.value("version", 0) != 1) {
      throw Error(ErrorKind::InvalidArgument, "not a chris-forest v1 document");
    }
    RandomForest forest;
    for (const auto& tj : j.at("trees")) {
      DecisionTree tree;
      node_from_json(tree, tj, 0);
      forest.trees.push_back(std::move(tree));
    }
    validate(forest);
    return forest;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("forest JSON: ") + e.what());
  }
}

void save_forest(const RandomForest& forest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << forest_to_json(forest) << '\n';
}

RandomForest load_forest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return forest_from_json(buf.str());
}

ForestClassifier::ForestClassifier(RandomForest forest) : forest_(std::move(forest)) { validate(forest_); }

ActivityId ForestClassifier::classify(const signal::SampleWindow& window) const {
  return rf_predict(forest_, extract_features(window.accel));
}

}  // namespace chris::difficulty
