#pragma once

// Blob features and multi-category boosted decision trees (SAMME), producing
// per-category likelihoods for the data term.

#include <numbers>
#include <random>

#include "textline/imaging.hpp"
#include "textline/io.hpp"

namespace textline {

inline constexpr std::size_t kIntensityBins = 16;
inline constexpr std::size_t kOrientationBins = 8;
inline constexpr std::size_t kGradientCells = 4;  // 2 x 2
inline constexpr std::size_t kPatchSize = 24;
inline constexpr std::size_t kGradientOffset = kIntensityBins;
inline constexpr std::size_t kGeometryOffset = kIntensityBins + kOrientationBins * kGradientCells;
inline constexpr std::size_t kFeatureLength = kGeometryOffset + 3;

using FeatureVector = std::array<double, kFeatureLength>;

// Layout: [0,16) normalized intensity histogram; [16,48) unsigned gradient
// orientation histogram, 8 bins per 12x12 cell of the 24x24 patch, cells in
// row-major order, magnitude-weighted and L1-normalized as one block;
// [48,51) box width, height and width/height.
inline FeatureVector extract_features(const GrayImage& img, const Box& box) {
  if (!box.valid() || box.area() < 4.0) throw Error("degenerate box");
  if (box.left < 0 || box.top < 0 || box.right > static_cast<double>(img.width) ||
      box.bottom > static_cast<double>(img.height))
    throw Error("box outside image");

  const auto x0 = static_cast<std::size_t>(std::floor(box.left));
  const auto y0 = static_cast<std::size_t>(std::floor(box.top));
  const auto x1 = std::max(x0 + 1, static_cast<std::size_t>(std::ceil(box.right)));
  const auto y1 = std::max(y0 + 1, static_cast<std::size_t>(std::ceil(box.bottom)));
  const std::size_t pw = x1 - x0, ph = y1 - y0;

  std::array<std::array<int, kPatchSize>, kPatchSize> patch{};
  for (std::size_t v = 0; v < kPatchSize; ++v)
    for (std::size_t u = 0; u < kPatchSize; ++u) {
      std::size_t sx = x0 + std::min(pw - 1, u * pw / kPatchSize);
      std::size_t sy = y0 + std::min(ph - 1, v * ph / kPatchSize);
      patch[v][u] = img.at(sx, sy);
    }

  FeatureVector f{};
  for (const auto& row : patch)
    for (int p : row) f[static_cast<std::size_t>(p) * kIntensityBins / 256] += 1.0;
  for (std::size_t k = 0; k < kIntensityBins; ++k) f[k] /= static_cast<double>(kPatchSize * kPatchSize);

  // Central differences; edge pixels reuse their neighbour.
  double grad_total = 0.0;
  for (std::size_t v = 0; v < kPatchSize; ++v)
    for (std::size_t u = 0; u < kPatchSize; ++u) {
      std::size_t ul = u == 0 ? 0 : u - 1, ur = u + 1 == kPatchSize ? u : u + 1;
      std::size_t vu = v == 0 ? 0 : v - 1, vd = v + 1 == kPatchSize ? v : v + 1;
      double gx = patch[v][ur] - patch[v][ul];
      double gy = patch[vd][u] - patch[vu][u];
      double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double angle = std::atan2(gy, gx);
      if (angle < 0) angle += std::numbers::pi;
      auto bin = std::min(kOrientationBins - 1, static_cast<std::size_t>(angle / std::numbers::pi * kOrientationBins));
      std::size_t cell = (v / (kPatchSize / 2)) * 2 + (u / (kPatchSize / 2));
      f[kGradientOffset + cell * kOrientationBins + bin] += mag;
      grad_total += mag;
    }
  if (grad_total > 0.0)
    for (std::size_t k = kGradientOffset; k < kGeometryOffset; ++k) f[k] /= grad_total;

  f[kGeometryOffset + 0] = box.width();
  f[kGeometryOffset + 1] = box.height();
  f[kGeometryOffset + 2] = box.width() / box.height();
  return f;
}

// Axis-aligned decision tree stored as a flat node array; node 0 is the root.
struct DecisionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;   // taken when f[feature] <= threshold
    int right = -1;
    Category label = Category::NonText;
  };
  std::vector<Node> nodes;

  Category predict(const FeatureVector& f) const {
    std::size_t k = 0;
    while (nodes[k].feature >= 0)
      k = static_cast<std::size_t>(f[static_cast<std::size_t>(nodes[k].feature)] <= nodes[k].threshold ? nodes[k].left
                                                                                                       : nodes[k].right);
    return nodes[k].label;
  }
};

struct BoostRound {
  DecisionTree tree;
  double alpha = 0.0;
};

struct BoostModel {
  std::vector<BoostRound> rounds;
};

struct TrainingExample {
  FeatureVector features{};
  Category category = Category::NonText;
};

using TrainingSet = std::vector<TrainingExample>;

struct BoostParams {
  int rounds = 100;
  int depth_max = 2;
  std::uint64_t seed = 0;
  double feature_fraction = 1.0;  // features examined per split; < 1 samples them with the seed
};

namespace detail {

using ClassWeights = std::array<double, kNumCategories>;

inline Category weighted_majority(const ClassWeights& w) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumCategories; ++c)
    if (w[c] > w[best]) best = c;
  return static_cast<Category>(best);
}

inline double misclassified(const ClassWeights& w) {
  double total = 0.0;
  for (double v : w) total += v;
  return total - *std::max_element(w.begin(), w.end());
}

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& data, const std::vector<double>& weights, int depth_max,
              const std::vector<std::size_t>& features)
      : data_(data), weights_(weights), depth_max_(depth_max), features_(features) {}

  DecisionTree build() {
    std::vector<std::size_t> all(data_.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    DecisionTree tree;
    grow(tree, all, 0);
    return tree;
  }

 private:
  ClassWeights class_weights(const std::vector<std::size_t>& idx) const {
    ClassWeights w{};
    for (std::size_t i : idx) w[index_of(data_[i].category)] += weights_[i];
    return w;
  }

  int grow(DecisionTree& tree, const std::vector<std::size_t>& idx, int depth) {
    int me = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    ClassWeights w = class_weights(idx);
    tree.nodes[me].label = weighted_majority(w);
    double leaf_error = misclassified(w);
    if (depth >= depth_max_ || leaf_error <= 0.0) return me;

    // Best split by weighted misclassification of the two majority leaves.
    double best_error = leaf_error;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::size_t> sorted = idx;
    for (std::size_t feat : features_) {
      std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        return data_[a].features[feat] < data_[b].features[feat];
      });
      ClassWeights lw{};
      ClassWeights rw = w;
      for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
        std::size_t i = sorted[k];
        lw[index_of(data_[i].category)] += weights_[i];
        rw[index_of(data_[i].category)] -= weights_[i];
        double here = data_[i].features[feat];
        double next = data_[sorted[k + 1]].features[feat];
        if (!(here < next)) continue;
        double err = misclassified(lw) + misclassified(rw);
        if (err < best_error - 1e-12) {
          best_error = err;
          best_feature = static_cast<int>(feat);
          best_threshold = 0.5 * (here + next);
        }
      }
    }
    if (best_feature < 0) return me;

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx)
      (data_[i].features[static_cast<std::size_t>(best_feature)] <= best_threshold ? left : right).push_back(i);
    tree.nodes[me].feature = best_feature;
    tree.nodes[me].threshold = best_threshold;
    int l = grow(tree, left, depth + 1);
    int r = grow(tree, right, depth + 1);
    tree.nodes[me].left = l;
    tree.nodes[me].right = r;
    return me;
  }

  const TrainingSet& data_;
  const std::vector<double>& weights_;
  int depth_max_;
  const std::vector<std::size_t>& features_;
};

}  // namespace detail

// SAMME boosting. A weak learner is kept only while its weighted error is
// below 1 - 1/5; training stops early otherwise, or after a perfect learner.
inline BoostModel train_adaboost(const TrainingSet& data, const BoostParams& bp = {}) {
  if (bp.rounds < 1) throw Error("rounds must be at least 1");
  if (bp.depth_max < 1) throw Error("depth must be at least 1");
  if (data.empty()) throw Error("empty training set");
  constexpr double K = static_cast<double>(kNumCategories);

  std::mt19937_64 rng(bp.seed);
  std::vector<std::size_t> all_features(kFeatureLength);
  std::iota(all_features.begin(), all_features.end(), std::size_t{0});

  std::vector<double> w(data.size(), 1.0 / static_cast<double>(data.size()));
  BoostModel model;
  for (int round = 0; round < bp.rounds; ++round) {
    std::vector<std::size_t> features = all_features;
    if (bp.feature_fraction < 1.0) {
      std::shuffle(features.begin(), features.end(), rng);
      auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(bp.feature_fraction * kFeatureLength));
      features.resize(keep);
      std::sort(features.begin(), features.end());
    }
    DecisionTree tree = detail::TreeBuilder(data, w, bp.depth_max, features).build();

    double err = 0.0;
    std::vector<bool> wrong(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      wrong[i] = tree.predict(data[i].features) != data[i].category;
      if (wrong[i]) err += w[i];
    }
    if (err >= 1.0 - 1.0 / K) break;
    constexpr double kMinError = 1e-10;
    double clipped = std::max(err, kMinError);
    double alpha = std::log((1.0 - clipped) / clipped) + std::log(K - 1.0);
    model.rounds.push_back({std::move(tree), alpha});
    if (err <= 0.0) break;

    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (wrong[i]) w[i] *= std::exp(alpha);
      total += w[i];
    }
    for (double& v : w) v /= total;
  }
  return model;
}

inline std::array<double, kNumCategories> class_scores(const BoostModel& model, const FeatureVector& f) {
  std::array<double, kNumCategories> s{};
  for (const auto& r : model.rounds) s[index_of(r.tree.predict(f))] += r.alpha;
  return s;
}

inline Category predict_category(const BoostModel& model, const FeatureVector& f) {
  auto s = class_scores(model, f);
  return static_cast<Category>(std::max_element(s.begin(), s.end()) - s.begin());
}

// Softmax (temperature 1) followed by flooring at `floor`.
inline Likelihoods likelihoods_from_scores(const std::array<double, kNumCategories>& scores,
                                           double floor = kDefaultLikelihoodFloor) {
  double top = *std::max_element(scores.begin(), scores.end());
  if (!std::isfinite(top)) throw Error("non-finite class score");
  Likelihoods p{};
  for (std::size_t c = 0; c < kNumCategories; ++c) p[c] = std::exp(scores[c] - top);
  return normalize_likelihoods(p, floor);
}

// Synthetic classifier: mass `accuracy` on the true category, the rest spread
// evenly, optionally perturbed by a Dirichlet draw with concentration kappa
// (infinite kappa disables the perturbation).
template <class Rng>
Likelihoods oracle_likelihoods(Category truth, double accuracy, double kappa, Rng& rng,
                               double floor = kDefaultLikelihoodFloor) {
  if (!(accuracy >= 0.2 && accuracy <= 1.0)) throw Error("oracle accuracy must lie in [0.2, 1]");
  Likelihoods p{};
  for (std::size_t c = 0; c < kNumCategories; ++c)
    p[c] = c == index_of(truth) ? accuracy : (1.0 - accuracy) / (kNumCategories - 1.0);
  if (std::isfinite(kappa)) {
    if (!(kappa > 0.0)) throw Error("kappa must be positive");
    Likelihoods g{};
    double total = 0.0;
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      double shape = kappa * std::max(p[c], floor);
      g[c] = std::gamma_distribution<double>(shape, 1.0)(rng);
      total += g[c];
    }
    if (total > 0.0) p = g;
  }
  return normalize_likelihoods(p, floor);
}

inline double training_accuracy(const BoostModel& model, const TrainingSet& data) {
  if (data.empty()) return 0.0;
  std::size_t ok = 0;
  for (const auto& ex : data)
    if (predict_category(model, ex.features) == ex.category) ++ok;
  return static_cast<double>(ok) / static_cast<double>(data.size());
}

inline Json to_json(const BoostModel& model) {
  Json j;
  j["categories"] = Json::array();
  for (std::size_t c = 0; c < kNumCategories; ++c) j["categories"].push_back(std::string(to_string(static_cast<Category>(c))));
  j["feature_length"] = kFeatureLength;
  j["rounds"] = Json::array();
  for (const auto& r : model.rounds) {
    Json jr;
    jr["alpha"] = r.alpha;
    jr["nodes"] = Json::array();
    for (const auto& n : r.tree.nodes) {
      Json jn;
      if (n.feature < 0) {
        jn["label"] = std::string(to_string(n.label));
      } else {
        jn["feature"] = n.feature;
        jn["threshold"] = n.threshold;
        jn["left"] = n.left;
        jn["right"] = n.right;
        jn["label"] = std::string(to_string(n.label));
      }
      jr["nodes"].push_back(jn);
    }
    j["rounds"].push_back(jr);
  }
  return j;
}

inline BoostModel boost_model_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("rounds") || !j["rounds"].is_array()) throw Error("classifier: missing rounds");
  if (j.contains("feature_length") && j["feature_length"] != kFeatureLength)
    throw Error("classifier: feature length mismatch");
  BoostModel m;
  for (const auto& jr : j["rounds"]) {
    BoostRound r;
    r.alpha = detail::require_number(detail::require(jr, "alpha", "round"), "round.alpha");
    const Json& nodes = detail::require(jr, "nodes", "round");
    if (!nodes.is_array() || nodes.empty()) throw Error("classifier: round without nodes");
    for (const auto& jn : nodes) {
      DecisionTree::Node n;
      n.label = category_from_string(detail::require(jn, "label", "node").get<std::string>());
      if (jn.contains("feature")) {
        n.feature = jn["feature"].get<int>();
        n.threshold = detail::require_number(jn.at("threshold"), "node.threshold");
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
        if (n.feature < 0 || n.feature >= static_cast<int>(kFeatureLength)) throw Error("classifier: bad feature index");
      }
      r.tree.nodes.push_back(n);
    }
    const int count = static_cast<int>(r.tree.nodes.size());
    for (int k = 0; k < count; ++k) {
      const auto& n = r.tree.nodes[k];
      if (n.feature >= 0 && (n.left <= k || n.left >= count || n.right <= k || n.right >= count))
        throw Error("classifier: bad child index");
    }
    m.rounds.push_back(std::move(r));
  }
  return m;
}

}  // namespace textline
