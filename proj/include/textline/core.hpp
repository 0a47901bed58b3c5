#pragma once

// Shared domain types for multilingual text line fitting.
//
// Coordinates follow the image convention: x grows to the right and y grows
// downward, so a text line's base line has larger y than its mean line.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace textline {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kNumLanguages = 4;
inline constexpr std::size_t kNumCategories = 5;

// Classifier categories; the first four double as line languages.
enum class Category : std::uint8_t { English = 0, Korean, Chinese, Digit, NonText };
enum class Language : std::uint8_t { English = 0, Korean, Chinese, Digit };

inline constexpr std::array<Language, kNumLanguages> kLanguages = {
    Language::English, Language::Korean, Language::Chinese, Language::Digit};

inline constexpr std::size_t index_of(Language v) { return static_cast<std::size_t>(v); }
inline constexpr std::size_t index_of(Category c) { return static_cast<std::size_t>(c); }
inline constexpr Category to_category(Language v) { return static_cast<Category>(v); }

inline std::string_view to_string(Category c) {
  static constexpr std::array<std::string_view, kNumCategories> names = {
      "English", "Korean", "Chinese", "Digit", "NonText"};
  return names[index_of(c)];
}

inline std::string_view to_string(Language v) { return to_string(to_category(v)); }

inline Category category_from_string(std::string_view s) {
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    auto c = static_cast<Category>(k);
    if (to_string(c) == s) return c;
  }
  throw Error("unknown category '" + std::string(s) + "'");
}

inline Language language_from_string(std::string_view s) {
  auto c = category_from_string(s);
  if (c == Category::NonText) throw Error("NonText is not a line language");
  return static_cast<Language>(c);
}

struct Point2D {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2D&, const Point2D&) = default;
};

// Axis-aligned box in pixels; right/bottom are exclusive for raster-derived boxes.
struct Box {
  double left = 0.0;
  double top = 0.0;
  double right = 0.0;
  double bottom = 0.0;

  double width() const { return right - left; }
  double height() const { return bottom - top; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (left + right); }
  double center_y() const { return 0.5 * (top + bottom); }
  bool valid() const {
    return std::isfinite(left) && std::isfinite(top) && std::isfinite(right) &&
           std::isfinite(bottom) && right > left && bottom > top;
  }

  Point2D top_left() const { return {left, top}; }
  Point2D top_right() const { return {right, top}; }
  Point2D bottom_left() const { return {left, bottom}; }
  Point2D bottom_right() const { return {right, bottom}; }

  friend bool operator==(const Box&, const Box&) = default;
};

inline Box union_of(const Box& a, const Box& b) {
  return {std::min(a.left, b.left), std::min(a.top, b.top), std::max(a.right, b.right),
          std::max(a.bottom, b.bottom)};
}

inline double intersection_area(const Box& a, const Box& b) {
  double w = std::min(a.right, b.right) - std::max(a.left, b.left);
  double h = std::min(a.bottom, b.bottom) - std::max(a.top, b.top);
  return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

inline double box_iou(const Box& a, const Box& b) {
  double inter = intersection_area(a, b);
  double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

using Likelihoods = std::array<double, kNumCategories>;

inline constexpr double kDefaultLikelihoodFloor = 1e-6;

// Clamp every entry to at least `floor`, then renormalize to sum one.
inline Likelihoods normalize_likelihoods(const Likelihoods& raw, double floor = kDefaultLikelihoodFloor) {
  double total = 0.0;
  for (double v : raw) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error("degenerate likelihood: negative or non-finite entry");
    total += v;
  }
  if (total <= 0.0) throw Error("degenerate likelihood");

  // Renormalizing can push a clamped entry back under the floor, so iterate
  // on the set of entries pinned at the floor until it stabilizes.
  Likelihoods out{};
  std::array<bool, kNumCategories> pinned{};
  for (int pass = 0; pass <= static_cast<int>(kNumCategories); ++pass) {
    double free_mass = 0.0;
    std::size_t n_pinned = 0;
    for (std::size_t k = 0; k < kNumCategories; ++k) {
      if (pinned[k]) {
        ++n_pinned;
      } else {
        free_mass += raw[k];
      }
    }
    double remaining = 1.0 - floor * static_cast<double>(n_pinned);
    bool changed = false;
    for (std::size_t k = 0; k < kNumCategories; ++k) {
      if (pinned[k]) {
        out[k] = floor;
        continue;
      }
      out[k] = free_mass > 0.0 ? raw[k] / free_mass * remaining : remaining;
      if (out[k] < floor) {
        pinned[k] = true;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return out;
}

// y(x) = slope * x + intercept
struct Line {
  double slope = 0.0;
  double intercept = 0.0;

  double at(double x) const { return slope * x + intercept; }
  friend bool operator==(const Line&, const Line&) = default;
};

inline constexpr double kDefaultSlopeMax = 2.0;

using ModelId = std::int32_t;

struct LineModel {
  ModelId id = 0;
  Language language = Language::English;
  Line mean;           // upper reference line
  Line base;           // lower reference line
  double ref_x = 0.0;  // abscissa where the line height is measured

  double height_at_ref() const { return base.at(ref_x) - mean.at(ref_x); }

  bool valid(double slope_max = kDefaultSlopeMax) const {
    return std::isfinite(mean.slope) && std::isfinite(mean.intercept) && std::isfinite(base.slope) &&
           std::isfinite(base.intercept) && std::isfinite(ref_x) && std::abs(mean.slope) < slope_max &&
           std::abs(base.slope) < slope_max && height_at_ref() > 0.0;
  }
};

using ModelPool = std::vector<LineModel>;

struct TextCandidate {
  std::int64_t id = 0;
  Box box;
  Likelihoods likelihoods{0.2, 0.2, 0.2, 0.2, 0.2};

  Point2D corner_a() const { return box.top_left(); }
  Point2D corner_b() const { return box.top_right(); }
  Point2D corner_c() const { return box.bottom_left(); }
  Point2D corner_d() const { return box.bottom_right(); }

  double likelihood(Language v) const { return likelihoods[index_of(v)]; }
  double likelihood(Category c) const { return likelihoods[index_of(c)]; }
};

// A label is either a model id or the outlier label.
class Label {
 public:
  constexpr Label() = default;
  constexpr explicit Label(ModelId id) : id_(id) {}
  static constexpr Label outlier() { return Label(); }

  constexpr bool is_outlier() const { return id_ == kOutlierValue; }
  constexpr ModelId model() const { return id_; }

  friend constexpr bool operator==(Label, Label) = default;
  friend constexpr auto operator<=>(Label, Label) = default;

 private:
  static constexpr ModelId kOutlierValue = -1;
  ModelId id_ = kOutlierValue;
};

inline constexpr Label kOutlier = Label::outlier();

// Labels aligned with the blob vector they were computed for.
struct Labeling {
  std::vector<Label> labels;

  Labeling() = default;
  explicit Labeling(std::size_t n, Label fill = kOutlier) : labels(n, fill) {}

  std::size_t size() const { return labels.size(); }
  Label operator[](std::size_t i) const { return labels[i]; }
  Label& operator[](std::size_t i) { return labels[i]; }

  friend bool operator==(const Labeling&, const Labeling&) = default;
};

enum class GeometricMode : std::uint8_t { Squared, Absolute };

struct EnergyParams {
  double line_cost = 20.0;
  double language_cost = 10.0;
  double outlier_cost = 8.0;
  std::array<double, kNumLanguages> language_scale{0.5, 1.0, 1.0, 0.7};
  double likelihood_floor = kDefaultLikelihoodFloor;
  GeometricMode geometric_mode = GeometricMode::Squared;
  double slope_max = kDefaultSlopeMax;
  double min_line_height = 2.0;
  std::uint64_t rng_seed = 0;
  int max_iterations = 5;
  double convergence_tol = 1e-6;
  int extra_random = 0;

  double scale(Language v) const { return language_scale[index_of(v)]; }

  void validate() const {
    if (!(line_cost >= 0.0) || !(language_cost >= 0.0) || !(outlier_cost >= 0.0))
      throw Error("energy costs must be non-negative");
    if (!(likelihood_floor > 0.0 && likelihood_floor <= 0.1)) throw Error("likelihood_floor must lie in (0, 0.1]");
    for (double k : language_scale)
      if (!(k > 0.0) || !std::isfinite(k)) throw Error("language scales must be positive");
    if (!(slope_max > 0.0)) throw Error("slope_max must be positive");
    if (!(min_line_height > 0.0)) throw Error("min_line_height must be positive");
    if (max_iterations < 0) throw Error("max_iterations must be non-negative");
    if (!(convergence_tol >= 0.0)) throw Error("convergence_tol must be non-negative");
    if (extra_random < 0) throw Error("extra_random must be non-negative");
  }
};

// Maps model ids to pool positions.
class PoolIndex {
 public:
  explicit PoolIndex(std::span<const LineModel> pool) {
    for (std::size_t k = 0; k < pool.size(); ++k) {
      if (!index_.emplace(pool[k].id, k).second)
        throw Error("duplicate model id " + std::to_string(pool[k].id));
    }
  }

  std::optional<std::size_t> find(ModelId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t at(ModelId id) const {
    auto k = find(id);
    if (!k) throw Error("unknown model id " + std::to_string(id));
    return *k;
  }

 private:
  std::map<ModelId, std::size_t> index_;
};

inline void check_labeling(const Labeling& labeling, std::size_t n_blobs, std::span<const LineModel> pool) {
  if (labeling.size() != n_blobs) throw Error("labeling does not cover the blob set");
  PoolIndex index(pool);
  for (Label l : labeling.labels)
    if (!l.is_outlier()) index.at(l.model());
}

}  // namespace textline
