#pragma once

// Parameter re-estimation for a fixed labeling: least-squares mean/base lines
// per model, followed by a joint choice of line languages.

#include "textline/energy.hpp"

namespace textline {

// Ordinary least squares y = slope * x + intercept. A slope outside
// [-slope_max, slope_max] is clamped and the intercept refit under the clamp.
inline Line fit_line_ls(std::span<const Point2D> points, double slope_max = kDefaultSlopeMax) {
  if (points.size() < 2) throw Error("degenerate abscissae");
  long double mx = 0, my = 0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<long double>(points.size());
  my /= static_cast<long double>(points.size());
  long double sxx = 0, sxy = 0;
  for (const auto& p : points) {
    long double dx = p.x - mx;
    sxx += dx * dx;
    sxy += dx * (p.y - my);
  }
  if (sxx <= 0) throw Error("degenerate abscissae");
  double slope = static_cast<double>(sxy / sxx);
  slope = std::clamp(slope, -slope_max, slope_max);
  return {slope, static_cast<double>(my - slope * mx)};
}

namespace detail {

struct InlierGroup {
  std::vector<std::size_t> members;
  bool distinct_x = false;
};

inline std::vector<InlierGroup> group_inliers(std::span<const TextCandidate> blobs, const Labeling& labeling,
                                              std::span<const LineModel> pool) {
  PoolIndex index(pool);
  std::vector<InlierGroup> groups(pool.size());
  for (std::size_t i = 0; i < blobs.size(); ++i)
    if (!labeling[i].is_outlier()) groups[index.at(labeling[i].model())].members.push_back(i);
  // Corner abscissae (left and right of every inlier) must not all coincide;
  // two inliers are required for the fit to be usable.
  for (auto& g : groups) {
    if (g.members.size() < 2) continue;
    double x0 = blobs[g.members[0]].box.left;
    for (std::size_t i : g.members)
      if (blobs[i].box.left != x0 || blobs[i].box.right != x0) g.distinct_x = true;
  }
  return groups;
}

inline double group_unscaled_geometry(std::span<const TextCandidate> blobs, const std::vector<std::size_t>& members,
                                      const LineModel& m, const EnergyParams& params) {
  double g = 0.0;
  for (std::size_t i : members) g += unscaled_geometric_distance(blobs[i].box, m, params);
  return g;
}

inline double group_cost(std::span<const TextCandidate> blobs, const std::vector<std::size_t>& members,
                         double unscaled_geometry, Language v, const EnergyParams& params) {
  double c = params.scale(v) * unscaled_geometry;
  for (std::size_t i : members) c += classification_cost(blobs[i], v);
  return c;
}

// Least-squares candidate geometry for one inlier group.
inline std::optional<LineModel> least_squares_geometry(std::span<const TextCandidate> blobs,
                                                       const std::vector<std::size_t>& members,
                                                       const LineModel& current, const EnergyParams& params) {
  std::vector<Point2D> tops, bottoms;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i : members) {
    const TextCandidate& b = blobs[i];
    tops.push_back(b.corner_a());
    tops.push_back(b.corner_b());
    bottoms.push_back(b.corner_c());
    bottoms.push_back(b.corner_d());
    lo = std::min(lo, b.box.left);
    hi = std::max(hi, b.box.right);
  }
  LineModel m = current;
  m.mean = fit_line_ls(tops, params.slope_max);
  m.base = fit_line_ls(bottoms, params.slope_max);
  m.ref_x = 0.5 * (lo + hi);
  if (!m.valid(params.slope_max)) return std::nullopt;
  return m;
}

}  // namespace detail

// Re-estimates every model with at least two inliers of distinct abscissae.
//
// Geometry: the least-squares lines replace the current ones unless they raise
// the group's height-normalized residual (the normalizer moves with the
// lines, so least squares alone does not guarantee a decrease). Language: all
// refittable models pick languages jointly, minimizing inlier data cost plus
// the language cost of the resulting language set. Models with fewer usable
// inliers are returned unchanged. Ids, order and pool size are preserved.
inline ModelPool refit_models(std::span<const LineModel> pool, std::span<const TextCandidate> blobs,
                              const Labeling& labeling, const EnergyParams& params) {
  if (labeling.size() != blobs.size()) throw Error("labeling does not cover the blob set");
  ModelPool out(pool.begin(), pool.end());
  auto groups = detail::group_inliers(blobs, labeling, pool);

  std::vector<std::size_t> free_models;
  std::array<bool, kNumLanguages> fixed_languages{};
  std::vector<double> unscaled(pool.size(), 0.0);
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const auto& g = groups[k];
    if (g.members.empty()) continue;
    if (!g.distinct_x) {
      fixed_languages[index_of(pool[k].language)] = true;
      continue;
    }
    double current = detail::group_unscaled_geometry(blobs, g.members, pool[k], params);
    unscaled[k] = current;
    if (auto ls = detail::least_squares_geometry(blobs, g.members, pool[k], params)) {
      double fitted = detail::group_unscaled_geometry(blobs, g.members, *ls, params);
      if (fitted <= current) {
        out[k] = *ls;
        unscaled[k] = fitted;
      }
    }
    free_models.push_back(k);
  }
  if (free_models.empty()) return out;

  // Exhaustive over the 2^4 language sets the free models may draw from.
  std::vector<std::array<double, kNumLanguages>> costs(free_models.size());
  for (std::size_t f = 0; f < free_models.size(); ++f) {
    std::size_t k = free_models[f];
    for (Language v : kLanguages)
      costs[f][index_of(v)] = detail::group_cost(blobs, groups[k].members, unscaled[k], v, params);
  }
  double best_total = std::numeric_limits<double>::infinity();
  std::vector<Language> best_choice;
  for (unsigned set = 1; set < (1U << kNumLanguages); ++set) {
    double total = 0.0;
    std::vector<Language> choice(free_models.size());
    for (std::size_t f = 0; f < free_models.size(); ++f) {
      double c_best = std::numeric_limits<double>::infinity();
      for (Language v : kLanguages) {
        if (!(set >> index_of(v) & 1U)) continue;
        if (costs[f][index_of(v)] < c_best) {
          c_best = costs[f][index_of(v)];
          choice[f] = v;
        }
      }
      total += c_best;
    }
    std::array<bool, kNumLanguages> used = fixed_languages;
    for (Language v : choice) used[index_of(v)] = true;
    total += params.language_cost * static_cast<double>(std::count(used.begin(), used.end(), true));
    if (total < best_total) {
      best_total = total;
      best_choice = std::move(choice);
    }
  }
  for (std::size_t f = 0; f < free_models.size(); ++f) out[free_models[f]].language = best_choice[f];
  return out;
}

}  // namespace textline
