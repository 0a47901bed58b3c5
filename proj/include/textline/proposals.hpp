#pragma once

// Initial line hypotheses from neighbouring blob pairs, and the
// single-line-versus-outlier labelings that serve as fusion proposals.

#include <random>

#include "textline/delaunay.hpp"
#include "textline/energy.hpp"

namespace textline {

// Undirected graph over blob positions (indices into the blob vector).
struct NeighborGraph {
  std::size_t vertex_count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // u < v, sorted, unique
};

inline NeighborGraph delaunay_neighbors(std::span<const TextCandidate> blobs) {
  if (blobs.size() < 2) throw Error("neighbour graph needs at least two blobs");
  std::vector<Point2D> centers;
  centers.reserve(blobs.size());
  for (const auto& b : blobs) centers.push_back({b.box.center_x(), b.box.center_y()});

  NeighborGraph g;
  g.vertex_count = blobs.size();
  Triangulation tri = delaunay_triangulation(centers);
  if (!tri.triangles.empty()) {
    g.edges = std::move(tri.edges);
    return g;
  }
  // All centers collinear: chain them in x (then y) order.
  std::vector<std::size_t> order(blobs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return centers[a].x != centers[b].x ? centers[a].x < centers[b].x : centers[a].y < centers[b].y;
  });
  for (std::size_t k = 0; k + 1 < order.size(); ++k)
    g.edges.emplace_back(std::min(order[k], order[k + 1]), std::max(order[k], order[k + 1]));
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

// Most plausible shared language: argmax of the likelihood product, ties to the
// earlier language.
inline Language joint_language(const TextCandidate& b1, const TextCandidate& b2) {
  Language best = Language::English;
  double best_score = -1.0;
  for (Language v : kLanguages) {
    double score = b1.likelihood(v) * b2.likelihood(v);
    if (score > best_score) {
      best_score = score;
      best = v;
    }
  }
  return best;
}

// Line pair through the top-edge and bottom-edge midpoints of two blobs.
// Returns nothing for vertical pairs, steep pairs, or an inverted line pair.
inline std::optional<LineModel> model_from_pair(const TextCandidate& b1, const TextCandidate& b2,
                                                const EnergyParams& params, ModelId id = 0) {
  if (b1.id == b2.id) throw Error("model_from_pair needs two distinct blobs");
  double x1 = b1.box.center_x(), x2 = b2.box.center_x();
  if (x1 == x2) return std::nullopt;
  auto through = [&](double y1, double y2) {
    double slope = (y2 - y1) / (x2 - x1);
    return Line{slope, y1 - slope * x1};
  };
  LineModel m;
  m.id = id;
  m.language = joint_language(b1, b2);
  m.mean = through(b1.box.top, b2.box.top);
  m.base = through(b1.box.bottom, b2.box.bottom);
  m.ref_x = 0.5 * (std::min(b1.box.left, b2.box.left) + std::max(b1.box.right, b2.box.right));
  if (!m.valid(params.slope_max)) return std::nullopt;
  return m;
}

inline bool near_duplicate(const LineModel& a, const LineModel& b, double tol = 1e-6) {
  return a.language == b.language && std::abs(a.mean.slope - b.mean.slope) < tol &&
         std::abs(a.mean.intercept - b.mean.intercept) < tol && std::abs(a.base.slope - b.base.slope) < tol &&
         std::abs(a.base.intercept - b.base.intercept) < tol;
}

// One model per Delaunay edge, deduplicated, plus params.extra_random random
// pairs. Model ids are 0..size-1 in pool order.
template <class Rng>
ModelPool sample_initial_pool(std::span<const TextCandidate> blobs, const EnergyParams& params, Rng& rng) {
  ModelPool pool;
  if (blobs.size() < 2) return pool;

  auto consider = [&](std::size_t u, std::size_t v) {
    auto m = model_from_pair(blobs[u], blobs[v], params, static_cast<ModelId>(pool.size()));
    if (!m) return;
    for (const auto& existing : pool)
      if (near_duplicate(existing, *m)) return;
    pool.push_back(*m);
  };

  for (auto [u, v] : delaunay_neighbors(blobs).edges) consider(u, v);

  if (params.extra_random > 0) {
    std::uniform_int_distribution<std::size_t> pick(0, blobs.size() - 1);
    for (int k = 0; k < params.extra_random; ++k) {
      std::size_t u = pick(rng);
      std::size_t v = pick(rng);
      if (u != v) consider(u, v);
    }
  }
  return pool;
}

// Each blob independently takes `model` when that is strictly cheaper than the
// outlier cost.
inline Labeling make_labeling(const LineModel& model, std::span<const TextCandidate> blobs,
                              const EnergyParams& params) {
  Labeling l(blobs.size());
  for (std::size_t i = 0; i < blobs.size(); ++i)
    if (model_data_term(blobs[i], model, params) < params.outlier_cost) l[i] = Label(model.id);
  return l;
}

}  // namespace textline
