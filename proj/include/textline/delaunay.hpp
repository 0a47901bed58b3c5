#pragma once

// Delaunay triangulation of a planar point set.
//
// Points are inserted in lexicographic order, each one joined to the hull
// edges it sees, and non-locally-Delaunay edges are then flipped until none
// remain. Duplicate points are attached to their first occurrence; an
// all-collinear input yields no triangles.

#include <array>
#include <map>
#include <utility>
#include <vector>

#include "textline/core.hpp"

namespace textline {

namespace geom {

// > 0 when a, b, c turn counter-clockwise (in a y-up frame).
inline long double orient(const Point2D& a, const Point2D& b, const Point2D& c) {
  return (static_cast<long double>(b.x) - a.x) * (static_cast<long double>(c.y) - a.y) -
         (static_cast<long double>(b.y) - a.y) * (static_cast<long double>(c.x) - a.x);
}

// > 0 when d lies strictly inside the circumcircle of the counter-clockwise triangle abc.
inline long double incircle(const Point2D& a, const Point2D& b, const Point2D& c, const Point2D& d) {
  long double adx = static_cast<long double>(a.x) - d.x, ady = static_cast<long double>(a.y) - d.y;
  long double bdx = static_cast<long double>(b.x) - d.x, bdy = static_cast<long double>(b.y) - d.y;
  long double cdx = static_cast<long double>(c.x) - d.x, cdy = static_cast<long double>(c.y) - d.y;
  long double ad = adx * adx + ady * ady;
  long double bd = bdx * bdx + bdy * bdy;
  long double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

}  // namespace geom

struct Triangulation {
  std::vector<std::array<std::size_t, 3>> triangles;        // counter-clockwise vertex triples
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // (u, v) with u < v, sorted
};

inline Triangulation delaunay_triangulation(std::span<const Point2D> pts) {
  using Tri = std::array<std::size_t, 3>;
  Triangulation out;
  const std::size_t n = pts.size();
  if (n < 2) return out;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pts[a].x != pts[b].x ? pts[a].x < pts[b].x : pts[a].y < pts[b].y;
  });

  std::vector<std::pair<std::size_t, std::size_t>> extra_edges;
  std::vector<std::size_t> uniq;
  for (std::size_t k : order) {
    if (!uniq.empty() && pts[uniq.back()] == pts[k]) {
      extra_edges.emplace_back(std::min(uniq.back(), k), std::max(uniq.back(), k));
    } else {
      uniq.push_back(k);
    }
  }

  std::size_t m = uniq.size();
  std::size_t apex = 2;
  while (apex < m && geom::orient(pts[uniq[0]], pts[uniq[1]], pts[uniq[apex]]) == 0) ++apex;

  std::vector<Tri> tris;
  if (apex < m) {
    // Fan the leading collinear run to the first point off its line.
    std::vector<std::size_t> hull;
    const Point2D& q = pts[uniq[apex]];
    bool left = geom::orient(pts[uniq[0]], pts[uniq[apex - 1]], q) > 0;
    for (std::size_t k = 0; k + 1 < apex; ++k) {
      if (left) {
        tris.push_back({uniq[k], uniq[k + 1], uniq[apex]});
      } else {
        tris.push_back({uniq[k + 1], uniq[k], uniq[apex]});
      }
    }
    if (left) {
      for (std::size_t k = 0; k < apex; ++k) hull.push_back(uniq[k]);
      hull.push_back(uniq[apex]);
    } else {
      for (std::size_t k = apex; k-- > 0;) hull.push_back(uniq[k]);
      hull.push_back(uniq[apex]);
    }

    for (std::size_t k = apex + 1; k < m; ++k) {
      std::size_t p = uniq[k];
      std::size_t h = hull.size();
      std::vector<bool> visible(h);
      for (std::size_t e = 0; e < h; ++e)
        visible[e] = geom::orient(pts[hull[e]], pts[hull[(e + 1) % h]], pts[p]) < 0;
      // Visible edges form one contiguous cyclic run; find where it starts.
      std::size_t start = h;
      for (std::size_t e = 0; e < h; ++e)
        if (visible[e] && !visible[(e + h - 1) % h]) {
          start = e;
          break;
        }
      if (start == h) throw Error("delaunay: point sees no hull edge");
      std::size_t run = 0;
      while (run < h && visible[(start + run) % h]) {
        std::size_t e = (start + run) % h;
        tris.push_back({hull[(e + 1) % h], hull[e], p});
        ++run;
      }
      // Hull vertices strictly inside the visible run are removed; p takes their place.
      std::vector<std::size_t> next_hull;
      next_hull.reserve(h + 1);
      std::size_t first_kept = (start + run) % h;  // end vertex of the run
      for (std::size_t j = 0; j + run <= h; ++j) next_hull.push_back(hull[(first_kept + j) % h]);
      next_hull.push_back(p);
      hull = std::move(next_hull);
    }

    // Lawson flips.
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> owner;  // directed edge -> triangle
    auto register_tri = [&](std::size_t t) {
      for (int e = 0; e < 3; ++e) owner[{tris[t][e], tris[t][(e + 1) % 3]}] = t;
    };
    auto unregister_tri = [&](std::size_t t) {
      for (int e = 0; e < 3; ++e) owner.erase({tris[t][e], tris[t][(e + 1) % 3]});
    };
    for (std::size_t t = 0; t < tris.size(); ++t) register_tri(t);

    std::vector<std::pair<std::size_t, std::size_t>> stack;
    for (const auto& [edge, t] : owner) stack.push_back(edge);
    std::size_t flips = 0;
    const std::size_t max_flips = 16 * n * n + 64;
    while (!stack.empty()) {
      auto [a, b] = stack.back();
      stack.pop_back();
      auto it1 = owner.find({a, b});
      auto it2 = owner.find({b, a});
      if (it1 == owner.end() || it2 == owner.end()) continue;
      std::size_t t1 = it1->second, t2 = it2->second;
      auto third = [&](std::size_t t, std::size_t u, std::size_t v) {
        for (std::size_t w : tris[t])
          if (w != u && w != v) return w;
        return tris[t][0];
      };
      std::size_t c = third(t1, a, b);
      std::size_t d = third(t2, a, b);
      if (geom::incircle(pts[a], pts[b], pts[c], pts[d]) <= 0) continue;
      if (++flips > max_flips) break;
      unregister_tri(t1);
      unregister_tri(t2);
      tris[t1] = {a, d, c};
      tris[t2] = {d, b, c};
      register_tri(t1);
      register_tri(t2);
      stack.emplace_back(a, d);
      stack.emplace_back(d, b);
      stack.emplace_back(b, c);
      stack.emplace_back(c, a);
    }
  }
  out.triangles = std::move(tris);

  std::vector<std::pair<std::size_t, std::size_t>> edges = extra_edges;
  for (const auto& t : out.triangles)
    for (int e = 0; e < 3; ++e) {
      std::size_t u = t[e], v = t[(e + 1) % 3];
      edges.emplace_back(std::min(u, v), std::max(u, v));
    }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  out.edges = std::move(edges);
  return out;
}

}  // namespace textline
