#pragma once

// Random instance generators and brute-force oracles shared by the tests.
// The oracles deliberately avoid calling the library's energy code.

#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include "textline/textline.hpp"

namespace testsupport {

using namespace textline;

inline Likelihoods random_likelihoods(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  Likelihoods raw{};
  for (double& v : raw) v = u(rng);
  return normalize_likelihoods(raw);
}

// Blobs scattered around a few horizontal bands so that line models fit some of them.
inline std::vector<TextCandidate> random_blobs(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> x(0.0, 200.0), band(0.0, 3.0), jit(-3.0, 3.0), wid(6.0, 14.0);
  std::vector<TextCandidate> out;
  for (std::size_t i = 0; i < n; ++i) {
    TextCandidate t;
    t.id = static_cast<std::int64_t>(i);
    double l = x(rng);
    double top = 30.0 * std::floor(band(rng)) + jit(rng);
    double w = wid(rng);
    t.box = {l, top, l + w, top + 14.0 + jit(rng)};
    t.likelihoods = random_likelihoods(rng);
    out.push_back(t);
  }
  return out;
}

inline ModelPool random_pool(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> y(-5.0, 70.0), s(-0.05, 0.05), h(8.0, 20.0);
  std::uniform_int_distribution<int> lang(0, 3);
  ModelPool pool;
  for (std::size_t k = 0; k < n; ++k) {
    LineModel m;
    m.id = static_cast<ModelId>(10 + 3 * k);
    m.language = static_cast<Language>(lang(rng));
    double top = y(rng), slope = s(rng);
    m.mean = {slope, top};
    m.base = {slope + s(rng) * 0.2, top + h(rng)};
    m.ref_x = 100.0;
    pool.push_back(m);
  }
  return pool;
}

inline Labeling random_labeling(std::mt19937_64& rng, std::size_t n, const ModelPool& pool) {
  std::uniform_int_distribution<int> pick(-1, static_cast<int>(pool.size()) - 1);
  Labeling l(n);
  for (std::size_t i = 0; i < n; ++i) {
    int k = pick(rng);
    l[i] = k < 0 ? kOutlier : Label(pool[static_cast<std::size_t>(k)].id);
  }
  return l;
}

// Straight-line evaluation of the energy from its definition.
inline double reference_energy(const std::vector<TextCandidate>& blobs, const Labeling& l, const ModelPool& pool,
                               const EnergyParams& p) {
  double e = 0.0;
  std::set<ModelId> models;
  std::set<int> langs;
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    if (l[i].is_outlier()) {
      e += p.outlier_cost;
      continue;
    }
    const LineModel* m = nullptr;
    for (const auto& c : pool)
      if (c.id == l[i].model()) m = &c;
    models.insert(m->id);
    langs.insert(static_cast<int>(m->language));
    const Box& b = blobs[i].box;
    double d[4] = {b.top - m->mean.at(b.left), b.top - m->mean.at(b.right), b.bottom - m->base.at(b.left),
                   b.bottom - m->base.at(b.right)};
    double z = std::max(p.min_line_height, m->base.at(m->ref_x) - m->mean.at(m->ref_x));
    double raw = 0.0;
    for (double v : d) raw += p.geometric_mode == GeometricMode::Squared ? v * v : std::abs(v);
    double norm = p.geometric_mode == GeometricMode::Squared ? z * z : z;
    e += -std::log(blobs[i].likelihoods[static_cast<std::size_t>(m->language)]) +
         p.language_scale[static_cast<std::size_t>(m->language)] * raw / norm;
  }
  return e + p.line_cost * static_cast<double>(models.size()) + p.language_cost * static_cast<double>(langs.size());
}

// Minimum over every labeling in (pool + outlier)^n.
inline double exhaustive_min_energy(const std::vector<TextCandidate>& blobs, const ModelPool& pool,
                                    const EnergyParams& p) {
  const std::size_t n = blobs.size(), k = pool.size() + 1;
  std::vector<std::size_t> digits(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    Labeling l(n);
    for (std::size_t i = 0; i < n; ++i) l[i] = digits[i] == 0 ? kOutlier : Label(pool[digits[i] - 1].id);
    best = std::min(best, total_energy(blobs, l, pool, p));
    std::size_t i = 0;
    while (i < n && ++digits[i] == k) digits[i++] = 0;
    if (i == n) break;
  }
  return best;
}

inline std::vector<bool> bits_of(std::uint64_t mask, std::size_t n) {
  std::vector<bool> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (mask >> i) & 1U;
  return x;
}

// Minimum cut by enumerating every placement of the non-terminal nodes.
inline double brute_force_min_cut(const FlowNetwork& net) {
  std::vector<std::size_t> free;
  for (std::size_t v = 0; v < net.node_count(); ++v)
    if (v != net.source() && v != net.sink()) free.push_back(v);
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free.size()); ++mask) {
    std::vector<bool> side(net.node_count(), false);
    side[net.source()] = true;
    for (std::size_t k = 0; k < free.size(); ++k) side[free[k]] = (mask >> k) & 1U;
    best = std::min(best, net.cut_capacity(side));
  }
  return best;
}

inline FlowNetwork random_network(std::mt19937_64& rng, std::size_t inner, double density, bool with_infinite) {
  FlowNetwork net(inner + 2, 0, 1);
  std::uniform_real_distribution<double> u(0.0, 1.0), cap(0.0, 10.0);
  for (std::size_t a = 0; a < inner + 2; ++a)
    for (std::size_t b = 0; b < inner + 2; ++b) {
      if (a == b || b == 0 || a == 1) continue;
      if (u(rng) >= density) continue;
      double c = with_infinite && u(rng) < 0.1 ? kInfiniteCapacity : std::round(cap(rng) * 100.0) / 100.0;
      net.add_arc(a, b, c);
    }
  return net;
}

inline TextCandidate make_blob(std::int64_t id, Box box, Likelihoods lk = {0.2, 0.2, 0.2, 0.2, 0.2}) {
  TextCandidate t;
  t.id = id;
  t.box = box;
  t.likelihoods = lk;
  return t;
}

inline LineModel horizontal_model(ModelId id, Language lang, double mean_y, double base_y, double ref_x = 0.0) {
  LineModel m;
  m.id = id;
  m.language = lang;
  m.mean = {0.0, mean_y};
  m.base = {0.0, base_y};
  m.ref_x = ref_x;
  return m;
}

struct PatchSample {
  GrayImage image;
  Box box;
  Category category;
};

// One small image per sample with a category-specific glyph shape, so that the
// five categories are separable from intensity, gradient and geometry features.
inline std::vector<PatchSample> separable_fixture(std::mt19937_64& rng, int per_class) {
  std::uniform_int_distribution<int> hdist(18, 30);
  std::vector<PatchSample> out;
  for (int k = 0; k < per_class; ++k)
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      auto cat = static_cast<Category>(c);
      int h = hdist(rng);
      int w = 0;
      switch (cat) {
        case Category::English: w = h / 2; break;
        case Category::Korean: w = h; break;
        case Category::Chinese: w = h; break;
        case Category::Digit: w = (h * 3) / 5; break;
        case Category::NonText: w = h * 3; break;
      }
      GrayImage img(static_cast<std::size_t>(w + 8), static_cast<std::size_t>(h + 8), 220);
      auto fill = [&](int x0, int y0, int x1, int y1) {
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) img.at(static_cast<std::size_t>(x + 4), static_cast<std::size_t>(y + 4)) = 40;
      };
      switch (cat) {
        case Category::English: fill(0, 0, w, h); break;
        case Category::Korean:
          fill(0, 0, w, h / 2 - 1);
          fill(0, h / 2 + 1, w, h);
          break;
        case Category::Chinese:
          for (int s = 0; s < 4; ++s) fill(0, s * h / 4, w, s * h / 4 + 2);
          fill(w / 2 - 1, 0, w / 2 + 1, h);
          break;
        case Category::Digit:
          fill(0, 0, w, 2);
          fill(0, h - 2, w, h);
          fill(0, 0, 2, h);
          fill(w - 2, 0, w, h);
          break;
        case Category::NonText:
          for (int x = 0; x < w; x += 3) fill(x, 0, x + 1, h);
          break;
      }
      out.push_back({std::move(img), Box{4, 4, 4.0 + w, 4.0 + h}, cat});
    }
  return out;
}

inline TrainingSet training_set_of(const std::vector<PatchSample>& samples) {
  TrainingSet data;
  for (const auto& s : samples) data.push_back({extract_features(s.image, s.box), s.category});
  return data;
}

}  // namespace testsupport
