#pragma once

// Hierarchical MDL energy over blob-to-line labelings:
//
//   E(l, theta) = sum_i D_i(l_i) + C_line * #active lines + C_lang * #active languages
//
// where D_i(j) = -ln Pr(i | lang_j) + geometric error of blob i against line j
// and D_i(outlier) is a constant. Every optimizer in this library is tested
// against the functions below.

#include <bitset>
#include <set>

#include "textline/core.hpp"

namespace textline {

// Line height used to normalize geometric error, floored at min_line_height.
inline double normalizer(const LineModel& model, const EnergyParams& params) {
  return std::max(params.min_line_height, model.height_at_ref());
}

// Sum of vertical corner-to-line residuals (squared or absolute) without the
// language scale or height normalization.
inline double raw_geometric_residual(const Box& box, const LineModel& model, GeometricMode mode) {
  const double r[4] = {box.top - model.mean.at(box.left), box.top - model.mean.at(box.right),
                       box.bottom - model.base.at(box.left), box.bottom - model.base.at(box.right)};
  double sum = 0.0;
  for (double v : r) sum += (mode == GeometricMode::Squared) ? v * v : std::abs(v);
  return sum;
}

// Language-independent part of the geometric error: raw residual / Z (or Z^2).
inline double unscaled_geometric_distance(const Box& box, const LineModel& model, const EnergyParams& params) {
  double z = normalizer(model, params);
  double raw = raw_geometric_residual(box, model, params.geometric_mode);
  return params.geometric_mode == GeometricMode::Squared ? raw / (z * z) : raw / z;
}

inline double geometric_distance(const TextCandidate& blob, const LineModel& model, const EnergyParams& params) {
  return params.scale(model.language) * unscaled_geometric_distance(blob.box, model, params);
}

inline double classification_cost(const TextCandidate& blob, Language language) {
  return -std::log(blob.likelihood(language));
}

// Data term of assigning `blob` to `model` (never the outlier).
inline double model_data_term(const TextCandidate& blob, const LineModel& model, const EnergyParams& params) {
  return classification_cost(blob, model.language) + geometric_distance(blob, model, params);
}

inline double data_term(const TextCandidate& blob, Label label, std::span<const LineModel> pool,
                        const EnergyParams& params) {
  if (label.is_outlier()) return params.outlier_cost;
  for (const auto& m : pool)
    if (m.id == label.model()) return model_data_term(blob, m, params);
  throw Error("unknown model id " + std::to_string(label.model()));
}

struct EnergyBreakdown {
  double data = 0.0;
  std::size_t active_lines = 0;
  std::size_t active_languages = 0;
  double total = 0.0;
};

inline EnergyBreakdown energy_breakdown(std::span<const TextCandidate> blobs, const Labeling& labeling,
                                        std::span<const LineModel> pool, const EnergyParams& params) {
  if (labeling.size() != blobs.size()) throw Error("labeling does not cover the blob set");
  PoolIndex index(pool);
  EnergyBreakdown e;
  std::vector<bool> line_active(pool.size(), false);
  std::bitset<kNumLanguages> languages;
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    Label l = labeling[i];
    if (l.is_outlier()) {
      e.data += params.outlier_cost;
      continue;
    }
    std::size_t k = index.at(l.model());
    e.data += model_data_term(blobs[i], pool[k], params);
    line_active[k] = true;
    languages.set(index_of(pool[k].language));
  }
  e.active_lines = static_cast<std::size_t>(std::count(line_active.begin(), line_active.end(), true));
  e.active_languages = languages.count();
  e.total = e.data + params.line_cost * static_cast<double>(e.active_lines) +
            params.language_cost * static_cast<double>(e.active_languages);
  return e;
}

inline double total_energy(std::span<const TextCandidate> blobs, const Labeling& labeling,
                           std::span<const LineModel> pool, const EnergyParams& params) {
  return energy_breakdown(blobs, labeling, pool, params).total;
}

// Horizontal extent of the blobs assigned to `id`, if any.
inline std::optional<std::pair<double, double>> inlier_span(std::span<const TextCandidate> blobs,
                                                            const Labeling& labeling, ModelId id) {
  std::optional<std::pair<double, double>> span;
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    if (labeling[i] != Label(id)) continue;
    const Box& b = blobs[i].box;
    if (!span) {
      span = {b.left, b.right};
    } else {
      span->first = std::min(span->first, b.left);
      span->second = std::max(span->second, b.right);
    }
  }
  return span;
}

}  // namespace textline
