#pragma once

// Block-coordinate descent over labelings and line parameters: sample a pool
// of line hypotheses, then alternate fusion-based assignment with least-squares
// refitting until the energy stops improving.

#include <random>

#include "textline/fusion.hpp"
#include "textline/proposals.hpp"
#include "textline/refit.hpp"

namespace textline {

struct PearlResult {
  ModelPool pool;           // models with at least one inlier
  Labeling labeling;        // aligned with the input blobs
  std::vector<double> trace;  // energy before the first sweep, then after every assign and refit step
  int iterations = 0;
};

// Keeps exactly the models that have at least one inlier, in pool order.
inline ModelPool prune_unused(std::span<const LineModel> pool, const Labeling& labeling) {
  std::set<ModelId> used;
  for (Label l : labeling.labels)
    if (!l.is_outlier()) used.insert(l.model());
  ModelPool out;
  for (const auto& m : pool)
    if (used.count(m.id)) out.push_back(m);
  return out;
}

// Runs the descent from a given pool. The first sweep fuses every proposal into
// the all-outlier labeling and later sweeps start from the previous labeling,
// so each step is monotone in the energy.
inline PearlResult pearl_from_pool(std::span<const TextCandidate> blobs, ModelPool pool, const EnergyParams& params,
                                   const FusionObserver& observer = {}) {
  params.validate();
  PearlResult r;
  r.labeling = Labeling(blobs.size());
  double energy = total_energy(blobs, r.labeling, pool, params);
  r.trace.push_back(energy);
  if (pool.empty()) return r;

  for (int it = 0; it < params.max_iterations; ++it) {
    double before = energy;
    r.labeling = assign_models_from(r.labeling, pool, blobs, params, observer);
    r.trace.push_back(total_energy(blobs, r.labeling, pool, params));
    pool = refit_models(pool, blobs, r.labeling, params);
    energy = total_energy(blobs, r.labeling, pool, params);
    r.trace.push_back(energy);
    r.iterations = it + 1;
    if (before - energy < params.convergence_tol) break;
  }
  r.pool = prune_unused(pool, r.labeling);
  return r;
}

template <class Rng>
PearlResult pearl(std::span<const TextCandidate> blobs, const EnergyParams& params, Rng& rng,
                  const FusionObserver& observer = {}) {
  params.validate();
  return pearl_from_pool(blobs, sample_initial_pool(blobs, params, rng), params, observer);
}

inline PearlResult pearl(std::span<const TextCandidate> blobs, const EnergyParams& params) {
  std::mt19937_64 rng(params.rng_seed);
  return pearl(blobs, params, rng);
}

}  // namespace textline
