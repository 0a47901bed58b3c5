#pragma once

// Fusion moves for the hierarchical label-cost energy.
//
// Fusing labelings l0 and l1 picks, per blob, x_i = 0 (keep l0_i) or
// x_i = 1 (take l1_i). Label costs become high-order terms
//
//   C * (1 - prod_{p in must_be_one} x_p * prod_{q in must_be_zero} (1 - x_q))
//
// i.e. a line (or language) cost is avoided only if every blob supporting it
// in l0 switches away and no blob supporting it in l1 is taken.
//
// Graph encoding: a blob node on the source side means x_i = 1.

#include <functional>
#include <ostream>

#include "textline/energy.hpp"
#include "textline/io.hpp"
#include "textline/maxflow.hpp"
#include "textline/proposals.hpp"

namespace textline {

struct CostTerm {
  double cost = 0.0;
  std::vector<std::size_t> must_be_one;   // blobs supporting the label in l0
  std::vector<std::size_t> must_be_zero;  // blobs supporting the label in l1

  // Overlapping supports mean the label survives every crossover.
  bool avoidable() const {
    for (std::size_t p : must_be_one)
      if (std::find(must_be_zero.begin(), must_be_zero.end(), p) != must_be_zero.end()) return false;
    return true;
  }

  bool paid(const std::vector<bool>& x) const {
    for (std::size_t p : must_be_one)
      if (!x[p]) return true;
    for (std::size_t q : must_be_zero)
      if (x[q]) return true;
    return false;
  }
};

struct BinaryFusionProblem {
  std::vector<double> unary0;  // D_i(l0_i)
  std::vector<double> unary1;  // D_i(l1_i)
  std::vector<CostTerm> line_terms;
  std::vector<CostTerm> language_terms;
  double offset = 0.0;

  std::size_t size() const { return unary0.size(); }
};

inline Labeling apply_crossover(const Labeling& l0, const Labeling& l1, const std::vector<bool>& x) {
  if (l0.size() != l1.size() || x.size() != l0.size()) throw Error("crossover size mismatch");
  Labeling out(l0.size());
  for (std::size_t i = 0; i < l0.size(); ++i) out[i] = x[i] ? l1[i] : l0[i];
  return out;
}

inline BinaryFusionProblem build_fusion_problem(const Labeling& l0, const Labeling& l1,
                                                std::span<const TextCandidate> blobs,
                                                std::span<const LineModel> pool, const EnergyParams& params) {
  if (l0.size() != blobs.size() || l1.size() != blobs.size()) throw Error("labelings do not match the blob set");
  PoolIndex index(pool);
  const std::size_t n = blobs.size();
  BinaryFusionProblem prob;
  prob.unary0.resize(n);
  prob.unary1.resize(n);

  std::map<ModelId, CostTerm> lines;
  std::array<CostTerm, kNumLanguages> langs;
  auto support = [&](Label l, std::size_t i, bool from_l0, double& unary) {
    if (l.is_outlier()) {
      unary = params.outlier_cost;
      return;
    }
    const LineModel& m = pool[index.at(l.model())];
    unary = model_data_term(blobs[i], m, params);
    CostTerm& line = lines[m.id];
    CostTerm& lang = langs[index_of(m.language)];
    (from_l0 ? line.must_be_one : line.must_be_zero).push_back(i);
    (from_l0 ? lang.must_be_one : lang.must_be_zero).push_back(i);
  };
  for (std::size_t i = 0; i < n; ++i) {
    support(l0[i], i, true, prob.unary0[i]);
    support(l1[i], i, false, prob.unary1[i]);
  }
  for (auto& [id, term] : lines) {
    term.cost = params.line_cost;
    prob.line_terms.push_back(std::move(term));
  }
  for (auto& term : langs) {
    if (term.must_be_one.empty() && term.must_be_zero.empty()) continue;
    term.cost = params.language_cost;
    prob.language_terms.push_back(std::move(term));
  }
  return prob;
}

inline double binary_energy(const BinaryFusionProblem& prob, const std::vector<bool>& x) {
  if (x.size() != prob.size()) throw Error("crossover vector size mismatch");
  double e = 0.0;
  for (std::size_t i = 0; i < prob.size(); ++i) e += x[i] ? prob.unary1[i] : prob.unary0[i];
  for (const auto& t : prob.line_terms)
    if (t.paid(x)) e += t.cost;
  for (const auto& t : prob.language_terms)
    if (t.paid(x)) e += t.cost;
  return e + prob.offset;
}

namespace detail {

enum class Forced : std::uint8_t { Free, One, Zero };

// Graph for the submodular part of a fusion problem. Terms with both supports
// non-empty are not representable and must be resolved by the caller through
// `forced` (term avoided) or by dropping them (term paid).
inline FlowNetwork fusion_network(const BinaryFusionProblem& prob, const std::vector<const CostTerm*>& terms,
                                  const std::vector<Forced>& forced) {
  const std::size_t n = prob.size();
  FlowNetwork net(n + 2, 0, 1);
  auto node = [](std::size_t i) { return i + 2; };
  for (std::size_t i = 0; i < n; ++i) {
    double base = std::min(prob.unary0[i], prob.unary1[i]);
    double c1 = prob.unary1[i] - base;
    double c0 = prob.unary0[i] - base;
    if (c1 > 0.0) net.add_arc(node(i), 1, c1);
    if (c0 > 0.0) net.add_arc(0, node(i), c0);
    if (forced[i] == Forced::One) net.add_arc(0, node(i), kInfiniteCapacity);
    if (forced[i] == Forced::Zero) net.add_arc(node(i), 1, kInfiniteCapacity);
  }
  for (const CostTerm* t : terms) {
    if (t->cost <= 0.0) continue;
    if (t->must_be_zero.empty()) {
      // h on the source side avoids the cost and drags every supporter to x = 1.
      auto h = net.add_node();
      net.add_arc(0, h, t->cost);
      for (std::size_t p : t->must_be_one) net.add_arc(h, node(p), kInfiniteCapacity);
    } else {
      // h on the sink side avoids the cost and requires every supporter at x = 0.
      auto h = net.add_node();
      net.add_arc(h, 1, t->cost);
      for (std::size_t q : t->must_be_zero) net.add_arc(node(q), h, kInfiniteCapacity);
    }
  }
  return net;
}

struct TermSplit {
  std::vector<const CostTerm*> single;  // one support empty: gadget-representable
  std::vector<const CostTerm*> mixed;   // both supports non-empty and disjoint
};

inline TermSplit split_terms(const BinaryFusionProblem& prob) {
  TermSplit split;
  auto classify = [&](const CostTerm& t) {
    if (!t.avoidable() || (t.must_be_one.empty() && t.must_be_zero.empty())) return;
    if (!t.must_be_one.empty() && !t.must_be_zero.empty()) {
      split.mixed.push_back(&t);
    } else {
      split.single.push_back(&t);
    }
  };
  for (const auto& t : prob.line_terms) classify(t);
  for (const auto& t : prob.language_terms) classify(t);
  return split;
}

}  // namespace detail

inline constexpr std::size_t kMaxMixedTerms = 20;

// Globally optimal crossover.
//
// Single-support terms map onto one auxiliary node each. A term whose l0 and
// l1 supports are both non-empty is not submodular; each such term is
// resolved exactly by solving two branches, one where it is avoided (its
// supporters are pinned) and one where it is paid (it is dropped), and
// keeping the better crossover. Ties keep l0.
inline std::vector<bool> solve_fusion(const BinaryFusionProblem& prob) {
  const std::size_t n = prob.size();
  detail::TermSplit split = detail::split_terms(prob);
  if (split.mixed.size() > kMaxMixedTerms) throw Error("fusion problem has too many mixed-support terms");

  std::vector<bool> best(n, false);
  double best_energy = binary_energy(prob, best);
  const std::size_t branches = std::size_t{1} << split.mixed.size();
  for (std::size_t mask = 0; mask < branches; ++mask) {
    std::vector<detail::Forced> forced(n, detail::Forced::Free);
    bool feasible = true;
    auto pin = [&](std::size_t i, detail::Forced f) {
      if (forced[i] != detail::Forced::Free && forced[i] != f) feasible = false;
      forced[i] = f;
    };
    for (std::size_t k = 0; k < split.mixed.size() && feasible; ++k) {
      if (!(mask >> k & 1U)) continue;
      for (std::size_t p : split.mixed[k]->must_be_one) pin(p, detail::Forced::One);
      for (std::size_t q : split.mixed[k]->must_be_zero) pin(q, detail::Forced::Zero);
    }
    if (!feasible) continue;

    FlowNetwork net = detail::fusion_network(prob, split.single, forced);
    MaxFlowResult cut = max_flow(net);
    std::vector<bool> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = cut.source_side[i + 2];
    double e = binary_energy(prob, x);
    if (e < best_energy) {
      best_energy = e;
      best = std::move(x);
    }
  }
  return best;
}

// Network for the branch where every mixed term is paid; for debug dumps.
inline FlowNetwork fusion_network(const BinaryFusionProblem& prob) {
  detail::TermSplit split = detail::split_terms(prob);
  return detail::fusion_network(prob, split.single, std::vector<detail::Forced>(prob.size(), detail::Forced::Free));
}

inline Json fusion_problem_to_json(const BinaryFusionProblem& prob) {
  auto term_json = [](const CostTerm& t) {
    Json j;
    j["cost"] = t.cost;
    j["must_be_one"] = t.must_be_one;
    j["must_be_zero"] = t.must_be_zero;
    return j;
  };
  Json j;
  j["unary0"] = prob.unary0;
  j["unary1"] = prob.unary1;
  j["line_terms"] = Json::array();
  for (const auto& t : prob.line_terms) j["line_terms"].push_back(term_json(t));
  j["language_terms"] = Json::array();
  for (const auto& t : prob.language_terms) j["language_terms"].push_back(term_json(t));
  j["offset"] = prob.offset;
  return j;
}

// Called once per fusion move with the move index and the problem solved.
using FusionObserver = std::function<void(std::size_t move, const BinaryFusionProblem&, const std::vector<bool>&)>;

namespace detail {

inline Labeling fusion_sweep(Labeling current, std::span<const LineModel> pool, std::size_t first,
                             std::span<const TextCandidate> blobs, const EnergyParams& params,
                             const FusionObserver& observer) {
  if (current.size() != blobs.size()) throw Error("initial labeling does not cover the blob set");
  for (std::size_t k = first; k < pool.size(); ++k) {
    Labeling proposal = make_labeling(pool[k], blobs, params);
    BinaryFusionProblem prob = build_fusion_problem(current, proposal, blobs, pool, params);
    std::vector<bool> x = solve_fusion(prob);
    if (observer) observer(k, prob, x);
    current = apply_crossover(current, proposal, x);
  }
  return current;
}

}  // namespace detail

// One fusion sweep starting from `initial`: every pool model's single-line
// proposal is fused into the running labeling in pool order. The result never
// has higher energy than `initial`.
inline Labeling assign_models_from(Labeling initial, std::span<const LineModel> pool,
                                   std::span<const TextCandidate> blobs, const EnergyParams& params,
                                   const FusionObserver& observer = {}) {
  return detail::fusion_sweep(std::move(initial), pool, 0, blobs, params, observer);
}

// Starts from pool[0]'s proposal and fuses the remaining models in order.
inline Labeling assign_models(std::span<const LineModel> pool, std::span<const TextCandidate> blobs,
                              const EnergyParams& params, const FusionObserver& observer = {}) {
  if (pool.empty()) return Labeling(blobs.size());
  return detail::fusion_sweep(make_labeling(pool[0], blobs, params), pool, 1, blobs, params, observer);
}

}  // namespace textline
