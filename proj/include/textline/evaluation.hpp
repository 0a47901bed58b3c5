#pragma once

// Line-level precision / recall / F against ground truth. Lines are compared
// by the sets of blobs assigned to them, and matched lines must agree on
// language.

#include "textline/core.hpp"
#include "textline/io.hpp"

namespace textline {

struct LineMatch {
  ModelId detected;
  ModelId truth;
  double overlap;  // |intersection| / |union| of inlier sets
};

struct Metrics {
  double precision = 1.0;
  double recall = 1.0;
  double f = 1.0;
  std::vector<LineMatch> matches;
};

namespace detail {

inline std::map<ModelId, std::vector<std::size_t>> inlier_sets(const Labeling& labeling) {
  std::map<ModelId, std::vector<std::size_t>> sets;
  for (std::size_t i = 0; i < labeling.size(); ++i)
    if (!labeling[i].is_outlier()) sets[labeling[i].model()].push_back(i);
  return sets;
}

inline double set_overlap(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::vector<std::size_t> inter;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
  double uni = static_cast<double>(a.size() + b.size() - inter.size());
  return uni > 0 ? static_cast<double>(inter.size()) / uni : 0.0;
}

}  // namespace detail

// Greedy one-to-one matching by descending overlap; ties go to the lower
// ground-truth id, then the lower detected id. Both labelings must be aligned
// with the same blob vector.
inline std::vector<LineMatch> match_lines(std::span<const LineModel> detected, const Labeling& detected_labeling,
                                          std::span<const LineModel> truth, const Labeling& truth_labeling,
                                          double overlap_min = 0.5) {
  if (detected_labeling.size() != truth_labeling.size()) throw Error("labelings cover different blob sets");
  auto det_sets = detail::inlier_sets(detected_labeling);
  auto gt_sets = detail::inlier_sets(truth_labeling);
  PoolIndex det_index(detected), gt_index(truth);

  std::vector<LineMatch> candidates;
  for (const auto& [d, dset] : det_sets) {
    const LineModel& dm = detected[det_index.at(d)];
    for (const auto& [g, gset] : gt_sets) {
      const LineModel& gm = truth[gt_index.at(g)];
      if (dm.language != gm.language) continue;
      double ov = detail::set_overlap(dset, gset);
      if (ov >= overlap_min && ov > 0.0) candidates.push_back({d, g, ov});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const LineMatch& a, const LineMatch& b) {
    if (a.overlap != b.overlap) return a.overlap > b.overlap;
    if (a.truth != b.truth) return a.truth < b.truth;
    return a.detected < b.detected;
  });
  std::set<ModelId> used_d, used_g;
  std::vector<LineMatch> out;
  for (const auto& c : candidates) {
    if (used_d.count(c.detected) || used_g.count(c.truth)) continue;
    used_d.insert(c.detected);
    used_g.insert(c.truth);
    out.push_back(c);
  }
  return out;
}

// Precision is vacuously 1 with no detections; recall is vacuously 1 with no
// ground-truth lines.
inline Metrics precision_recall_f(std::vector<LineMatch> matches, std::size_t n_detected, std::size_t n_truth) {
  if (matches.size() > n_detected || matches.size() > n_truth) throw Error("more matches than lines");
  Metrics m;
  double k = static_cast<double>(matches.size());
  m.precision = n_detected == 0 ? 1.0 : k / static_cast<double>(n_detected);
  m.recall = n_truth == 0 ? 1.0 : k / static_cast<double>(n_truth);
  m.f = (m.precision + m.recall) > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  m.matches = std::move(matches);
  return m;
}

// Counts only lines with at least one inlier.
inline Metrics evaluate_lines(std::span<const LineModel> detected, const Labeling& detected_labeling,
                              std::span<const LineModel> truth, const Labeling& truth_labeling,
                              double overlap_min = 0.5) {
  auto matches = match_lines(detected, detected_labeling, truth, truth_labeling, overlap_min);
  return precision_recall_f(std::move(matches), detail::inlier_sets(detected_labeling).size(),
                            detail::inlier_sets(truth_labeling).size());
}

// Carries labels from one blob set onto another: each target blob takes the
// label of the source blob it overlaps best (box IoU >= iou_min), else outlier.
inline Labeling transfer_labeling(std::span<const TextCandidate> source, const Labeling& source_labeling,
                                  std::span<const TextCandidate> target, double iou_min = 0.5) {
  if (source_labeling.size() != source.size()) throw Error("labeling does not cover the blob set");
  Labeling out(target.size());
  for (std::size_t t = 0; t < target.size(); ++t) {
    double best = iou_min;
    for (std::size_t s = 0; s < source.size(); ++s) {
      double iou = box_iou(source[s].box, target[t].box);
      if (iou >= best && (iou > best || out[t].is_outlier())) {
        best = iou;
        out[t] = source_labeling[s];
      }
    }
  }
  return out;
}

inline Json to_json(const Metrics& m) {
  Json j;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f"] = m.f;
  j["matches"] = Json::array();
  for (const auto& x : m.matches) j["matches"].push_back({{"detected", x.detected}, {"truth", x.truth}, {"overlap", x.overlap}});
  return j;
}

}  // namespace textline
