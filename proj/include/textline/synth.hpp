#pragma once

// Synthetic multilingual scenes with ground truth.
//
// Each line gets a language-specific typography: English glyphs are narrow,
// closely spaced and sometimes cross the mean or base line; Korean syllables
// are square, widely spaced and may break into vertically stacked fragments
// (the fragments are emitted together with the covering syllable box, as the
// merge proposals would produce); Chinese glyphs are square; digits are
// narrow. Clutter blobs are scattered away from the text.

#include <random>

#include "textline/classify.hpp"
#include "textline/energy.hpp"
#include "textline/imaging.hpp"
#include "textline/io.hpp"

namespace textline {

enum class BlobKind : std::uint8_t { Glyph, Fragment, Merged, Clutter };

inline std::string_view to_string(BlobKind k) {
  static constexpr std::array<std::string_view, 4> names = {"glyph", "fragment", "merged", "clutter"};
  return names[static_cast<std::size_t>(k)];
}

// Drawn into rendered images; merged boxes exist only as proposals.
inline bool rendered(BlobKind k) { return k != BlobKind::Merged; }

struct TypographyProfile {
  Language language = Language::English;
  double width_lo = 0.5;  // glyph width range, in line heights
  double width_hi = 0.7;
  double gap = 0.15;  // inter-glyph gap, in line heights
  double ascender_prob = 0.0;
  double ascender_size = 0.3;  // in line heights
  double stack_split = 0.0;

  static TypographyProfile defaults(Language v) {
    switch (v) {
      case Language::English: return {v, 0.45, 0.75, 0.15, 0.3, 0.3, 0.0};
      case Language::Korean: return {v, 0.85, 1.05, 0.8, 0.0, 0.0, 0.5};
      case Language::Chinese: return {v, 0.9, 1.1, 0.3, 0.0, 0.0, 0.0};
      case Language::Digit: return {v, 0.5, 0.65, 0.15, 0.0, 0.0, 0.0};
    }
    return {};
  }
};

struct SceneSpec {
  int n_lines = 4;
  std::vector<Language> languages{Language::English, Language::Korean, Language::Chinese, Language::Digit};
  double jitter_sigma = 0.05;  // corner noise, in line heights
  double outlier_frac = 0.15;  // clutter share of all blobs
  double oracle_accuracy = 0.9;
  double kappa = std::numeric_limits<double>::infinity();
  std::size_t width = 800;
  std::size_t height = 600;
  double line_height_lo = 20;
  double line_height_hi = 36;
  int chars_lo = 5;
  int chars_hi = 9;
  double tilt_max = 0.0;         // |slope| bound for line tilt
  double ascender_prob = -1.0;   // < 0 keeps the English default
  double korean_stack_split = 0.5;
  double min_gap_px = 3.0;       // keeps glyph edge rings apart when rendered

  void validate() const {
    if (n_lines < 1) throw Error("scene: n_lines must be at least 1");
    if (languages.empty()) throw Error("scene: languages must not be empty");
    if (!(jitter_sigma >= 0.0 && jitter_sigma < 1.0)) throw Error("scene: jitter_sigma must lie in [0, 1)");
    if (!(outlier_frac >= 0.0 && outlier_frac < 1.0)) throw Error("scene: outlier_frac must lie in [0, 1)");
    if (!(oracle_accuracy >= 0.2 && oracle_accuracy <= 1.0)) throw Error("scene: oracle_accuracy must lie in [0.2, 1]");
    if (width < 16 || height < 16) throw Error("scene: canvas too small");
    if (!(line_height_lo >= 4 && line_height_hi >= line_height_lo)) throw Error("scene: bad line height range");
    if (chars_lo < 2 || chars_hi < chars_lo) throw Error("scene: bad character count range");
    if (!(tilt_max >= 0.0 && tilt_max < 1.0)) throw Error("scene: tilt_max must lie in [0, 1)");
    if (!(korean_stack_split >= 0.0 && korean_stack_split <= 1.0)) throw Error("scene: korean_stack_split must lie in [0, 1]");
  }
};

struct SceneBlob {
  BlobKind kind = BlobKind::Glyph;
  Category category = Category::NonText;
};

struct SyntheticScene {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<TextCandidate> blobs;
  std::vector<SceneBlob> info;  // aligned with blobs
  ModelPool gt_lines;
  Labeling gt_labeling;
};

class PlacementError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline double round_px(double v) { return std::round(v); }

}  // namespace detail

template <class Rng>
SyntheticScene generate_scene(const SceneSpec& spec, Rng& rng) {
  spec.validate();
  SyntheticScene scene;
  scene.width = spec.width;
  scene.height = spec.height;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<Box> occupied;  // line regions, with margins
  std::vector<Label> labels;
  auto add_blob = [&](const Box& b, BlobKind kind, Category cat, Label label) {
    TextCandidate t;
    t.id = static_cast<std::int64_t>(scene.blobs.size());
    t.box = b;
    t.likelihoods = oracle_likelihoods(cat, spec.oracle_accuracy, spec.kappa, rng);
    scene.blobs.push_back(t);
    scene.info.push_back({kind, cat});
    labels.push_back(label);
  };

  for (int line = 0; line < spec.n_lines; ++line) {
    Language lang = spec.languages[static_cast<std::size_t>(line) % spec.languages.size()];
    TypographyProfile prof = TypographyProfile::defaults(lang);
    if (lang == Language::Korean) prof.stack_split = spec.korean_stack_split;
    if (lang == Language::English && spec.ascender_prob >= 0.0) prof.ascender_prob = spec.ascender_prob;

    // Glyph layout relative to the line start.
    double h = detail::round_px(uniform(spec.line_height_lo, spec.line_height_hi));
    int n_chars = std::uniform_int_distribution<int>(spec.chars_lo, spec.chars_hi)(rng);
    std::vector<std::pair<double, double>> spans;
    double gap = std::max(spec.min_gap_px, detail::round_px(prof.gap * h));
    double cursor = 0.0;
    for (int c = 0; c < n_chars; ++c) {
      double w = std::max(2.0, detail::round_px(uniform(prof.width_lo, prof.width_hi) * h));
      spans.emplace_back(cursor, cursor + w);
      cursor += w + gap;
    }
    double line_w = spans.back().second;
    double slope = spec.tilt_max > 0.0 ? uniform(-spec.tilt_max, spec.tilt_max) : 0.0;
    double reach = prof.ascender_size * h * (prof.ascender_prob > 0.0 ? 1.0 : 0.0) + 3.0 * spec.jitter_sigma * h;
    double margin = spec.min_gap_px + 1.0;

    Box region;
    double x0 = 0.0, y0 = 0.0;
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      double span_y = std::abs(slope) * line_w;
      double max_x = static_cast<double>(spec.width) - line_w - 2 * margin;
      double max_y = static_cast<double>(spec.height) - h - span_y - 2 * (reach + margin);
      if (max_x < margin || max_y < margin) break;
      x0 = detail::round_px(uniform(margin, max_x));
      y0 = detail::round_px(uniform(margin + reach + (slope < 0 ? span_y : 0.0), max_y + reach));
      double top = std::min(y0, y0 + slope * line_w) - reach - margin;
      double bottom = std::max(y0, y0 + slope * line_w) + h + reach + margin;
      region = {x0 - margin, top, x0 + line_w + margin, bottom};
      if (region.left < 0 || region.top < 0 || region.right > static_cast<double>(spec.width) ||
          region.bottom > static_cast<double>(spec.height))
        continue;
      placed = std::none_of(occupied.begin(), occupied.end(),
                            [&](const Box& o) { return intersection_area(o, region) > 0.0; });
    }
    if (!placed) throw PlacementError("scene: could not place line " + std::to_string(line) + " after 1000 attempts");
    occupied.push_back(region);

    LineModel gt;
    gt.id = line;
    gt.language = lang;
    gt.mean = {slope, y0 - slope * x0};
    gt.base = {slope, y0 + h - slope * x0};
    gt.ref_x = x0 + 0.5 * line_w;
    scene.gt_lines.push_back(gt);

    for (auto [a, b] : spans) {
      double l = x0 + a, r = x0 + b, cx = 0.5 * (l + r);
      double top = gt.mean.at(cx) + spec.jitter_sigma * h * normal(rng);
      double bottom = gt.base.at(cx) + spec.jitter_sigma * h * normal(rng);
      if (unit(rng) < prof.ascender_prob) {
        if (unit(rng) < 0.5) {
          top -= prof.ascender_size * h;
        } else {
          bottom += prof.ascender_size * h;
        }
      }
      Box box{l, detail::round_px(top), r, detail::round_px(bottom)};
      if (box.bottom - box.top < 4) box.bottom = box.top + 4;

      int pieces = unit(rng) < prof.stack_split ? (unit(rng) < 0.5 ? 2 : 3) : 1;
      double inner = std::max(spec.min_gap_px, detail::round_px(0.08 * h));
      double piece_h = (box.height() - (pieces - 1) * inner) / pieces;
      if (pieces > 1 && piece_h < 3) pieces = 1;
      if (pieces == 1) {
        add_blob(box, BlobKind::Glyph, to_category(lang), Label(gt.id));
        continue;
      }
      for (int k = 0; k < pieces; ++k) {
        double t = box.top + k * (piece_h + inner);
        Box piece{l, detail::round_px(t), r, detail::round_px(t + piece_h)};
        if (k == pieces - 1) piece.bottom = box.bottom;
        add_blob(piece, BlobKind::Fragment, to_category(lang), Label(gt.id));
      }
      add_blob(box, BlobKind::Merged, to_category(lang), Label(gt.id));
    }
  }

  // Clutter: a share outlier_frac of all blobs, kept clear of the text lines.
  std::size_t n_text = scene.blobs.size();
  auto n_clutter =
      static_cast<std::size_t>(std::lround(spec.outlier_frac / (1.0 - spec.outlier_frac) * static_cast<double>(n_text)));
  std::vector<Box> clutter;
  for (std::size_t c = 0; c < n_clutter; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      double side = uniform(8.0, 40.0);
      double aspect = std::exp(uniform(std::log(0.3), std::log(3.0)));
      double w = std::max(3.0, detail::round_px(side * std::sqrt(aspect)));
      double hh = std::max(3.0, detail::round_px(side / std::sqrt(aspect)));
      double m = spec.min_gap_px + 1.0;
      if (w + 2 * m >= static_cast<double>(spec.width) || hh + 2 * m >= static_cast<double>(spec.height)) continue;
      double l = detail::round_px(uniform(m, static_cast<double>(spec.width) - w - m));
      double t = detail::round_px(uniform(m, static_cast<double>(spec.height) - hh - m));
      Box b{l, t, l + w, t + hh};
      Box padded{l - m, t - m, l + w + m, t + hh + m};
      auto hits = [&](const Box& o) { return intersection_area(o, padded) > 0.0; };
      if (std::any_of(occupied.begin(), occupied.end(), hits) || std::any_of(clutter.begin(), clutter.end(), hits))
        continue;
      clutter.push_back(b);
      add_blob(b, BlobKind::Clutter, Category::NonText, kOutlier);
      placed = true;
    }
    if (!placed) throw PlacementError("scene: could not place clutter blob after 1000 attempts");
  }
  scene.gt_labeling.labels = std::move(labels);
  return scene;
}

inline GrayImage render_scene(const SyntheticScene& scene, std::uint8_t background = 220, std::uint8_t ink = 40) {
  GrayImage img(scene.width, scene.height, background);
  for (std::size_t i = 0; i < scene.blobs.size(); ++i) {
    if (!rendered(scene.info[i].kind)) continue;
    const Box& b = scene.blobs[i].box;
    auto clampi = [](double v, std::size_t hi) {
      return static_cast<std::size_t>(std::clamp(std::lround(v), 0L, static_cast<long>(hi)));
    };
    for (std::size_t y = clampi(b.top, scene.height); y < clampi(b.bottom, scene.height); ++y)
      for (std::size_t x = clampi(b.left, scene.width); x < clampi(b.right, scene.width); ++x) img.at(x, y) = ink;
  }
  return img;
}

inline Json scene_spec_to_json(const SceneSpec& s) {
  Json j;
  j["n_lines"] = s.n_lines;
  j["languages"] = Json::array();
  for (Language v : s.languages) j["languages"].push_back(std::string(to_string(v)));
  j["jitter_sigma"] = s.jitter_sigma;
  j["outlier_frac"] = s.outlier_frac;
  j["oracle_accuracy"] = s.oracle_accuracy;
  j["kappa"] = std::isfinite(s.kappa) ? Json(s.kappa) : Json(nullptr);
  j["image_size"] = {s.width, s.height};
  j["line_height"] = {s.line_height_lo, s.line_height_hi};
  j["chars"] = {s.chars_lo, s.chars_hi};
  j["tilt_max"] = s.tilt_max;
  j["ascender_prob"] = s.ascender_prob;
  j["korean_stack_split"] = s.korean_stack_split;
  j["min_gap_px"] = s.min_gap_px;
  return j;
}

// Absent keys keep their defaults; a null kappa means no jitter.
inline SceneSpec scene_spec_from_json(const Json& j) {
  if (!j.is_object()) throw Error("scene spec: expected an object");
  static const std::set<std::string> known = {"n_lines",      "languages",  "jitter_sigma", "outlier_frac",
                                              "oracle_accuracy", "kappa",   "image_size",   "line_height",
                                              "chars",        "tilt_max",   "ascender_prob", "korean_stack_split",
                                              "min_gap_px"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw Error("scene spec." + key + ": unknown key");
  SceneSpec s;
  auto num = [&](const char* key, double& out) {
    if (j.contains(key)) out = detail::require_number(j.at(key), std::string("scene spec.") + key);
  };
  auto integer = [&](const char* key, auto& out) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number_integer()) throw Error(std::string("scene spec.") + key + ": expected an integer");
    out = j.at(key).get<std::remove_reference_t<decltype(out)>>();
  };
  integer("n_lines", s.n_lines);
  if (j.contains("languages")) {
    const Json& langs = j.at("languages");
    if (!langs.is_array()) throw Error("scene spec.languages: expected an array");
    s.languages.clear();
    for (const auto& v : langs) {
      if (!v.is_string()) throw Error("scene spec.languages: expected strings");
      s.languages.push_back(language_from_string(v.get<std::string>()));
    }
  }
  num("jitter_sigma", s.jitter_sigma);
  num("outlier_frac", s.outlier_frac);
  num("oracle_accuracy", s.oracle_accuracy);
  if (j.contains("kappa")) {
    if (j.at("kappa").is_null()) {
      s.kappa = std::numeric_limits<double>::infinity();
    } else {
      num("kappa", s.kappa);
    }
  }
  if (j.contains("image_size")) {
    const Json& sz = j.at("image_size");
    if (!sz.is_array() || sz.size() != 2 || !sz[0].is_number_integer() || !sz[1].is_number_integer())
      throw Error("scene spec.image_size: expected [width, height]");
    s.width = sz[0].get<std::size_t>();
    s.height = sz[1].get<std::size_t>();
  }
  if (j.contains("line_height")) {
    const Json& lh = j.at("line_height");
    if (!lh.is_array() || lh.size() != 2) throw Error("scene spec.line_height: expected [lo, hi]");
    s.line_height_lo = detail::require_number(lh[0], "scene spec.line_height[0]");
    s.line_height_hi = detail::require_number(lh[1], "scene spec.line_height[1]");
  }
  if (j.contains("chars")) {
    const Json& ch = j.at("chars");
    if (!ch.is_array() || ch.size() != 2 || !ch[0].is_number_integer() || !ch[1].is_number_integer())
      throw Error("scene spec.chars: expected [lo, hi]");
    s.chars_lo = ch[0].get<int>();
    s.chars_hi = ch[1].get<int>();
  }
  num("tilt_max", s.tilt_max);
  num("ascender_prob", s.ascender_prob);
  num("korean_stack_split", s.korean_stack_split);
  num("min_gap_px", s.min_gap_px);
  s.validate();
  return s;
}

inline Json scene_to_json(const SyntheticScene& scene) {
  Json j;
  j["width"] = scene.width;
  j["height"] = scene.height;
  Json blobs = Json::array();
  for (std::size_t i = 0; i < scene.blobs.size(); ++i) {
    Json b = to_json(scene.blobs[i]);
    b["kind"] = std::string(to_string(scene.info[i].kind));
    b["category"] = std::string(to_string(scene.info[i].category));
    blobs.push_back(b);
  }
  j["blobs"] = blobs;
  j["gt_lines"] = models_to_json(scene.gt_lines);
  j["gt_labeling"] = labeling_to_json(scene.gt_labeling, scene.blobs);
  return j;
}

inline SyntheticScene scene_from_json(const Json& j, double floor = kDefaultLikelihoodFloor) {
  if (!j.is_object()) throw Error("scene: expected an object");
  SyntheticScene s;
  if (j.contains("width")) s.width = j.at("width").get<std::size_t>();
  if (j.contains("height")) s.height = j.at("height").get<std::size_t>();
  const Json& blobs = detail::require(j, "blobs", "scene");
  s.blobs = blobs_from_json(blobs, floor);
  for (const auto& b : blobs) {
    SceneBlob info;
    if (b.contains("kind")) {
      std::string k = b.at("kind").get<std::string>();
      bool found = false;
      for (auto kind : {BlobKind::Glyph, BlobKind::Fragment, BlobKind::Merged, BlobKind::Clutter})
        if (to_string(kind) == k) {
          info.kind = kind;
          found = true;
        }
      if (!found) throw Error("scene: unknown blob kind '" + k + "'");
    }
    if (b.contains("category")) info.category = category_from_string(b.at("category").get<std::string>());
    s.info.push_back(info);
  }
  s.gt_lines = models_from_json(detail::require(j, "gt_lines", "scene"));
  s.gt_labeling = labeling_from_json(detail::require(j, "gt_labeling", "scene"), s.blobs);
  check_labeling(s.gt_labeling, s.blobs.size(), s.gt_lines);
  return s;
}

}  // namespace textline
