#pragma once

// Run configuration as JSON. Absent keys keep built-in defaults; unknown keys
// are rejected so typos surface as errors.
//
// {
//   "energy":  {"line_cost": 20, "language_cost": 10, "outlier_cost": 8,
//               "language_scale": {"English": 0.5, ...}, "likelihood_floor": 1e-6,
//               "geometric_mode": "squared", "slope_max": 2, "min_line_height": 2,
//               "rng_seed": 0, "max_iterations": 5, "convergence_tol": 1e-6, "extra_random": 0},
//   "imaging": {"max_dim": 1024, "edge_threshold": 96, "min_area": 12, "max_area_frac": 0.25,
//               "gap_frac": 0.2, "cover_min": 0.45, "aspect_lo": 0.7, "aspect_hi": 1.4},
//   "eval":    {"overlap_min": 0.5}
// }

#include "textline/imaging.hpp"
#include "textline/io.hpp"

namespace textline {

struct Config {
  EnergyParams energy;
  ImagingParams imaging;
  double overlap_min = 0.5;

  void validate() const {
    energy.validate();
    if (imaging.max_dim < 3) throw Error("imaging.max_dim must be at least 3");
    if (imaging.edge_threshold < 0) throw Error("imaging.edge_threshold must be non-negative");
    if (!(imaging.max_area_frac > 0.0 && imaging.max_area_frac <= 1.0))
      throw Error("imaging.max_area_frac must lie in (0, 1]");
    if (!(imaging.merge.aspect_lo <= imaging.merge.aspect_hi)) throw Error("imaging.aspect_lo exceeds aspect_hi");
    if (!(overlap_min > 0.0 && overlap_min <= 1.0)) throw Error("eval.overlap_min must lie in (0, 1]");
  }
};

namespace detail {

class Section {
 public:
  Section(const Json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw Error(name_ + ": expected an object");
  }

  void number(const char* key, double& out) {
    if (!take(key)) return;
    out = require_number(j_.at(key), name_ + "." + key);
  }

  template <class Int>
  void integer(const char* key, Int& out) {
    if (!take(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) throw Error(name_ + "." + key + ": expected an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (v.get<std::int64_t>() < 0) throw Error(name_ + "." + key + ": must be non-negative");
    }
    out = v.get<Int>();
  }

  const Json* raw(const char* key) { return take(key) ? &j_.at(key) : nullptr; }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw Error(name_ + "." + key + ": unknown key");
  }

 private:
  bool take(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const Json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline void apply_config(const Json& j, Config& c) {
  detail::Section top(j, "config");
  if (const Json* e = top.raw("energy")) {
    detail::Section s(*e, "energy");
    s.number("line_cost", c.energy.line_cost);
    s.number("language_cost", c.energy.language_cost);
    s.number("outlier_cost", c.energy.outlier_cost);
    if (const Json* scales = s.raw("language_scale")) {
      detail::Section ls(*scales, "energy.language_scale");
      for (Language v : kLanguages) ls.number(std::string(to_string(v)).c_str(), c.energy.language_scale[index_of(v)]);
      ls.finish();
    }
    s.number("likelihood_floor", c.energy.likelihood_floor);
    if (const Json* mode = s.raw("geometric_mode")) {
      if (*mode == "squared") {
        c.energy.geometric_mode = GeometricMode::Squared;
      } else if (*mode == "absolute") {
        c.energy.geometric_mode = GeometricMode::Absolute;
      } else {
        throw Error("energy.geometric_mode: expected \"squared\" or \"absolute\"");
      }
    }
    s.number("slope_max", c.energy.slope_max);
    s.number("min_line_height", c.energy.min_line_height);
    s.integer("rng_seed", c.energy.rng_seed);
    s.integer("max_iterations", c.energy.max_iterations);
    s.number("convergence_tol", c.energy.convergence_tol);
    s.integer("extra_random", c.energy.extra_random);
    s.finish();
  }
  if (const Json* im = top.raw("imaging")) {
    detail::Section s(*im, "imaging");
    s.integer("max_dim", c.imaging.max_dim);
    s.integer("edge_threshold", c.imaging.edge_threshold);
    s.number("min_area", c.imaging.min_area);
    s.number("max_area_frac", c.imaging.max_area_frac);
    s.number("gap_frac", c.imaging.merge.gap_frac);
    s.number("cover_min", c.imaging.merge.cover_min);
    s.number("aspect_lo", c.imaging.merge.aspect_lo);
    s.number("aspect_hi", c.imaging.merge.aspect_hi);
    s.finish();
  }
  if (const Json* ev = top.raw("eval")) {
    detail::Section s(*ev, "eval");
    s.number("overlap_min", c.overlap_min);
    s.finish();
  }
  top.finish();
}

inline Json config_to_json(const Config& c) {
  Json j;
  const EnergyParams& e = c.energy;
  Json& je = j["energy"];
  je["line_cost"] = e.line_cost;
  je["language_cost"] = e.language_cost;
  je["outlier_cost"] = e.outlier_cost;
  for (Language v : kLanguages) je["language_scale"][std::string(to_string(v))] = e.scale(v);
  je["likelihood_floor"] = e.likelihood_floor;
  je["geometric_mode"] = e.geometric_mode == GeometricMode::Squared ? "squared" : "absolute";
  je["slope_max"] = e.slope_max;
  je["min_line_height"] = e.min_line_height;
  je["rng_seed"] = e.rng_seed;
  je["max_iterations"] = e.max_iterations;
  je["convergence_tol"] = e.convergence_tol;
  je["extra_random"] = e.extra_random;
  Json& ji = j["imaging"];
  ji["max_dim"] = c.imaging.max_dim;
  ji["edge_threshold"] = c.imaging.edge_threshold;
  ji["min_area"] = c.imaging.min_area;
  ji["max_area_frac"] = c.imaging.max_area_frac;
  ji["gap_frac"] = c.imaging.merge.gap_frac;
  ji["cover_min"] = c.imaging.merge.cover_min;
  ji["aspect_lo"] = c.imaging.merge.aspect_lo;
  ji["aspect_hi"] = c.imaging.merge.aspect_hi;
  j["eval"]["overlap_min"] = c.overlap_min;
  return j;
}

}  // namespace textline
