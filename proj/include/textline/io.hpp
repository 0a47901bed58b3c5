#pragma once

// JSON encodings of blobs, labelings and line models.
//
//   blob file     : [{"id": 3, "box": [l, t, r, b], "likelihoods": [en, kr, zh, digit, nontext]}, ...]
//   labeling file : {"<blob id>": <model id> | null, ...}
//   model file    : [{"id": 0, "language": "Korean", "mean": [slope, intercept],
//                     "base": [slope, intercept], "ref_x": 120.5}, ...]

#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "textline/core.hpp"

namespace textline {

using Json = nlohmann::ordered_json;

namespace detail {

inline const Json& require(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw Error(where + "." + key + ": missing field");
  return obj.at(key);
}

inline double require_number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw Error(where + ": expected a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(where + ": not finite");
  return d;
}

}  // namespace detail

inline Json to_json(const TextCandidate& blob) {
  Json j;
  j["id"] = blob.id;
  j["box"] = {blob.box.left, blob.box.top, blob.box.right, blob.box.bottom};
  j["likelihoods"] = Json::array();
  for (double p : blob.likelihoods) j["likelihoods"].push_back(p);
  return j;
}

inline Json blobs_to_json(std::span<const TextCandidate> blobs) {
  Json arr = Json::array();
  for (const auto& b : blobs) arr.push_back(to_json(b));
  return arr;
}

// Parses and validates a blob array. Likelihoods are floored and renormalized
// with `floor`; error messages name the first offending field.
inline std::vector<TextCandidate> blobs_from_json(const Json& arr, double floor = kDefaultLikelihoodFloor) {
  if (!arr.is_array()) throw Error("blobs: expected an array");
  std::vector<TextCandidate> blobs;
  blobs.reserve(arr.size());
  std::unordered_set<std::int64_t> seen;
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const Json& item = arr[k];
    std::string where = "blobs[" + std::to_string(k) + "]";
    TextCandidate blob;
    const Json& id = detail::require(item, "id", where);
    if (!id.is_number_integer()) throw Error(where + ".id: expected an integer");
    blob.id = id.get<std::int64_t>();
    if (!seen.insert(blob.id).second) throw Error(where + ".id: duplicate blob id");

    const Json& box = detail::require(item, "box", where);
    if (!box.is_array() || box.size() != 4) throw Error(where + ".box: expected [left, top, right, bottom]");
    blob.box = {detail::require_number(box[0], where + ".box[0]"), detail::require_number(box[1], where + ".box[1]"),
                detail::require_number(box[2], where + ".box[2]"), detail::require_number(box[3], where + ".box[3]")};
    if (!blob.box.valid()) throw Error(where + ".box: requires right > left and bottom > top");

    const Json& lik = detail::require(item, "likelihoods", where);
    if (!lik.is_array() || lik.size() != kNumCategories) throw Error(where + ".likelihoods: expected 5 values");
    Likelihoods raw{};
    for (std::size_t c = 0; c < kNumCategories; ++c)
      raw[c] = detail::require_number(lik[c], where + ".likelihoods[" + std::to_string(c) + "]");
    try {
      blob.likelihoods = normalize_likelihoods(raw, floor);
    } catch (const Error& e) {
      throw Error(where + ".likelihoods: " + e.what());
    }
    blobs.push_back(blob);
  }
  return blobs;
}

inline Json to_json(const LineModel& m) {
  Json j;
  j["id"] = m.id;
  j["language"] = std::string(to_string(m.language));
  j["mean"] = {m.mean.slope, m.mean.intercept};
  j["base"] = {m.base.slope, m.base.intercept};
  j["ref_x"] = m.ref_x;
  return j;
}

inline Json models_to_json(std::span<const LineModel> pool) {
  Json arr = Json::array();
  for (const auto& m : pool) arr.push_back(to_json(m));
  return arr;
}

inline ModelPool models_from_json(const Json& arr) {
  if (!arr.is_array()) throw Error("models: expected an array");
  ModelPool pool;
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const Json& item = arr[k];
    std::string where = "models[" + std::to_string(k) + "]";
    LineModel m;
    const Json& id = detail::require(item, "id", where);
    if (!id.is_number_integer()) throw Error(where + ".id: expected an integer");
    m.id = id.get<ModelId>();
    if (m.id < 0) throw Error(where + ".id: must be non-negative");
    const Json& lang = detail::require(item, "language", where);
    if (!lang.is_string()) throw Error(where + ".language: expected a string");
    try {
      m.language = language_from_string(lang.get<std::string>());
    } catch (const Error& e) {
      throw Error(where + ".language: " + e.what());
    }
    auto read_line = [&](const char* key) {
      const Json& v = detail::require(item, key, where);
      if (!v.is_array() || v.size() != 2) throw Error(where + "." + key + ": expected [slope, intercept]");
      return Line{detail::require_number(v[0], where + "." + key + "[0]"),
                  detail::require_number(v[1], where + "." + key + "[1]")};
    };
    m.mean = read_line("mean");
    m.base = read_line("base");
    if (item.contains("ref_x")) m.ref_x = detail::require_number(item.at("ref_x"), where + ".ref_x");
    pool.push_back(m);
  }
  PoolIndex check(pool);
  return pool;
}

inline Json labeling_to_json(const Labeling& labeling, std::span<const TextCandidate> blobs) {
  if (labeling.size() != blobs.size()) throw Error("labeling does not cover the blob set");
  Json j = Json::object();
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    Label l = labeling[i];
    j[std::to_string(blobs[i].id)] = l.is_outlier() ? Json(nullptr) : Json(l.model());
  }
  return j;
}

// Blobs absent from the object are rejected; the result is aligned with `blobs`.
inline Labeling labeling_from_json(const Json& obj, std::span<const TextCandidate> blobs) {
  if (!obj.is_object()) throw Error("labeling: expected an object");
  std::unordered_map<std::int64_t, std::size_t> pos;
  for (std::size_t i = 0; i < blobs.size(); ++i) pos.emplace(blobs[i].id, i);
  Labeling labeling(blobs.size());
  std::vector<bool> covered(blobs.size(), false);
  for (const auto& [key, value] : obj.items()) {
    std::int64_t id = 0;
    try {
      std::size_t used = 0;
      id = std::stoll(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw Error("labeling." + key + ": key is not a blob id");
    }
    auto it = pos.find(id);
    if (it == pos.end()) throw Error("labeling." + key + ": unknown blob id");
    if (value.is_null()) {
      labeling[it->second] = kOutlier;
    } else if (value.is_number_integer() && value.get<std::int64_t>() >= 0) {
      labeling[it->second] = Label(value.get<ModelId>());
    } else {
      throw Error("labeling." + key + ": expected a non-negative model id or null");
    }
    covered[it->second] = true;
  }
  for (std::size_t i = 0; i < blobs.size(); ++i)
    if (!covered[i]) throw Error("labeling: blob " + std::to_string(blobs[i].id) + " has no entry");
  return labeling;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json read_json_file(const std::string& path) {
  std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("failed writing " + path);
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace textline
