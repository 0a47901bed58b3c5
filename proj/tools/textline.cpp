#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "textline/textline.hpp"

namespace fs = std::filesystem;
using namespace textline;

namespace {

// Exit 2: bad input, bad config, missing files.
struct InputError : Error {
  using Error::Error;
};

constexpr int kExitInput = 2;
constexpr int kExitRuntime = 3;

struct Artifact {
  std::string path;
  std::string content;
};

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iters;
  std::optional<double> overlap_min;
};

void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("--config", o.config_path, "JSON config file (falls back to $TEXTLINE_MDL_CONFIG)");
  sub->add_option("--seed", o.seed, "RNG seed");
  sub->add_option("--max-iters", o.max_iters, "PEARL iteration cap");
}

template <class F>
auto as_input(const std::string& what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError(what + ": " + e.what());
  }
}

Config load_config(const CommonOptions& o) {
  Config c;
  std::string path = o.config_path;
  if (path.empty())
    if (const char* env = std::getenv("TEXTLINE_MDL_CONFIG")) path = env;
  if (!path.empty()) as_input("config " + path, [&] { apply_config(read_json_file(path), c); });
  if (o.seed) c.energy.rng_seed = *o.seed;
  if (o.max_iters) c.energy.max_iterations = *o.max_iters;
  if (o.overlap_min) c.overlap_min = *o.overlap_min;
  as_input("config", [&] { c.validate(); });
  return c;
}

// Files in `dir` whose names end with `suffix`, sorted by name.
std::vector<fs::path> list_files(const fs::path& dir, const std::string& suffix) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > suffix.size() && name.ends_with(suffix)) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string strip_suffix(const std::string& name, const std::string& suffix) {
  return name.ends_with(suffix) ? name.substr(0, name.size() - suffix.size()) : name;
}

// Runs fn(0..n-1) on a bounded set of threads; results keep index order.
template <class T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  std::size_t width = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < n; start += width) {
    std::vector<std::future<T>> batch;
    for (std::size_t i = start; i < std::min(n, start + width); ++i)
      batch.push_back(std::async(std::launch::async, fn, i));
    for (std::size_t k = 0; k < batch.size(); ++k) out[start + k] = batch[k].get();
  }
  return out;
}

void write_all(const std::vector<Artifact>& artifacts) {
  for (const auto& a : artifacts) {
    fs::path p(a.path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_text_file(a.path, a.content);
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

constexpr std::array<const char*, 12> kPalette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                               "#e377c2", "#17becf", "#bcbd22", "#7f7f7f", "#393b79", "#ad494a"};

const char* color_of(ModelId id) { return kPalette[static_cast<std::size_t>(id) % kPalette.size()]; }

std::string render_svg(std::span<const TextCandidate> blobs, std::span<const LineModel> pool, const Labeling& labeling,
                       double width, double height) {
  if (width <= 0 || height <= 0) {
    width = height = 16;
    for (const auto& b : blobs) width = std::max(width, b.box.right + 10), height = std::max(height, b.box.bottom + 10);
  }
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) +
                  "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    const Box& b = blobs[i].box;
    const char* stroke = labeling[i].is_outlier() ? "#c0c0c0" : color_of(labeling[i].model());
    s += "<rect x=\"" + fmt(b.left) + "\" y=\"" + fmt(b.top) + "\" width=\"" + fmt(b.width()) + "\" height=\"" +
         fmt(b.height()) + "\" fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"1\"/>\n";
  }
  for (const auto& m : pool) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < blobs.size(); ++i)
      if (labeling[i] == Label(m.id)) lo = std::min(lo, blobs[i].box.left), hi = std::max(hi, blobs[i].box.right);
    if (!(lo < hi)) continue;
    auto segment = [&](double y0, double y1, const char* dash) {
      s += "<line x1=\"" + fmt(lo) + "\" y1=\"" + fmt(y0) + "\" x2=\"" + fmt(hi) + "\" y2=\"" + fmt(y1) +
           "\" stroke=\"" + color_of(m.id) + "\" stroke-width=\"1.5\"" + dash + "/>\n";
    };
    segment(m.mean.at(lo), m.mean.at(hi), "");
    segment(m.base.at(lo), m.base.at(hi), "");
    segment(0.5 * (m.mean.at(lo) + m.base.at(lo)), 0.5 * (m.mean.at(hi) + m.base.at(hi)), " stroke-dasharray=\"4 3\"");
    s += "<text x=\"" + fmt(lo) + "\" y=\"" + fmt(m.mean.at(lo) - 3) + "\" font-size=\"10\" fill=\"" + color_of(m.id) +
         "\">" + std::to_string(m.id) + " " + std::string(to_string(m.language)) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

struct FitOutput {
  std::vector<Artifact> artifacts;
  std::string summary;
};

// Pearl over the blobs in id order, so a permuted input file gives the same result.
FitOutput fit_and_package(std::vector<TextCandidate> blobs, const Config& cfg, const std::string& prefix,
                          bool svg, double width, double height, Json extra) {
  std::sort(blobs.begin(), blobs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  auto t0 = std::chrono::steady_clock::now();
  PearlResult r = pearl(blobs, cfg.energy);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Json report;
  report["config"] = config_to_json(cfg);
  for (auto& [k, v] : extra.items()) report[k] = v;
  report["n_blobs"] = blobs.size();
  report["n_lines"] = r.pool.size();
  report["iterations"] = r.iterations;
  report["trace"] = r.trace;
  report["final_energy"] = r.trace.back();
  Json inliers = Json::object();
  for (const auto& m : r.pool) {
    Json ids = Json::array();
    for (std::size_t i = 0; i < blobs.size(); ++i)
      if (r.labeling[i] == Label(m.id)) ids.push_back(blobs[i].id);
    inliers[std::to_string(m.id)] = ids;
  }
  report["inliers"] = inliers;

  FitOutput out;
  out.artifacts.push_back({prefix + ".lines.json", dump(models_to_json(r.pool))});
  out.artifacts.push_back({prefix + ".labeling.json", dump(labeling_to_json(r.labeling, blobs))});
  out.artifacts.push_back({prefix + ".report.json", dump(report)});
  if (svg) out.artifacts.push_back({prefix + ".svg", render_svg(blobs, r.pool, r.labeling, width, height)});
  out.summary = prefix + ": " + std::to_string(blobs.size()) + " blobs, " + std::to_string(r.pool.size()) +
                " lines, energy " + fmt(r.trace.back()) + ", " + fmt(secs) + " s";
  return out;
}

// A blob file is either a bare array or an object with a "blobs" array (scene files).
std::vector<TextCandidate> load_blobs(const std::string& path, const Config& cfg) {
  return as_input(path, [&] {
    Json j = read_json_file(path);
    const Json& arr = j.is_object() ? detail::require(j, "blobs", "input") : j;
    return blobs_from_json(arr, cfg.energy.likelihood_floor);
  });
}

void finish(std::vector<FitOutput>& outs) {
  std::vector<Artifact> all;
  for (auto& o : outs) all.insert(all.end(), o.artifacts.begin(), o.artifacts.end());
  write_all(all);
  for (const auto& o : outs) std::cerr << o.summary << "\n";
}

// ---- fit ----

struct FitOptions {
  CommonOptions common;
  std::string input, out;
  bool svg = false;
};

void cmd_fit(const FitOptions& o) {
  Config cfg = load_config(o.common);
  bool dir = fs::is_directory(o.input);
  std::vector<fs::path> inputs;
  if (dir) {
    inputs = list_files(o.input, ".json");
  } else {
    if (!fs::exists(o.input)) throw InputError("cannot open " + o.input);
    inputs.push_back(o.input);
  }
  std::vector<std::vector<TextCandidate>> blobs;
  for (const auto& p : inputs) blobs.push_back(load_blobs(p.string(), cfg));

  auto outs = parallel_map<FitOutput>(inputs.size(), [&](std::size_t k) {
    std::string prefix = dir ? (fs::path(o.out) / inputs[k].stem()).string() : o.out;
    Json extra;
    extra["input"] = inputs[k].filename().string();
    return fit_and_package(blobs[k], cfg, prefix, o.svg, 0, 0, extra);
  });
  finish(outs);
}

// ---- detect ----

struct DetectOptions {
  CommonOptions common;
  std::string input, out, model, oracle_scene;
  bool svg = false;
};

GrayImage load_image(const std::string& path) {
  return as_input(path, [&] { return load_pgm(read_text_file(path)); });
}

// Stand-in classifier: each detected box takes the likelihoods of the scene
// blob it overlaps best, or a confident NonText vector.
std::vector<TextCandidate> oracle_candidates(const std::vector<Box>& boxes, const SyntheticScene& scene, double floor) {
  std::vector<TextCandidate> out;
  Likelihoods nontext = normalize_likelihoods({0.025, 0.025, 0.025, 0.025, 0.9}, floor);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    TextCandidate t{static_cast<std::int64_t>(i), boxes[i], nontext};
    double best = 0.5;
    for (const auto& b : scene.blobs) {
      double iou = box_iou(b.box, boxes[i]);
      if (iou >= best) best = iou, t.likelihoods = b.likelihoods;
    }
    out.push_back(t);
  }
  return out;
}

void cmd_detect(const DetectOptions& o) {
  Config cfg = load_config(o.common);
  if (o.model.empty() == o.oracle_scene.empty()) throw InputError("detect needs exactly one of --model or --oracle-scene");
  bool dir = fs::is_directory(o.input);
  std::vector<fs::path> inputs;
  if (dir) {
    inputs = list_files(o.input, ".pgm");
  } else {
    inputs.push_back(o.input);
  }
  std::vector<GrayImage> images;
  for (const auto& p : inputs) images.push_back(load_image(p.string()));

  std::optional<BoostModel> model;
  if (!o.model.empty()) model = as_input(o.model, [&] { return boost_model_from_json(read_json_file(o.model)); });
  std::vector<SyntheticScene> scenes;
  if (!o.oracle_scene.empty()) {
    for (const auto& p : inputs) {
      fs::path sp = fs::is_directory(o.oracle_scene) ? fs::path(o.oracle_scene) / (p.stem().string() + ".json")
                                                     : fs::path(o.oracle_scene);
      scenes.push_back(as_input(sp.string(), [&] {
        return scene_from_json(read_json_file(sp.string()), cfg.energy.likelihood_floor);
      }));
    }
  }

  auto outs = parallel_map<FitOutput>(inputs.size(), [&](std::size_t k) {
    const GrayImage& img = images[k];
    auto boxes = detect_boxes(img, cfg.imaging);
    std::vector<TextCandidate> blobs;
    if (model) {
      for (std::size_t i = 0; i < boxes.size(); ++i) {
        auto scores = class_scores(*model, extract_features(img, boxes[i]));
        blobs.push_back({static_cast<std::int64_t>(i), boxes[i], likelihoods_from_scores(scores, cfg.energy.likelihood_floor)});
      }
    } else {
      blobs = oracle_candidates(boxes, scenes[k], cfg.energy.likelihood_floor);
    }
    std::string prefix = dir ? (fs::path(o.out) / inputs[k].stem()).string() : o.out;
    Json extra;
    extra["input"] = inputs[k].filename().string();
    extra["classifier"] = model ? "boost" : "oracle";
    auto fit = fit_and_package(blobs, cfg, prefix, o.svg, static_cast<double>(img.width),
                               static_cast<double>(img.height), extra);
    fit.artifacts.push_back({prefix + ".blobs.json", dump(blobs_to_json(blobs))});
    return fit;
  });
  finish(outs);
}

// ---- synth ----

struct SynthOptions {
  CommonOptions common;
  std::string spec, out;
  int count = 1;
  bool render = false;
};

void cmd_synth(const SynthOptions& o) {
  Config cfg = load_config(o.common);
  SceneSpec spec = as_input(o.spec, [&] { return scene_spec_from_json(read_json_file(o.spec)); });
  if (o.count < 1) throw InputError("--count must be at least 1");
  std::uint64_t seed = cfg.energy.rng_seed;
  std::vector<Artifact> artifacts;
  for (int k = 0; k < o.count; ++k) {
    std::uint64_t s = seed + static_cast<std::uint64_t>(k);
    std::mt19937_64 rng(s);
    SyntheticScene scene = generate_scene(spec, rng);
    std::string stem = (fs::path(o.out) / ("scene_" + std::to_string(s))).string();
    artifacts.push_back({stem + ".json", dump(scene_to_json(scene))});
    if (o.render) artifacts.push_back({stem + ".pgm", save_pgm(render_scene(scene))});
  }
  write_all(artifacts);
  std::cerr << "wrote " << o.count << " scene(s) to " << o.out << "\n";
}

// ---- eval ----

struct EvalOptions {
  CommonOptions common;
  std::string detected, truth, out;
};

struct EvalRow {
  std::string name;
  Metrics metrics;
  std::size_t n_detected = 0, n_truth = 0;
};

void cmd_eval(const EvalOptions& o) {
  Config cfg = load_config(o.common);
  for (const auto& d : {o.detected, o.truth})
    if (!fs::is_directory(d)) throw InputError(d + ": not a directory");
  auto det_files = list_files(o.detected, ".lines.json");
  auto gt_files = list_files(o.truth, ".json");
  std::set<std::string> det_names, gt_names;
  for (const auto& p : det_files) det_names.insert(strip_suffix(p.filename().string(), ".lines.json"));
  for (const auto& p : gt_files) gt_names.insert(strip_suffix(p.filename().string(), ".json"));
  for (const auto& n : gt_names)
    if (!det_names.count(n)) throw InputError("missing detection for " + n);
  for (const auto& n : det_names)
    if (!gt_names.count(n)) throw InputError("missing ground truth for " + n);

  struct Pair {
    std::string name;
    SyntheticScene truth;
    ModelPool lines;
    Labeling det_labeling, gt_labeling;
  };
  std::vector<Pair> pairs;
  for (const auto& name : gt_names) {
    Pair p;
    p.name = name;
    fs::path base = fs::path(o.detected) / name;
    std::string gt_path = (fs::path(o.truth) / (name + ".json")).string();
    p.truth = as_input(gt_path, [&] { return scene_from_json(read_json_file(gt_path)); });
    p.lines = as_input(base.string() + ".lines.json",
                       [&] { return models_from_json(read_json_file(base.string() + ".lines.json")); });
    std::string blobs_path = base.string() + ".blobs.json";
    std::string lab_path = base.string() + ".labeling.json";
    if (fs::exists(blobs_path)) {
      // Detections live on their own blob set: carry the truth over by box overlap.
      auto det_blobs = load_blobs(blobs_path, cfg);
      p.det_labeling = as_input(lab_path, [&] { return labeling_from_json(read_json_file(lab_path), det_blobs); });
      p.gt_labeling = transfer_labeling(p.truth.blobs, p.truth.gt_labeling, det_blobs);
    } else {
      p.det_labeling = as_input(lab_path, [&] { return labeling_from_json(read_json_file(lab_path), p.truth.blobs); });
      p.gt_labeling = p.truth.gt_labeling;
    }
    as_input(lab_path, [&] { check_labeling(p.det_labeling, p.det_labeling.size(), p.lines); });
    pairs.push_back(std::move(p));
  }

  auto rows = parallel_map<EvalRow>(pairs.size(), [&](std::size_t k) {
    const Pair& p = pairs[k];
    EvalRow row;
    row.name = p.name;
    row.metrics = evaluate_lines(p.lines, p.det_labeling, p.truth.gt_lines, p.gt_labeling, cfg.overlap_min);
    row.n_detected = detail::inlier_sets(p.det_labeling).size();
    row.n_truth = detail::inlier_sets(p.truth.gt_labeling).size();
    return row;
  });

  Json scenes = Json::array();
  std::string csv = "scene,n_detected,n_truth,matched,precision,recall,f\n";
  double sp = 0, sr = 0, sf = 0;
  std::size_t nd = 0, nt = 0, nm = 0;
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    Json j = to_json(r.metrics);
    j["scene"] = r.name;
    j["n_detected"] = r.n_detected;
    j["n_truth"] = r.n_truth;
    scenes.push_back(j);
    csv += r.name + "," + std::to_string(r.n_detected) + "," + std::to_string(r.n_truth) + "," +
           std::to_string(r.metrics.matches.size()) + "," + num(r.metrics.precision) + "," + num(r.metrics.recall) +
           "," + num(r.metrics.f) + "\n";
    sp += r.metrics.precision, sr += r.metrics.recall, sf += r.metrics.f;
    nd += r.n_detected, nt += r.n_truth, nm += r.metrics.matches.size();
  }
  double n = rows.empty() ? 1.0 : static_cast<double>(rows.size());
  Json agg;
  agg["scenes"] = rows.size();
  agg["mean_precision"] = sp / n;
  agg["mean_recall"] = sr / n;
  agg["mean_f"] = sf / n;
  Metrics pooled = precision_recall_f(std::vector<LineMatch>(nm), nd, nt);
  agg["pooled_precision"] = pooled.precision;
  agg["pooled_recall"] = pooled.recall;
  agg["pooled_f"] = pooled.f;
  csv += "mean," + std::to_string(nd) + "," + std::to_string(nt) + "," + std::to_string(nm) + "," + num(sp / n) + "," +
         num(sr / n) + "," + num(sf / n) + "\n";

  Json report;
  report["config"] = config_to_json(cfg);
  report["scenes"] = scenes;
  report["aggregate"] = agg;
  write_all({{o.out + ".metrics.json", dump(report)}, {o.out + ".metrics.csv", csv}});
  std::cout << "scenes " << rows.size() << "  mean P " << num(sp / n) << "  R " << num(sr / n) << "  F " << num(sf / n)
            << "\n";
}

// ---- train ----

struct TrainOptions {
  CommonOptions common;
  std::string manifest, out;
  int rounds = 100, depth = 2;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    auto a = f.find_first_not_of(" \t"), b = f.find_last_not_of(" \t");
    f = a == std::string::npos ? "" : f.substr(a, b - a + 1);
  }
  return out;
}

void cmd_train(const TrainOptions& o) {
  Config cfg = load_config(o.common);
  if (o.rounds < 1) throw InputError("--rounds must be at least 1");
  if (o.depth < 1) throw InputError("--depth must be at least 1");
  std::string text = as_input(o.manifest, [&] { return read_text_file(o.manifest); });
  fs::path root = fs::path(o.manifest).parent_path();
  std::map<std::string, GrayImage> images;
  TrainingSet data;
  std::set<Category> cats;
  std::istringstream in(text);
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    auto f = split_csv(line);
    if (f.size() == 1 && f[0].empty()) continue;
    if (!f[0].empty() && f[0][0] == '#') continue;
    if (lineno == 1 && f[0] == "pgm_path") continue;
    std::string where = o.manifest + ":" + std::to_string(lineno);
    if (f.size() != 6) throw InputError(where + ": expected pgm_path,left,top,right,bottom,category");
    fs::path img_path = fs::path(f[0]).is_absolute() ? fs::path(f[0]) : root / f[0];
    auto it = images.find(img_path.string());
    if (it == images.end()) it = images.emplace(img_path.string(), load_image(img_path.string())).first;
    Box box = as_input(where, [&] {
      return Box{std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4])};
    });
    if (!box.valid() || box.left < 0 || box.top < 0 || box.right > static_cast<double>(it->second.width) ||
        box.bottom > static_cast<double>(it->second.height))
      throw InputError(where + ": box outside image or empty");
    Category c = as_input(where, [&] { return category_from_string(f[5]); });
    cats.insert(c);
    data.push_back({extract_features(it->second, box), c});
  }
  if (cats.size() < 2) throw InputError("training needs at least 2 categories");
  BoostParams bp;
  bp.rounds = o.rounds;
  bp.depth_max = o.depth;
  bp.seed = cfg.energy.rng_seed;
  BoostModel model = train_adaboost(data, bp);
  write_all({{o.out, dump(to_json(model))}});
  std::cout << "examples " << data.size() << "  rounds " << model.rounds.size() << "  training accuracy "
            << fmt(training_accuracy(model, data)) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilingual text line detection by energy minimization"};
  app.require_subcommand(1);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit text lines to a blob file (or a directory of them)");
  add_common(fit_cmd, fit.common);
  fit_cmd->add_option("input", fit.input, "Blob JSON file or directory")->required();
  fit_cmd->add_option("-o,--out", fit.out, "Output prefix (directory for directory input)")->required();
  fit_cmd->add_flag("--svg", fit.svg, "Also write an SVG render");

  DetectOptions det;
  auto* det_cmd = app.add_subcommand("detect", "Detect and classify text lines in PGM images");
  add_common(det_cmd, det.common);
  det_cmd->add_option("input", det.input, "PGM image or directory")->required();
  det_cmd->add_option("-o,--out", det.out, "Output prefix (directory for directory input)")->required();
  det_cmd->add_option("--model", det.model, "Classifier model JSON");
  det_cmd->add_option("--oracle-scene", det.oracle_scene, "Scene JSON (or directory) supplying oracle likelihoods");
  det_cmd->add_flag("--svg", det.svg, "Also write an SVG render");

  SynthOptions syn;
  auto* syn_cmd = app.add_subcommand("synth", "Generate synthetic scenes with ground truth");
  add_common(syn_cmd, syn.common);
  syn_cmd->add_option("spec", syn.spec, "Scene spec JSON")->required();
  syn_cmd->add_option("-o,--out", syn.out, "Output directory")->required();
  syn_cmd->add_option("--count", syn.count, "Number of scenes (seeds seed..seed+count-1)");
  syn_cmd->add_flag("--render", syn.render, "Also write PGM renders");

  EvalOptions ev;
  auto* ev_cmd = app.add_subcommand("eval", "Score detections against ground truth scenes");
  add_common(ev_cmd, ev.common);
  ev_cmd->add_option("detected", ev.detected, "Directory of NAME.lines.json / NAME.labeling.json")->required();
  ev_cmd->add_option("truth", ev.truth, "Directory of NAME.json scenes")->required();
  ev_cmd->add_option("-o,--out", ev.out, "Output prefix")->required();
  ev_cmd->add_option("--overlap-min", ev.common.overlap_min, "Minimum blob-set overlap for a match");

  TrainOptions tr;
  auto* tr_cmd = app.add_subcommand("train", "Train the boosted patch classifier");
  add_common(tr_cmd, tr.common);
  tr_cmd->add_option("manifest", tr.manifest, "CSV: pgm_path,left,top,right,bottom,category")->required();
  tr_cmd->add_option("-o,--out", tr.out, "Model JSON path")->required();
  tr_cmd->add_option("--rounds", tr.rounds, "Boosting rounds");
  tr_cmd->add_option("--depth", tr.depth, "Tree depth");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*fit_cmd) cmd_fit(fit);
    if (*det_cmd) cmd_detect(det);
    if (*syn_cmd) cmd_synth(syn);
    if (*ev_cmd) cmd_eval(ev);
    if (*tr_cmd) cmd_train(tr);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
