#pragma once

// Edge-based text candidate detection: gray image -> Sobel edge map ->
// threshold -> 8-connected components, plus merged candidates covering
// over-segmented characters.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "textline/core.hpp"

namespace textline {

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), pixels(w * h, fill) {}

  std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
  std::uint8_t& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

struct BinaryImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> bits;  // 0 or 1, row-major

  bool at(std::size_t x, std::size_t y) const { return bits[y * width + x] != 0; }
  std::size_t popcount() const { return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1)); }
};

// Binary (P5) portable graymap with maxval <= 255.
inline GrayImage load_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&](const char* what) {
    skip_space();
    std::size_t start = pos;
    std::uint64_t v = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      v = v * 10 + static_cast<std::uint64_t>(bytes[pos] - '0');
      if (v > (1U << 24)) throw Error(std::string("pgm: ") + what + " too large");
      ++pos;
    }
    if (pos == start) throw Error(std::string("pgm: malformed header (") + what + ")");
    return static_cast<std::size_t>(v);
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw Error("pgm: malformed header (expected P5)");
  pos = 2;
  std::size_t w = read_uint("width");
  std::size_t h = read_uint("height");
  std::size_t maxval = read_uint("maxval");
  if (w == 0 || h == 0) throw Error("pgm: malformed header (zero dimension)");
  if (maxval == 0 || maxval > 255) throw Error("pgm: malformed header (maxval must be 1..255)");
  if (pos >= bytes.size()) throw Error("pgm: truncated payload");
  ++pos;  // single whitespace byte before the raster
  if (bytes.size() - pos < w * h) throw Error("pgm: truncated payload");
  GrayImage img(w, h);
  for (std::size_t k = 0; k < w * h; ++k) img.pixels[k] = static_cast<std::uint8_t>(bytes[pos + k]);
  return img;
}

inline std::string save_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  return out;
}

// Area-averaging resample so the longer side is at most max_dim.
inline GrayImage downscale(const GrayImage& img, std::size_t max_dim) {
  if (max_dim == 0) throw Error("downscale: max_dim must be positive");
  std::size_t longest = std::max(img.width, img.height);
  if (longest <= max_dim) return img;
  double s = static_cast<double>(max_dim) / static_cast<double>(longest);
  std::size_t nw = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(img.width * s)), 1, max_dim);
  std::size_t nh = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(img.height * s)), 1, max_dim);

  // Per-axis overlap weights between output cells and source pixels.
  struct Tap {
    std::size_t src;
    double w;
  };
  auto taps = [](std::size_t n_src, std::size_t n_dst) {
    std::vector<std::vector<Tap>> out(n_dst);
    double step = static_cast<double>(n_src) / static_cast<double>(n_dst);
    for (std::size_t d = 0; d < n_dst; ++d) {
      double lo = d * step, hi = (d + 1) * step;
      for (auto s0 = static_cast<std::size_t>(lo); s0 < n_src && static_cast<double>(s0) < hi; ++s0) {
        double w = std::min(hi, s0 + 1.0) - std::max(lo, static_cast<double>(s0));
        if (w > 0) out[d].push_back({s0, w / step});
      }
    }
    return out;
  };
  auto tx = taps(img.width, nw);
  auto ty = taps(img.height, nh);
  GrayImage out(nw, nh);
  for (std::size_t y = 0; y < nh; ++y)
    for (std::size_t x = 0; x < nw; ++x) {
      double acc = 0.0;
      for (const auto& a : ty[y])
        for (const auto& b : tx[x]) acc += a.w * b.w * img.at(b.src, a.src);
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0L, 255L));
    }
  return out;
}

// min(255, |Gx| + |Gy|) with 3x3 Sobel kernels; border pixels are zero.
inline GrayImage sobel_edge_map(const GrayImage& img) {
  if (img.width < 3 || img.height < 3) throw Error("sobel: image smaller than kernel");
  GrayImage out(img.width, img.height, 0);
  for (std::size_t y = 1; y + 1 < img.height; ++y)
    for (std::size_t x = 1; x + 1 < img.width; ++x) {
      auto p = [&](int dx, int dy) { return static_cast<int>(img.at(x + dx, y + dy)); };
      int gx = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
      int gy = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
      out.at(x, y) = static_cast<std::uint8_t>(std::min(255, std::abs(gx) + std::abs(gy)));
    }
  return out;
}

inline BinaryImage binarize(const GrayImage& edges, int threshold) {
  BinaryImage b{edges.width, edges.height, std::vector<std::uint8_t>(edges.pixels.size(), 0)};
  for (std::size_t k = 0; k < edges.pixels.size(); ++k) b.bits[k] = edges.pixels[k] >= threshold ? 1 : 0;
  return b;
}

// Bounding boxes (half-open) of 8-connected foreground components whose box
// area lies in [min_area, max_area_frac * image area], in scanline order of
// each component's first pixel.
inline std::vector<Box> connected_components(const BinaryImage& bin, double min_area, double max_area_frac) {
  std::vector<Box> boxes;
  const std::size_t w = bin.width, h = bin.height;
  std::vector<bool> seen(w * h, false);
  std::vector<std::size_t> stack;
  const double max_area = max_area_frac * static_cast<double>(w * h);
  for (std::size_t start = 0; start < w * h; ++start) {
    if (!bin.bits[start] || seen[start]) continue;
    std::size_t l = w, t = h, r = 0, b = 0;
    seen[start] = true;
    stack.push_back(start);
    while (!stack.empty()) {
      std::size_t k = stack.back();
      stack.pop_back();
      std::size_t x = k % w, y = k / w;
      l = std::min(l, x);
      r = std::max(r, x);
      t = std::min(t, y);
      b = std::max(b, y);
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if ((dx < 0 && x == 0) || (dy < 0 && y == 0) || (dx > 0 && x + 1 == w) || (dy > 0 && y + 1 == h)) continue;
          std::size_t n = (y + dy) * w + (x + dx);
          if (bin.bits[n] && !seen[n]) {
            seen[n] = true;
            stack.push_back(n);
          }
        }
    }
    Box box{static_cast<double>(l), static_cast<double>(t), static_cast<double>(r + 1), static_cast<double>(b + 1)};
    if (box.area() >= min_area && box.area() <= max_area) boxes.push_back(box);
  }
  return boxes;
}

struct MergeParams {
  double gap_frac = 0.2;
  double cover_min = 0.45;
  double aspect_lo = 0.7;
  double aspect_hi = 1.4;
};

// Separation between two boxes: the larger of the horizontal and vertical gaps.
inline double box_gap(const Box& a, const Box& b) {
  double dx = std::max(0.0, std::max(a.left, b.left) - std::min(a.right, b.right));
  double dy = std::max(0.0, std::max(a.top, b.top) - std::min(a.bottom, b.bottom));
  return std::max(dx, dy);
}

inline bool close_boxes(const Box& a, const Box& b, double gap_frac) {
  double side = std::max({a.width(), a.height(), b.width(), b.height()});
  return box_gap(a, b) <= gap_frac * side;
}

// Union boxes of mutually close pairs and triples that cover their union well
// and are roughly square. Duplicate unions and unions equal to an input box
// are emitted once / not at all. Inputs are not modified.
inline std::vector<Box> propose_merged_blobs(std::span<const Box> boxes, const MergeParams& mp = {}) {
  const std::size_t n = boxes.size();
  std::vector<std::vector<std::size_t>> close(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (close_boxes(boxes[i], boxes[j], mp.gap_frac)) close[i].push_back(j);

  std::vector<Box> out;
  auto accept = [&](const Box& u, double member_area) {
    double aspect = u.width() / u.height();
    if (member_area / u.area() < mp.cover_min || aspect < mp.aspect_lo || aspect > mp.aspect_hi) return;
    if (std::find(out.begin(), out.end(), u) != out.end()) return;
    if (std::find(boxes.begin(), boxes.end(), u) != boxes.end()) return;
    out.push_back(u);
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : close[i]) accept(union_of(boxes[i], boxes[j]), boxes[i].area() + boxes[j].area());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < close[i].size(); ++a)
      for (std::size_t b = a + 1; b < close[i].size(); ++b) {
        std::size_t j = close[i][a], k = close[i][b];
        if (!std::binary_search(close[j].begin(), close[j].end(), k)) continue;
        accept(union_of(union_of(boxes[i], boxes[j]), boxes[k]),
               boxes[i].area() + boxes[j].area() + boxes[k].area());
      }
  return out;
}

struct ImagingParams {
  std::size_t max_dim = 1024;
  int edge_threshold = 96;
  double min_area = 12.0;
  double max_area_frac = 0.25;
  MergeParams merge;
};

// Full detection chain. Edge rings surround strokes by one pixel, so component
// boxes are inset by one pixel before being mapped back to input coordinates.
inline std::vector<Box> detect_boxes(const GrayImage& img, const ImagingParams& ip = {}) {
  if (img.width < 3 || img.height < 3) return {};
  GrayImage small = downscale(img, ip.max_dim);
  double sx = static_cast<double>(img.width) / static_cast<double>(small.width);
  double sy = static_cast<double>(img.height) / static_cast<double>(small.height);
  if (small.width < 3 || small.height < 3) return {};
  auto comps = connected_components(binarize(sobel_edge_map(small), ip.edge_threshold), ip.min_area, ip.max_area_frac);
  std::vector<Box> boxes;
  for (const Box& c : comps) {
    Box b{c.left + 1, c.top + 1, c.right - 1, c.bottom - 1};
    if (!b.valid()) b = c;
    boxes.push_back({b.left * sx, b.top * sy, b.right * sx, b.bottom * sy});
  }
  auto merged = propose_merged_blobs(boxes, ip.merge);
  boxes.insert(boxes.end(), merged.begin(), merged.end());
  return boxes;
}

}  // namespace textline
