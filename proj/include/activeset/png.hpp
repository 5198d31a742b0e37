// Minimal RGB PNG writer (zlib deflate) and the heatmap rasterizer.
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <zlib.h>

#include "activeset/report.hpp"

namespace activeset {

namespace png_detail {

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

inline void put_chunk(std::vector<unsigned char>& out, const char type[4],
                      const std::vector<unsigned char>& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  std::vector<unsigned char> body(type, type + 4);
  body.insert(body.end(), data.begin(), data.end());
  out.insert(out.end(), body.begin(), body.end());
  put_u32(out, static_cast<std::uint32_t>(crc32(0, body.data(), static_cast<uInt>(body.size()))));
}

}  // namespace png_detail

/// Writes a width x height RGB8 image (row-major, 3 bytes per pixel).
inline void write_png_rgb(const std::string& path, int width, int height,
                          const std::vector<unsigned char>& rgb) {
  using namespace png_detail;
  if (static_cast<std::size_t>(width) * height * 3 != rgb.size())
    throw std::invalid_argument("write_png_rgb: pixel buffer size mismatch");

  std::vector<unsigned char> raw;
  raw.reserve(static_cast<std::size_t>(height) * (1 + 3 * width));
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);  // filter: none
    raw.insert(raw.end(), rgb.begin() + static_cast<std::size_t>(y) * width * 3,
               rgb.begin() + static_cast<std::size_t>(y + 1) * width * 3);
  }
  uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> comp(comp_len);
  if (compress2(comp.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK)
    throw std::runtime_error("write_png_rgb: deflate failed");
  comp.resize(comp_len);

  std::vector<unsigned char> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<unsigned char> ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(width));
  put_u32(ihdr, static_cast<std::uint32_t>(height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // color type: RGB
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", comp);
  put_chunk(out, "IEND", {});

  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open for writing: " + path);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw io_error("write failed: " + path);
}

/// Rasterizes a heatmap CSV: one image per (method, eps), grayscale 0 -> 1
/// with a red marker at (marker_x1, marker_x2).  Output files are
/// <png_path minus .png>_<method>_eps<index>.png.
inline std::vector<std::string> render_heatmap(const std::string& csv_path,
                                               const std::string& png_path,
                                               double marker_x1, double marker_x2) {
  ParsedHeatmap hm = parse_heatmap_csv(csv_path);
  if (hm.x1.empty()) throw csv_parse_error(csv_path + ": no data rows");

  std::string stem = png_path;
  if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".png") stem.resize(stem.size() - 4);

  // group rows per (method, eps)
  std::map<std::pair<std::string, double>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < hm.x1.size(); ++i)
    groups[{hm.method[i], hm.eps[i]}].push_back(i);

  std::vector<std::string> written;
  std::map<std::string, int> eps_index;
  for (const auto& [key, idx] : groups) {
    std::vector<double> xs, ys;
    for (std::size_t i : idx) {
      if (std::find(xs.begin(), xs.end(), hm.x1[i]) == xs.end()) xs.push_back(hm.x1[i]);
      if (std::find(ys.begin(), ys.end(), hm.x2[i]) == ys.end()) ys.push_back(hm.x2[i]);
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    const int w = static_cast<int>(xs.size());
    const int h = static_cast<int>(ys.size());
    std::vector<unsigned char> rgb(static_cast<std::size_t>(w) * h * 3, 0);
    auto col_of = [&](double v, const std::vector<double>& axis) {
      return static_cast<int>(std::lower_bound(axis.begin(), axis.end(), v) - axis.begin());
    };
    for (std::size_t i : idx) {
      const int cx = col_of(hm.x1[i], xs);
      const int cy = col_of(hm.x2[i], ys);
      const int py = h - 1 - cy;  // x2 increases upward
      const auto g = static_cast<unsigned char>(hm.fraction[i] * 255.0 + 0.5);
      const std::size_t off = (static_cast<std::size_t>(py) * w + cx) * 3;
      rgb[off] = rgb[off + 1] = rgb[off + 2] = g;
    }
    // marker
    const int mx = col_of(marker_x1, xs);
    const int my = h - 1 - col_of(marker_x2, ys);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int px = mx + dx, py = my + dy;
        if (px < 0 || px >= w || py < 0 || py >= h) continue;
        const std::size_t off = (static_cast<std::size_t>(py) * w + px) * 3;
        rgb[off] = 255;
        rgb[off + 1] = 0;
        rgb[off + 2] = 0;
      }
    const int k = eps_index[key.first]++;
    std::string file = stem + "_" + key.first + "_eps" + std::to_string(k) + ".png";
    write_png_rgb(file, w, h, rgb);
    written.push_back(file);
  }
  return written;
}

}  // namespace activeset
