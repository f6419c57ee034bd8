// Copyright 2026 The slotmem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "viz.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

namespace slotmem::viz {

Box AttentionBox(const ad::Matrix& attention, int slot, int patch,
                 double threshold) {
  if (slot < 0 || slot >= attention.rows()) {
    throw std::out_of_range("slot out of range");
  }
  const int m = static_cast<int>(attention.cols());
  const int side = static_cast<int>(std::lround(std::sqrt(m)));
  if (side * side != m) throw std::invalid_argument("attention is not square");
  const double peak = attention.row(slot).maxCoeff();
  Box box;
  if (!(peak > 0.0)) return box;
  int gx0 = side, gy0 = side, gx1 = -1, gy1 = -1;
  for (int j = 0; j < m; ++j) {
    if (attention(slot, j) < threshold * peak) continue;
    const int gx = j % side;
    const int gy = j / side;
    gx0 = std::min(gx0, gx);
    gy0 = std::min(gy0, gy);
    gx1 = std::max(gx1, gx);
    gy1 = std::max(gy1, gy);
  }
  box.x0 = gx0 * patch;
  box.y0 = gy0 * patch;
  box.x1 = (gx1 + 1) * patch;
  box.y1 = (gy1 + 1) * patch;
  return box;
}

std::array<std::uint8_t, 3> SlotColor(int slot) {
  static constexpr std::uint8_t kPalette[][3] = {
      {230, 25, 75},   {60, 180, 75},   {255, 225, 25},  {0, 130, 200},
      {245, 130, 48},  {145, 30, 180},  {70, 240, 240},  {240, 50, 230},
      {210, 245, 60},  {250, 190, 212}, {0, 128, 128},   {220, 190, 255},
      {170, 110, 40},  {255, 250, 200}, {128, 0, 0},     {170, 255, 195},
  };
  const auto* c = kPalette[slot % 16];
  return {c[0], c[1], c[2]};
}

Image FrameImage(const grid::Frame& frame) {
  Image out(frame.width, frame.height);
  out.rgb = frame.rgb;
  return out;
}

Image Upscale(const Image& image, int factor) {
  if (factor < 1) throw std::invalid_argument("upscale factor must be >= 1");
  Image out(image.width * factor, image.height * factor);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      std::copy_n(image.at(x / factor, y / factor), 3, out.at(x, y));
    }
  }
  return out;
}

void DrawBox(Image& image, const Box& box, int scale,
             std::array<std::uint8_t, 3> color) {
  if (box.empty()) return;
  const int x0 = box.x0 * scale, x1 = box.x1 * scale - 1;
  const int y0 = box.y0 * scale, y1 = box.y1 * scale - 1;
  auto put = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= image.width || y >= image.height) return;
    std::copy(color.begin(), color.end(), image.at(x, y));
  };
  for (int x = x0; x <= x1; ++x) {
    put(x, y0);
    put(x, y1);
  }
  for (int y = y0; y <= y1; ++y) {
    put(x0, y);
    put(x1, y);
  }
}

Image SlotPanel(const grid::Frame& frame, const ad::Matrix& attention, int slot,
                int patch, int scale, double threshold) {
  const int m = static_cast<int>(attention.cols());
  const int side = static_cast<int>(std::lround(std::sqrt(m)));
  if (side * patch != frame.width || side * patch != frame.height) {
    throw std::invalid_argument("attention grid does not match the frame");
  }
  const double peak = attention.row(slot).maxCoeff();
  const auto color = SlotColor(slot);
  Image base(frame.width, frame.height);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      const int j = (y / patch) * side + x / patch;
      const double a = peak > 0.0 ? attention(slot, j) / peak : 0.0;
      const std::uint8_t* src = &frame.rgb[3 * (y * frame.width + x)];
      std::uint8_t* dst = base.at(x, y);
      for (int c = 0; c < 3; ++c) {
        const double v = 0.35 * src[c] * (1.0 - 0.6 * a) + 0.6 * a * color[c];
        dst[c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  Image out = Upscale(base, scale);
  DrawBox(out, AttentionBox(attention, slot, patch, threshold), scale,
          {255, 255, 255});
  return out;
}

Image Tile(const std::vector<Image>& tiles, int columns, int gap) {
  if (tiles.empty()) return Image();
  const int w = tiles[0].width, h = tiles[0].height;
  for (const Image& t : tiles) {
    if (t.width != w || t.height != h) {
      throw std::invalid_argument("tiles differ in size");
    }
  }
  columns = std::max(1, std::min(columns, static_cast<int>(tiles.size())));
  const int rows = (static_cast<int>(tiles.size()) + columns - 1) / columns;
  Image out(columns * w + (columns - 1) * gap, rows * h + (rows - 1) * gap);
  for (size_t i = 0; i < tiles.size(); ++i) {
    const int ox = static_cast<int>(i % columns) * (w + gap);
    const int oy = static_cast<int>(i / columns) * (h + gap);
    for (int y = 0; y < h; ++y) {
      std::copy_n(tiles[i].at(0, y), 3 * w, out.at(ox, oy + y));
    }
  }
  return out;
}

void WritePng(const std::string& path, const Image& image) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"),
                                             &std::fclose);
  if (!file) throw std::runtime_error("cannot open " + path);
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng error writing " + path);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(image.at(0, y)));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace slotmem::viz
