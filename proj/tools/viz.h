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

// Slot attention overlays for frames: per-slot heat panels, attention
// bounding boxes and a minimal PNG writer.

#ifndef SLOTMEM_TOOLS_VIZ_H_
#define SLOTMEM_TOOLS_VIZ_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "slotmem/ad/tape.h"
#include "slotmem/grid/memgrid.h"

namespace slotmem::viz {

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // height * width * 3

  Image() = default;
  Image(int w, int h) : width(w), height(h), rgb(3 * w * h, 0) {}
  std::uint8_t* at(int x, int y) { return &rgb[3 * (y * width + x)]; }
  const std::uint8_t* at(int x, int y) const { return &rgb[3 * (y * width + x)]; }
};

// Pixel box, [x0, x1) x [y0, y1). Empty when the slot attends nowhere.
struct Box {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
  bool empty() const { return x1 <= x0 || y1 <= y0; }
};

// Tight box around the patches of `slot` whose attention is at least
// threshold * max over that slot's row. Patches are laid out row-major on a
// side x side grid of patch x patch pixels.
Box AttentionBox(const ad::Matrix& attention, int slot, int patch,
                 double threshold = 0.5);

std::array<std::uint8_t, 3> SlotColor(int slot);

Image FrameImage(const grid::Frame& frame);
Image Upscale(const Image& image, int factor);
// Dimmed frame tinted by the slot's max-normalised attention, with its box.
Image SlotPanel(const grid::Frame& frame, const ad::Matrix& attention, int slot,
                int patch, int scale, double threshold = 0.5);
void DrawBox(Image& image, const Box& box, int scale,
             std::array<std::uint8_t, 3> color);
// Row-major grid of equally sized tiles separated by `gap` black pixels.
Image Tile(const std::vector<Image>& tiles, int columns, int gap);

void WritePng(const std::string& path, const Image& image);

}  // namespace slotmem::viz

#endif  // SLOTMEM_TOOLS_VIZ_H_
