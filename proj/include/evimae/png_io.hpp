// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace evimae {

// 8-bit RGB image, row-major, 3 channels interleaved.
struct Image8 {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> rgb;

  Image8() = default;
  Image8(int h, int w) : height(h), width(w), rgb(static_cast<std::size_t>(h) * w * 3, 0) {}

  std::uint8_t& at(int y, int x, int c) {
    return rgb[(static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)) * 3 +
               static_cast<std::size_t>(c)];
  }
  std::uint8_t at(int y, int x, int c) const {
    return rgb[(static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)) * 3 +
               static_cast<std::size_t>(c)];
  }
};

// Lossless round-trip; output bytes are deterministic (fixed compression
// settings, no ancillary chunks).
Image8 read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image8& img);

}  // namespace evimae
