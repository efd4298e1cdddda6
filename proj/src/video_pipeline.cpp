// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
#include "evimae/video_pipeline.hpp"

#include <cmath>

#include "evimae/errors.hpp"

namespace evimae {

std::vector<int> frame_sample_indices(int frame_count, int t_v) {
  if (t_v < 1) throw InvalidParam("sample_frames: t_v must be >= 1");
  if (frame_count < t_v)
    throw TooFewFrames("sample_frames: clip has " + std::to_string(frame_count) +
                       " frames, need " + std::to_string(t_v));
  std::vector<int> idx(static_cast<std::size_t>(t_v));
  if (t_v == 1) {
    idx[0] = 0;
    return idx;
  }
  for (int k = 0; k < t_v; ++k) {
    idx[static_cast<std::size_t>(k)] = static_cast<int>(
        std::lround(static_cast<double>(k) * (frame_count - 1) / (t_v - 1)));
  }
  return idx;
}

VideoTensor sample_frames(const RawClip& clip, int t_v) {
  const auto idx = frame_sample_indices(static_cast<int>(clip.frames.size()), t_v);
  VideoTensor out;
  out.clip_id = clip.manifest.clip_id;
  out.frames = t_v;
  out.height = clip.manifest.frame_h;
  out.width = clip.manifest.frame_w;
  out.data.resize(static_cast<std::size_t>(t_v) * out.height * out.width * 3);
  for (int k = 0; k < t_v; ++k) {
    const Image8& img = clip.frames[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
    if (img.height != out.height || img.width != out.width)
      throw ShapeError("sample_frames: frame size varies within the clip");
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x)
        for (int c = 0; c < 3; ++c) out.at(k, y, x, c) = img.at(y, x, c) / 255.0;
  }
  return out;
}

namespace {

// Half-pixel-center bilinear sampling; exact identity at unit scale.
double bilinear(const VideoTensor& v, int t, double sy, double sx, int c) {
  const double y = std::clamp(sy, 0.0, static_cast<double>(v.height - 1));
  const double x = std::clamp(sx, 0.0, static_cast<double>(v.width - 1));
  const int y0 = static_cast<int>(y);
  const int x0 = static_cast<int>(x);
  const int y1 = std::min(y0 + 1, v.height - 1);
  const int x1 = std::min(x0 + 1, v.width - 1);
  const double fy = y - y0, fx = x - x0;
  return v.at(t, y0, x0, c) * (1 - fy) * (1 - fx) + v.at(t, y0, x1, c) * (1 - fy) * fx +
         v.at(t, y1, x0, c) * fy * (1 - fx) + v.at(t, y1, x1, c) * fy * fx;
}

}  // namespace

VideoTensor resize_center_crop(const VideoTensor& video, int h, int w) {
  if (h < 1 || w < 1) throw InvalidParam("resize_center_crop: target must be positive");
  const double scale =
      static_cast<double>(std::max(h, w)) / static_cast<double>(std::min(video.height, video.width));
  const int out_h = static_cast<int>(std::lround(video.height * scale));
  const int out_w = static_cast<int>(std::lround(video.width * scale));

  VideoTensor resized;
  resized.clip_id = video.clip_id;
  resized.frames = video.frames;
  resized.height = out_h;
  resized.width = out_w;
  resized.data.resize(static_cast<std::size_t>(video.frames) * out_h * out_w * 3);
  for (int t = 0; t < video.frames; ++t) {
    for (int y = 0; y < out_h; ++y) {
      const double sy = (y + 0.5) / scale - 0.5;
      for (int x = 0; x < out_w; ++x) {
        const double sx = (x + 0.5) / scale - 0.5;
        for (int c = 0; c < 3; ++c) resized.at(t, y, x, c) = bilinear(video, t, sy, sx, c);
      }
    }
  }

  const int y0 = (out_h - h) / 2;
  const int x0 = (out_w - w) / 2;
  if (y0 < 0 || x0 < 0) throw ShapeError("resize_center_crop: crop larger than resized frame");
  VideoTensor out;
  out.clip_id = video.clip_id;
  out.frames = video.frames;
  out.height = h;
  out.width = w;
  out.data.resize(static_cast<std::size_t>(video.frames) * h * w * 3);
  for (int t = 0; t < video.frames; ++t)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < 3; ++c) out.at(t, y, x, c) = resized.at(t, y0 + y, x0 + x, c);
  return out;
}

VideoPatchGrid tubelet_patchify(const VideoTensor& video, int tubelet, int patch) {
  if (tubelet < 1 || patch < 1) throw InvalidParam("tubelet_patchify: sizes must be positive");
  if (video.frames % tubelet != 0 || video.height % patch != 0 || video.width % patch != 0)
    throw ShapeError("tubelet_patchify: tubelet/patch must divide the tensor dimensions");

  VideoPatchGrid grid;
  grid.tubelet = tubelet;
  grid.patch = patch;
  grid.t_blocks = video.frames / tubelet;
  grid.h_blocks = video.height / patch;
  grid.w_blocks = video.width / patch;
  const long total = static_cast<long>(grid.t_blocks) * grid.h_blocks * grid.w_blocks;
  grid.patches.resize(total, static_cast<long>(tubelet) * patch * patch * 3);
  grid.grid_pos.resize(static_cast<std::size_t>(total));

  long p = 0;
  for (int tb = 0; tb < grid.t_blocks; ++tb) {
    for (int hb = 0; hb < grid.h_blocks; ++hb) {
      for (int wb = 0; wb < grid.w_blocks; ++wb, ++p) {
        grid.grid_pos[static_cast<std::size_t>(p)] = {tb, hb, wb};
        long col = 0;
        for (int dt = 0; dt < tubelet; ++dt)
          for (int yy = 0; yy < patch; ++yy)
            for (int xx = 0; xx < patch; ++xx)
              for (int c = 0; c < 3; ++c, ++col)
                grid.patches(p, col) =
                    video.at(tb * tubelet + dt, hb * patch + yy, wb * patch + xx, c);
      }
    }
  }
  return grid;
}

VideoTensor unpatchify_video(const VideoPatchGrid& grid) {
  VideoTensor out;
  out.frames = grid.t_blocks * grid.tubelet;
  out.height = grid.h_blocks * grid.patch;
  out.width = grid.w_blocks * grid.patch;
  out.data.assign(static_cast<std::size_t>(out.frames) * out.height * out.width * 3, 0.0);
  const long total = grid.patches.rows();
  if (total != static_cast<long>(grid.t_blocks) * grid.h_blocks * grid.w_blocks)
    throw ShapeError("unpatchify_video: inconsistent grid");
  for (long p = 0; p < total; ++p) {
    const auto [tb, hb, wb] = grid.grid_pos[static_cast<std::size_t>(p)];
    long col = 0;
    for (int dt = 0; dt < grid.tubelet; ++dt)
      for (int yy = 0; yy < grid.patch; ++yy)
        for (int xx = 0; xx < grid.patch; ++xx)
          for (int c = 0; c < 3; ++c, ++col)
            out.at(tb * grid.tubelet + dt, hb * grid.patch + yy, wb * grid.patch + xx, c) =
                grid.patches(p, col);
  }
  return out;
}

}  // namespace evimae
