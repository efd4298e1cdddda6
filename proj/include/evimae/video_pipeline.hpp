// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
//
// Raw frames -> tubelet token grid.
#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

#include "evimae/dataset_io.hpp"

namespace evimae {

// Frames in [0,1], t-major layout: index(((t*H)+y)*W+x)*3+c.
struct VideoTensor {
  int frames = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;
  std::string clip_id;

  double& at(int t, int y, int x, int c) {
    return data[((static_cast<std::size_t>(t) * height + static_cast<std::size_t>(y)) * width +
                 static_cast<std::size_t>(x)) *
                    3 +
                static_cast<std::size_t>(c)];
  }
  double at(int t, int y, int x, int c) const {
    return data[((static_cast<std::size_t>(t) * height + static_cast<std::size_t>(y)) * width +
                 static_cast<std::size_t>(x)) *
                    3 +
                static_cast<std::size_t>(c)];
  }
};

// Flattened tubelets (tubelet x patch x patch x 3), patch index row-major
// over (t, h, w); within a patch (frame-in-tubelet, row, col, channel).
struct VideoPatchGrid {
  Eigen::MatrixXd patches;                   // P x (tubelet*patch*patch*3)
  std::vector<std::array<int, 3>> grid_pos;  // per patch (t_idx, h_idx, w_idx)
  int tubelet = 2;
  int patch = 16;
  int t_blocks = 0;
  int h_blocks = 0;
  int w_blocks = 0;
};

// t_v indices uniformly spaced over [0, frame_count-1] (round to nearest,
// first and last frame always included); pixel values scaled to [0,1].
VideoTensor sample_frames(const RawClip& clip, int t_v);

// Shorter side scaled to max(h,w) with half-pixel bilinear interpolation,
// then center-cropped to h x w.
VideoTensor resize_center_crop(const VideoTensor& video, int h, int w);

VideoPatchGrid tubelet_patchify(const VideoTensor& video, int tubelet = 2, int patch = 16);
VideoTensor unpatchify_video(const VideoPatchGrid& grid);

// The index formula behind sample_frames, exposed for tests.
std::vector<int> frame_sample_indices(int frame_count, int t_v);

}  // namespace evimae
