// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
//
// Raw per-device acceleration -> fixed-shape spectrogram patch grid:
// clean -> resample -> normalize -> STFT -> patchify.
#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

namespace evimae {

struct ImuSeries {
  std::string device_id;
  Eigen::MatrixXd values;  // L x 3
  double sample_rate_hz = 0.0;
};

// STFT configuration. The spectrogram shape is implied: frames() time steps
// by bins() frequency bins. Defaults give the 160 x 128 full-scale shape.
struct StftParams {
  int target_samples = 160;
  std::string window = "hann";
  int window_len = 16;
  int hop = 1;
  int fft_len = 254;
  double log_offset = 1e-6;

  int frames() const { return hop > 0 ? target_samples / hop : 0; }
  int bins() const { return fft_len / 2 + 1; }
};

// Log-magnitude spectrogram, one frames() x bins() matrix per axis.
struct Spectrogram {
  std::string device_id;
  std::array<Eigen::MatrixXd, 3> axes;
  StftParams params;
};

// Dataset-level normalization statistics (per axis, pooled over devices).
struct NormStats {
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  std::array<double, 3> std_dev{1.0, 1.0, 1.0};
};

// Flattened 3-channel square patches over (device, time, frequency), patch
// index row-major in that order; within a patch the layout is
// (time-in-patch, freq-in-patch, axis).
struct ImuPatchGrid {
  Eigen::MatrixXd patches;                     // P x (patch*patch*3)
  std::vector<int> device_index;               // per patch
  std::vector<std::array<int, 2>> grid_pos;    // per patch (time_idx, freq_idx)
  int patch = 16;
  int n_devices = 0;
  int time_blocks = 0;
  int freq_blocks = 0;
  int patches_per_device() const { return time_blocks * freq_blocks; }
};

// NaN repair: interior gaps are linearly interpolated, edges extended from
// the nearest finite value. Throws AllNaN if an axis has no finite entry.
ImuSeries clean(const ImuSeries& series);

// Linear interpolation onto target_samples points spanning the original
// sample-index range; the reported rate becomes target / duration.
ImuSeries resample(const ImuSeries& series, int target_samples);

ImuSeries normalize(const ImuSeries& series, const NormStats& stats);

// Pooled per-axis statistics over a fit split (population std, floored at
// 1e-6 on use). Never computed per clip.
NormStats fit_norm_stats(const std::vector<ImuSeries>& series_set);

Spectrogram stft_spectrogram(const ImuSeries& series, const StftParams& params);

ImuPatchGrid patchify_imu(const std::vector<Spectrogram>& specs, int patch = 16);
std::vector<Spectrogram> unpatchify_imu(const ImuPatchGrid& grid, const StftParams& params);

}  // namespace evimae
