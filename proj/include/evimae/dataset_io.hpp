// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
//
// Canonical on-disk clip format plus the synthetic data generator and the
// low-light degradation model.
//
// A dataset root holds one directory per clip and a splits.json mapping
// split name -> clip id list. Each clip directory contains:
//   manifest.json                 (fields of ClipManifest, snake_case)
//   frames/frame_000000.png ...   (8-bit RGB, lossless)
//   imu_<device_id>.csv           (header "timestamp_s,ax,ay,az")
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evimae/png_io.hpp"

namespace evimae {

struct DeviceSpec {
  std::string device_id;
  double sample_rate_hz = 0.0;
  std::vector<std::string> axes = {"x", "y", "z"};
};

struct ClipManifest {
  std::string clip_id;
  double duration_s = 0.0;
  double video_fps = 0.0;
  int frame_count = 0;
  int frame_h = 0;
  int frame_w = 0;
  std::vector<DeviceSpec> devices;
  std::optional<std::string> label;
  std::string split = "pretrain";
};

// One synchronized sample. IMU arrays are L x 3 (x,y,z acceleration in
// m/s^2) and may contain NaN; cleaning happens downstream.
struct RawClip {
  ClipManifest manifest;
  std::vector<Image8> frames;
  std::map<std::string, Eigen::MatrixXd> imu;
};

struct ValidationReport {
  std::vector<std::string> issues;
  bool ok() const { return issues.empty(); }
};

// Loads a clip directory. Throws MissingFile / ManifestMismatch / ParseError.
RawClip load_clip(const std::filesystem::path& dir);

// Writes a clip in the canonical format (CSV values at 9 significant digits,
// uniform timestamps k / sample_rate).
void write_clip(const RawClip& clip, const std::filesystem::path& dir);

// Reports every violated invariant; never throws on bad data.
ValidationReport validate_manifest(const ClipManifest& manifest,
                                   const std::filesystem::path& clip_dir);

std::map<std::string, std::vector<std::string>> read_splits(const std::filesystem::path& root);
void write_splits(const std::filesystem::path& root,
                  const std::map<std::string, std::vector<std::string>>& splits);

// The four-limb layout used across the project.
std::vector<DeviceSpec> default_devices(double sample_rate_hz = 50.0);

// Synthetic correlated video+IMU data. Every class is a distinct
// (oscillation frequency, motion direction) pair: the video shows a bright
// blob oscillating along the class direction, and devices at even positions
// in `devices` carry a sinusoid at the class frequency whose phase matches
// the blob up to `correlation_strength` (1 = phase-locked, 0 = independent).
// Devices at odd positions carry a class-independent 2 Hz tone, so removing
// the even devices destroys the IMU class signal while the video keeps it.
struct SyntheticSpec {
  int num_classes = 4;
  int clips_per_class = 10;
  double duration_s = 2.0;
  double video_fps = 30.0;
  int frame_h = 64;
  int frame_w = 64;
  std::vector<DeviceSpec> devices = default_devices();
  double correlation_strength = 1.0;
  double noise_level = 0.0;  // IMU noise sd in m/s^2; video pixel noise sd = 12 * level (8-bit)
  std::uint64_t seed = 0;
};

struct ClassSignature {
  double freq_hz = 0.0;
  double angle_rad = 0.0;
};

// The (frequency, direction) pair encoding class `c`; exposed so test
// oracles can check generated clips independently.
ClassSignature synthetic_class_signature(int class_idx, int num_classes);
std::string synthetic_class_name(int class_idx);

// Frequency of the tone carried by non-designated (odd-position) devices.
inline constexpr double kDistractorFreqHz = 2.0;

// Writes clips plus splits.json; every clip appears in "pretrain", and each
// class is partitioned into train/val/test. Deterministic per seed.
void generate_synthetic_dataset(const SyntheticSpec& spec, const std::filesystem::path& out_root);

// Physically-motivated low-light synthesis: inverse gamma (2.2) -> scale by
// light_level -> Gaussian shot noise (variance shot_strength * linear value)
// and read noise (sd read_sigma) -> clamp -> gamma -> 8-bit quantization.
// light_level must lie in (0, 1]. Deterministic per seed.
std::vector<Image8> degrade_low_light(const std::vector<Image8>& frames, double light_level,
                                      double shot_strength, double read_sigma,
                                      std::uint64_t seed);

// PSNR in dB over 8-bit frames; +inf for identical input.
double psnr(const std::vector<Image8>& a, const std::vector<Image8>& b);

}  // namespace evimae
