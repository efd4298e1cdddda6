// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
#include "evimae/imu_pipeline.hpp"

#include <cmath>

#include "evimae/errors.hpp"

namespace evimae {

ImuSeries clean(const ImuSeries& series) {
  const long n = series.values.rows();
  if (n < 2) throw InvalidParam("clean: series needs at least 2 samples");
  ImuSeries out = series;
  for (int a = 0; a < 3; ++a) {
    std::vector<long> finite;
    for (long i = 0; i < n; ++i)
      if (std::isfinite(series.values(i, a))) finite.push_back(i);
    if (finite.empty())
      throw AllNaN("clean: axis " + std::to_string(a) + " of device '" + series.device_id +
                   "' has no finite value");
    // Leading / trailing gaps take the nearest finite value.
    for (long i = 0; i < finite.front(); ++i) out.values(i, a) = series.values(finite.front(), a);
    for (long i = finite.back() + 1; i < n; ++i)
      out.values(i, a) = series.values(finite.back(), a);
    // Interior gaps interpolate linearly between their finite neighbors.
    for (std::size_t f = 0; f + 1 < finite.size(); ++f) {
      const long i0 = finite[f], i1 = finite[f + 1];
      const double v0 = series.values(i0, a), v1 = series.values(i1, a);
      for (long i = i0 + 1; i < i1; ++i) {
        const double t = static_cast<double>(i - i0) / static_cast<double>(i1 - i0);
        out.values(i, a) = v0 + t * (v1 - v0);
      }
    }
  }
  return out;
}

ImuSeries resample(const ImuSeries& series, int target_samples) {
  if (target_samples < 2) throw InvalidParam("resample: target_samples must be >= 2");
  const long n = series.values.rows();
  if (n < 2) throw InvalidParam("resample: series needs at least 2 samples");
  ImuSeries out;
  out.device_id = series.device_id;
  out.values.resize(target_samples, 3);
  const double duration = static_cast<double>(n) / series.sample_rate_hz;
  out.sample_rate_hz = static_cast<double>(target_samples) / duration;
  const double scale = static_cast<double>(n - 1) / static_cast<double>(target_samples - 1);
  for (int j = 0; j < target_samples; ++j) {
    const double u = j * scale;
    const long i0 = std::min(static_cast<long>(u), n - 2);
    const double frac = u - static_cast<double>(i0);
    for (int a = 0; a < 3; ++a)
      out.values(j, a) = series.values(i0, a) * (1.0 - frac) + series.values(i0 + 1, a) * frac;
  }
  return out;
}

ImuSeries normalize(const ImuSeries& series, const NormStats& stats) {
  ImuSeries out = series;
  for (int a = 0; a < 3; ++a) {
    const double sd = std::max(stats.std_dev[static_cast<std::size_t>(a)], 1e-6);
    out.values.col(a) =
        (series.values.col(a).array() - stats.mean[static_cast<std::size_t>(a)]) / sd;
  }
  return out;
}

NormStats fit_norm_stats(const std::vector<ImuSeries>& series_set) {
  if (series_set.empty()) throw InvalidParam("fit_norm_stats: empty fit set");
  NormStats stats;
  for (int a = 0; a < 3; ++a) {
    double sum = 0.0, count = 0.0;
    for (const auto& s : series_set) {
      sum += s.values.col(a).sum();
      count += static_cast<double>(s.values.rows());
    }
    const double mean = sum / count;
    double sq = 0.0;
    for (const auto& s : series_set) sq += (s.values.col(a).array() - mean).square().sum();
    stats.mean[static_cast<std::size_t>(a)] = mean;
    stats.std_dev[static_cast<std::size_t>(a)] = std::sqrt(sq / count);
  }
  return stats;
}

namespace {

// Reflect (mirror, edge not repeated) indexing into [0, n).
long reflect_index(long i, long n) {
  if (n == 1) return 0;
  const long period = 2 * (n - 1);
  long m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - m;
}

}  // namespace

Spectrogram stft_spectrogram(const ImuSeries& series, const StftParams& params) {
  if (params.window != "hann") throw InvalidParam("stft: only the hann window is supported");
  if (params.window_len < 2 || params.hop < 1 || params.fft_len < params.window_len)
    throw ShapeError("stft: invalid window/hop/fft_len combination");
  if (params.log_offset <= 0.0) throw InvalidParam("stft: log_offset must be positive");
  if (params.target_samples % params.hop != 0)
    throw ShapeError("stft: hop must divide target_samples");
  if (series.values.rows() != params.target_samples)
    throw ShapeError("stft: series length " + std::to_string(series.values.rows()) +
                     " != target_samples " + std::to_string(params.target_samples));

  const int n_frames = params.frames();
  const int n_bins = params.bins();
  const int w = params.window_len;

  // Periodic Hann window.
  Eigen::VectorXd window(w);
  for (int i = 0; i < w; ++i) window(i) = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / w);

  // DFT basis restricted to the window support; zero padding to fft_len
  // contributes nothing beyond the first w samples.
  Eigen::MatrixXd basis_re(w, n_bins), basis_im(w, n_bins);
  for (int i = 0; i < w; ++i) {
    for (int k = 0; k < n_bins; ++k) {
      const double ang = -2.0 * M_PI * static_cast<double>(k) * i / params.fft_len;
      basis_re(i, k) = std::cos(ang);
      basis_im(i, k) = std::sin(ang);
    }
  }

  // Padding chosen so the frame count equals target_samples / hop.
  const int pad_total = w - params.hop;
  const int pad_left = (pad_total + 1) / 2;
  const long n = series.values.rows();

  Spectrogram spec;
  spec.device_id = series.device_id;
  spec.params = params;
  for (int a = 0; a < 3; ++a) {
    Eigen::MatrixXd framed(n_frames, w);
    for (int f = 0; f < n_frames; ++f) {
      for (int i = 0; i < w; ++i) {
        const long src = reflect_index(static_cast<long>(f) * params.hop + i - pad_left, n);
        framed(f, i) = series.values(src, a) * window(i);
      }
    }
    Eigen::MatrixXd re = framed * basis_re;
    Eigen::MatrixXd im = framed * basis_im;
    spec.axes[static_cast<std::size_t>(a)] =
        ((re.array().square() + im.array().square()).sqrt() + params.log_offset).log().matrix();
  }
  return spec;
}

ImuPatchGrid patchify_imu(const std::vector<Spectrogram>& specs, int patch) {
  if (specs.empty()) throw ShapeError("patchify_imu: no spectrograms");
  const long t = specs[0].axes[0].rows();
  const long m = specs[0].axes[0].cols();
  for (const auto& s : specs)
    for (const auto& ax : s.axes)
      if (ax.rows() != t || ax.cols() != m)
        throw ShapeError("patchify_imu: spectrogram shapes disagree");
  if (patch < 1 || t % patch != 0 || m % patch != 0)
    throw ShapeError("patchify_imu: patch size must divide both spectrogram dimensions");

  ImuPatchGrid grid;
  grid.patch = patch;
  grid.n_devices = static_cast<int>(specs.size());
  grid.time_blocks = static_cast<int>(t) / patch;
  grid.freq_blocks = static_cast<int>(m) / patch;
  const long total = static_cast<long>(grid.n_devices) * grid.time_blocks * grid.freq_blocks;
  grid.patches.resize(total, static_cast<long>(patch) * patch * 3);
  grid.device_index.resize(static_cast<std::size_t>(total));
  grid.grid_pos.resize(static_cast<std::size_t>(total));

  long p = 0;
  for (int d = 0; d < grid.n_devices; ++d) {
    for (int tb = 0; tb < grid.time_blocks; ++tb) {
      for (int fb = 0; fb < grid.freq_blocks; ++fb, ++p) {
        grid.device_index[static_cast<std::size_t>(p)] = d;
        grid.grid_pos[static_cast<std::size_t>(p)] = {tb, fb};
        for (int tt = 0; tt < patch; ++tt)
          for (int ff = 0; ff < patch; ++ff)
            for (int a = 0; a < 3; ++a)
              grid.patches(p, (static_cast<long>(tt) * patch + ff) * 3 + a) =
                  specs[static_cast<std::size_t>(d)].axes[static_cast<std::size_t>(a)](
                      tb * patch + tt, fb * patch + ff);
      }
    }
  }
  return grid;
}

std::vector<Spectrogram> unpatchify_imu(const ImuPatchGrid& grid, const StftParams& params) {
  const int patch = grid.patch;
  const long t = static_cast<long>(grid.time_blocks) * patch;
  const long m = static_cast<long>(grid.freq_blocks) * patch;
  std::vector<Spectrogram> specs(static_cast<std::size_t>(grid.n_devices));
  for (auto& s : specs) {
    s.params = params;
    for (auto& ax : s.axes) ax = Eigen::MatrixXd::Zero(t, m);
  }
  const long total = grid.patches.rows();
  if (total != static_cast<long>(grid.n_devices) * grid.time_blocks * grid.freq_blocks)
    throw ShapeError("unpatchify_imu: inconsistent grid");
  for (long p = 0; p < total; ++p) {
    const int d = grid.device_index[static_cast<std::size_t>(p)];
    const auto [tb, fb] = grid.grid_pos[static_cast<std::size_t>(p)];
    for (int tt = 0; tt < patch; ++tt)
      for (int ff = 0; ff < patch; ++ff)
        for (int a = 0; a < 3; ++a)
          specs[static_cast<std::size_t>(d)].axes[static_cast<std::size_t>(a)](
              tb * patch + tt, fb * patch + ff) =
              grid.patches(p, (static_cast<long>(tt) * patch + ff) * 3 + a);
  }
  return specs;
}

}  // namespace evimae
