// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
#include "evimae/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "evimae/errors.hpp"
#include "evimae/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace evimae {

namespace {

constexpr double kGamma = 2.2;

std::string frame_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06d.png", index);
  return buf;
}

std::string fmt9(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

json manifest_to_json(const ClipManifest& m) {
  json j;
  j["clip_id"] = m.clip_id;
  j["duration_s"] = m.duration_s;
  j["video_fps"] = m.video_fps;
  j["frame_count"] = m.frame_count;
  j["frame_size"] = {m.frame_h, m.frame_w};
  j["devices"] = json::array();
  for (const auto& d : m.devices) {
    j["devices"].push_back(
        {{"device_id", d.device_id}, {"sample_rate_hz", d.sample_rate_hz}, {"axes", d.axes}});
  }
  if (m.label) j["label"] = *m.label;
  j["split"] = m.split;
  return j;
}

ClipManifest manifest_from_json(const json& j, const std::string& where) {
  try {
    ClipManifest m;
    m.clip_id = j.at("clip_id").get<std::string>();
    m.duration_s = j.at("duration_s").get<double>();
    m.video_fps = j.at("video_fps").get<double>();
    m.frame_count = j.at("frame_count").get<int>();
    m.frame_h = j.at("frame_size").at(0).get<int>();
    m.frame_w = j.at("frame_size").at(1).get<int>();
    for (const auto& dj : j.at("devices")) {
      DeviceSpec d;
      d.device_id = dj.at("device_id").get<std::string>();
      d.sample_rate_hz = dj.at("sample_rate_hz").get<double>();
      d.axes = dj.at("axes").get<std::vector<std::string>>();
      m.devices.push_back(std::move(d));
    }
    if (j.contains("label") && !j.at("label").is_null())
      m.label = j.at("label").get<std::string>();
    m.split = j.at("split").get<std::string>();
    return m;
  } catch (const json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
}

Eigen::MatrixXd read_imu_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("missing IMU file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "timestamp_s,ax,ay,az")
    throw ParseError(path.string() + ": bad header '" + line + "'");

  std::vector<std::array<double, 4>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<double, 4> row{};
    const char* p = line.c_str();
    for (int f = 0; f < 4; ++f) {
      char* end = nullptr;
      row[static_cast<std::size_t>(f)] = std::strtod(p, &end);
      if (end == p)
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": malformed field " +
                         std::to_string(f));
      p = end;
      if (f < 3) {
        if (*p != ',')
          throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected comma");
        ++p;
      }
    }
    if (*p != '\0')
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": trailing characters");
    if (std::isnan(row[0]))
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": NaN timestamp");
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a[0] < b[0]; });
  Eigen::MatrixXd out(static_cast<long>(rows.size()), 3);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int c = 0; c < 3; ++c) out(static_cast<long>(r), c) = rows[r][static_cast<std::size_t>(c) + 1];
  return out;
}

int count_frame_files(const fs::path& frames_dir) {
  if (!fs::is_directory(frames_dir)) return -1;
  int n = 0;
  for (const auto& e : fs::directory_iterator(frames_dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind("frame_", 0) == 0 && e.path().extension() == ".png") ++n;
  }
  return n;
}

}  // namespace

RawClip load_clip(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw MissingFile("missing manifest: " + manifest_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(manifest_path.string() + ": " + e.what());
  }

  RawClip clip;
  clip.manifest = manifest_from_json(j, manifest_path.string());
  const ClipManifest& m = clip.manifest;

  const int on_disk = count_frame_files(dir / "frames");
  if (on_disk < 0) throw MissingFile("missing frames directory: " + (dir / "frames").string());
  if (on_disk != m.frame_count)
    throw ManifestMismatch(dir.string() + ": manifest declares " + std::to_string(m.frame_count) +
                           " frames but " + std::to_string(on_disk) + " files exist");

  clip.frames.reserve(static_cast<std::size_t>(m.frame_count));
  for (int f = 0; f < m.frame_count; ++f) {
    const fs::path p = dir / "frames" / frame_name(f);
    if (!fs::exists(p)) throw MissingFile("missing frame: " + p.string());
    Image8 img = read_png(p);
    if (img.height != m.frame_h || img.width != m.frame_w)
      throw ManifestMismatch(p.string() + ": frame size " + std::to_string(img.height) + "x" +
                             std::to_string(img.width) + " does not match manifest");
    clip.frames.push_back(std::move(img));
  }

  for (const auto& dev : m.devices) {
    const fs::path p = dir / ("imu_" + dev.device_id + ".csv");
    if (!fs::exists(p)) throw MissingFile("missing IMU file for device '" + dev.device_id +
                                          "': " + p.string());
    Eigen::MatrixXd series = read_imu_csv(p);
    const double expected = m.duration_s * dev.sample_rate_hz;
    if (std::abs(static_cast<double>(series.rows()) - expected) > 1.0)
      throw ManifestMismatch(p.string() + ": " + std::to_string(series.rows()) +
                             " rows but expected ~" + std::to_string(expected));
    clip.imu.emplace(dev.device_id, std::move(series));
  }
  return clip;
}

void write_clip(const RawClip& clip, const fs::path& dir) {
  const ClipManifest& m = clip.manifest;
  if (static_cast<int>(clip.frames.size()) != m.frame_count)
    throw ManifestMismatch("write_clip: frame buffer count disagrees with manifest");
  std::error_code ec;
  fs::create_directories(dir / "frames", ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  {
    std::ofstream out(dir / "manifest.json");
    if (!out) throw IoError("cannot write manifest in " + dir.string());
    out << manifest_to_json(m).dump(2) << "\n";
  }
  for (int f = 0; f < m.frame_count; ++f)
    write_png(dir / "frames" / frame_name(f), clip.frames[static_cast<std::size_t>(f)]);

  for (const auto& dev : m.devices) {
    auto it = clip.imu.find(dev.device_id);
    if (it == clip.imu.end())
      throw ManifestMismatch("write_clip: no IMU data for device '" + dev.device_id + "'");
    std::ofstream out(dir / ("imu_" + dev.device_id + ".csv"));
    if (!out) throw IoError("cannot write IMU CSV in " + dir.string());
    out << "timestamp_s,ax,ay,az\n";
    const auto& series = it->second;
    for (long r = 0; r < series.rows(); ++r) {
      out << fmt9(static_cast<double>(r) / dev.sample_rate_hz) << ',' << fmt9(series(r, 0)) << ','
          << fmt9(series(r, 1)) << ',' << fmt9(series(r, 2)) << '\n';
    }
  }
}

ValidationReport validate_manifest(const ClipManifest& m, const fs::path& clip_dir) {
  ValidationReport rep;
  auto issue = [&](const std::string& s) { rep.issues.push_back(s); };

  std::vector<std::string> ids;
  for (const auto& d : m.devices) ids.push_back(d.device_id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    issue("duplicate device_id in manifest");
  for (const auto& d : m.devices) {
    if (d.sample_rate_hz <= 0.0) issue("device '" + d.device_id + "': sample_rate_hz must be > 0");
    if (d.axes != std::vector<std::string>{"x", "y", "z"})
      issue("device '" + d.device_id + "': axes must be exactly [x,y,z]");
  }
  if (m.frame_count != static_cast<int>(std::lround(m.duration_s * m.video_fps)))
    issue("frame_count " + std::to_string(m.frame_count) + " != round(duration_s*video_fps)");
  if (!m.label && m.split != "pretrain")
    issue("split '" + m.split + "' requires a label");

  const int on_disk = count_frame_files(clip_dir / "frames");
  if (on_disk < 0) {
    issue("frames directory missing");
  } else if (on_disk != m.frame_count) {
    issue("frame_count " + std::to_string(m.frame_count) + " but " + std::to_string(on_disk) +
          " frame files on disk");
  }
  for (const auto& d : m.devices) {
    if (!fs::exists(clip_dir / ("imu_" + d.device_id + ".csv")))
      issue("IMU file missing for device '" + d.device_id + "'");
  }
  return rep;
}

std::map<std::string, std::vector<std::string>> read_splits(const fs::path& root) {
  const fs::path p = root / "splits.json";
  std::ifstream in(p);
  if (!in) throw MissingFile("missing splits.json in " + root.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
  std::map<std::string, std::vector<std::string>> out;
  for (auto it = j.begin(); it != j.end(); ++it)
    out[it.key()] = it.value().get<std::vector<std::string>>();
  return out;
}

void write_splits(const fs::path& root,
                  const std::map<std::string, std::vector<std::string>>& splits) {
  std::ofstream out(root / "splits.json");
  if (!out) throw IoError("cannot write splits.json in " + root.string());
  json j = json::object();
  for (const auto& [k, v] : splits) j[k] = v;
  out << j.dump(2) << "\n";
}

std::vector<DeviceSpec> default_devices(double sample_rate_hz) {
  std::vector<DeviceSpec> out;
  for (const char* id : {"left_wrist", "right_wrist", "left_ankle", "right_ankle"}) {
    DeviceSpec d;
    d.device_id = id;
    d.sample_rate_hz = sample_rate_hz;
    out.push_back(std::move(d));
  }
  return out;
}

ClassSignature synthetic_class_signature(int class_idx, int num_classes) {
  if (class_idx < 0 || class_idx >= num_classes)
    throw InvalidParam("class index out of range");
  ClassSignature s;
  s.freq_hz = 4.0 + 1.5 * class_idx;
  s.angle_rad = M_PI * class_idx / num_classes;
  return s;
}

std::string synthetic_class_name(int class_idx) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "class_%02d", class_idx);
  return buf;
}

namespace {

// Per-axis amplitude scaling and phase offsets give each device a 3-D
// signature while keeping one dominant frequency.
constexpr double kAxisAmp[3] = {1.0, 0.7, 0.4};
constexpr double kAxisPhase[3] = {0.0, M_PI / 3.0, 2.0 * M_PI / 3.0};
constexpr double kSignalAmp = 2.0;      // m/s^2, class-carrying devices
constexpr double kDistractorAmp = 0.8;  // m/s^2, other devices
constexpr double kGravity = 9.81;

RawClip make_synthetic_clip(const SyntheticSpec& spec, int class_idx, const std::string& clip_id,
                            const std::string& split, std::uint64_t clip_seed) {
  const ClassSignature sig = synthetic_class_signature(class_idx, spec.num_classes);
  Rng phase_rng(derive_seed(clip_seed, "phase"));
  Rng imu_noise(derive_seed(clip_seed, "imu_noise"));
  Rng video_noise(derive_seed(clip_seed, "video_noise"));

  const double blob_phase = phase_rng.uniform() * 2.0 * M_PI;

  RawClip clip;
  clip.manifest.clip_id = clip_id;
  clip.manifest.duration_s = spec.duration_s;
  clip.manifest.video_fps = spec.video_fps;
  clip.manifest.frame_count = static_cast<int>(std::lround(spec.duration_s * spec.video_fps));
  clip.manifest.frame_h = spec.frame_h;
  clip.manifest.frame_w = spec.frame_w;
  clip.manifest.devices = spec.devices;
  clip.manifest.label = synthetic_class_name(class_idx);
  clip.manifest.split = split;

  for (std::size_t di = 0; di < spec.devices.size(); ++di) {
    const DeviceSpec& dev = spec.devices[di];
    const bool designated = (di % 2 == 0);
    const double indep_phase = phase_rng.uniform() * 2.0 * M_PI;
    const double phase = designated
                             ? blob_phase + (1.0 - spec.correlation_strength) * indep_phase
                             : indep_phase;
    const double freq = designated ? sig.freq_hz : kDistractorFreqHz;
    const double amp = designated ? kSignalAmp : kDistractorAmp;
    const long samples = std::lround(spec.duration_s * dev.sample_rate_hz);
    Eigen::MatrixXd series(samples, 3);
    for (long k = 0; k < samples; ++k) {
      const double t = static_cast<double>(k) / dev.sample_rate_hz;
      for (int a = 0; a < 3; ++a) {
        double v = amp * kAxisAmp[a] * std::sin(2.0 * M_PI * freq * t + phase + kAxisPhase[a]);
        if (a == 2) v += kGravity;
        if (spec.noise_level > 0.0) v += spec.noise_level * imu_noise.normal();
        series(k, a) = v;
      }
    }
    clip.imu.emplace(dev.device_id, std::move(series));
  }

  const double half_h = spec.frame_h / 2.0;
  const double half_w = spec.frame_w / 2.0;
  const double travel = 0.30 * std::min(spec.frame_h, spec.frame_w);
  const double sigma = 0.06 * std::min(spec.frame_h, spec.frame_w);
  const double video_noise_sd = 12.0 * spec.noise_level;
  clip.frames.reserve(static_cast<std::size_t>(clip.manifest.frame_count));
  for (int f = 0; f < clip.manifest.frame_count; ++f) {
    const double t = static_cast<double>(f) / spec.video_fps;
    const double offset = travel * std::sin(2.0 * M_PI * sig.freq_hz * t + blob_phase);
    const double cx = half_w + offset * std::cos(sig.angle_rad);
    const double cy = half_h + offset * std::sin(sig.angle_rad);
    Image8 img(spec.frame_h, spec.frame_w);
    for (int y = 0; y < spec.frame_h; ++y) {
      for (int x = 0; x < spec.frame_w; ++x) {
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        double v = 20.0 + 235.0 * std::exp(-d2 / (2.0 * sigma * sigma));
        if (video_noise_sd > 0.0) v += video_noise_sd * video_noise.normal();
        const auto q = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        img.at(y, x, 0) = q;
        img.at(y, x, 1) = q;
        img.at(y, x, 2) = q;
      }
    }
    clip.frames.push_back(std::move(img));
  }
  return clip;
}

}  // namespace

void generate_synthetic_dataset(const SyntheticSpec& spec, const fs::path& out_root) {
  if (spec.num_classes < 2) throw InvalidParam("num_classes must be >= 2");
  if (spec.clips_per_class < 1) throw InvalidParam("clips_per_class must be >= 1");
  if (spec.correlation_strength < 0.0 || spec.correlation_strength > 1.0)
    throw InvalidParam("correlation_strength must lie in [0,1]");
  if (spec.noise_level < 0.0) throw InvalidParam("noise_level must be >= 0");
  if (spec.devices.empty()) throw InvalidParam("at least one device required");

  std::error_code ec;
  fs::create_directories(out_root, ec);
  if (ec) throw IoError("cannot create " + out_root.string() + ": " + ec.message());

  // Per-class partition: most clips train, then a small val/test tail.
  const int n = spec.clips_per_class;
  const int n_test = std::max(1, n / 4);
  const int n_val = std::max(1, n / 8);
  std::map<std::string, std::vector<std::string>> splits;

  int clip_index = 0;
  for (int c = 0; c < spec.num_classes; ++c) {
    for (int i = 0; i < n; ++i, ++clip_index) {
      char idbuf[32];
      std::snprintf(idbuf, sizeof(idbuf), "c%02d_clip%03d", c, i);
      const std::string clip_id = idbuf;
      std::string split = "train";
      if (i >= n - n_test) {
        split = "test";
      } else if (i >= n - n_test - n_val) {
        split = "val";
      }
      const RawClip clip = make_synthetic_clip(
          spec, c, clip_id, split, derive_seed(spec.seed, static_cast<std::uint64_t>(clip_index)));
      write_clip(clip, out_root / clip_id);
      splits["pretrain"].push_back(clip_id);
      splits[split].push_back(clip_id);
    }
  }
  write_splits(out_root, splits);
}

std::vector<Image8> degrade_low_light(const std::vector<Image8>& frames, double light_level,
                                      double shot_strength, double read_sigma,
                                      std::uint64_t seed) {
  if (!(light_level > 0.0) || light_level > 1.0)
    throw InvalidParam("light_level must lie in (0,1]");
  if (shot_strength < 0.0 || read_sigma < 0.0)
    throw InvalidParam("noise strengths must be >= 0");

  const bool noisy = shot_strength > 0.0 || read_sigma > 0.0;
  Rng rng(derive_seed(seed, "low_light"));
  std::vector<Image8> out;
  out.reserve(frames.size());
  for (const Image8& src : frames) {
    Image8 dst(src.height, src.width);
    for (std::size_t i = 0; i < src.rgb.size(); ++i) {
      double lin = std::pow(src.rgb[i] / 255.0, kGamma) * light_level;
      if (noisy) {
        lin += rng.normal() * std::sqrt(shot_strength * lin);
        lin += rng.normal() * read_sigma;
      }
      lin = std::clamp(lin, 0.0, 1.0);
      dst.rgb[i] =
          static_cast<std::uint8_t>(std::clamp(std::lround(255.0 * std::pow(lin, 1.0 / kGamma)),
                                               0L, 255L));
    }
    out.push_back(std::move(dst));
  }
  return out;
}

double psnr(const std::vector<Image8>& a, const std::vector<Image8>& b) {
  if (a.size() != b.size()) throw ShapeError("psnr: frame count mismatch");
  double se = 0.0;
  double n = 0.0;
  for (std::size_t f = 0; f < a.size(); ++f) {
    if (a[f].rgb.size() != b[f].rgb.size()) throw ShapeError("psnr: frame size mismatch");
    for (std::size_t i = 0; i < a[f].rgb.size(); ++i) {
      const double d = static_cast<double>(a[f].rgb[i]) - static_cast<double>(b[f].rgb[i]);
      se += d * d;
      n += 1.0;
    }
  }
  if (n == 0.0) throw InvalidParam("psnr: empty input");
  const double mse = se / n;
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace evimae
