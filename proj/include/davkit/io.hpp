// Copyright 2026 The davkit Authors.
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

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "davkit/attention_block.hpp"
#include "davkit/geometry.hpp"
#include "davkit/metrics.hpp"
#include "davkit/plane_detection.hpp"
#include "davkit/volume.hpp"

namespace dav {

// Byte-level codecs. Decoders throw FormatError with the failing offset and
// never read out of bounds.

/// Single-channel PFM, written little-endian (scale -1). Invalid pixels are
/// stored as 0; on read any non-positive or non-finite sample is invalid.
std::string encode_pfm(const DepthMap& depth);
DepthMap decode_pfm(std::string_view bytes);

/// "DAV1", four little-endian uint32 (H, W, H, W), then (H*W)^2 float32
/// values row-major over (p_row, p_col, q_row, q_col).
std::string encode_dav(const DAVolume& dav);
DAVolume decode_dav(std::string_view bytes);

/// "DAVP", uint32 c_in, c_embed, c_orange, scale_logits, then every tensor
/// in for_each_tensor order as a uint32 length followed by float32 values.
std::string encode_params(const BlockParams<double>& params, const BlockConfig& cfg);
std::pair<BlockParams<double>, BlockConfig> decode_params(std::string_view bytes);

/// Binary PGM (P5, maxval <= 255) as raw sample values.
Eigen::ArrayXXi decode_pgm(std::string_view bytes);
std::string encode_pgm(const Eigen::ArrayXXi& samples);

enum class Colormap { Grayscale, WarmCool };

struct HeatmapStyle {
  double min = 0.0;
  double max = 1.0;
  Colormap colormap = Colormap::WarmCool;
};

/// Linear value-to-colour map clamped to [min, max]: PGM for grayscale, PPM
/// (P6) for warm-cool. Throws ConfigurationError when min >= max or a value
/// is not finite.
std::string encode_heatmap(const Eigen::ArrayXXd& map, const HeatmapStyle& style);

// File wrappers. Missing or unreadable files raise IoError.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

DepthMap read_pfm(const std::filesystem::path& path);
void write_pfm(const DepthMap& depth, const std::filesystem::path& path);
DAVolume read_dav(const std::filesystem::path& path);
void write_dav(const DAVolume& dav, const std::filesystem::path& path);
std::pair<BlockParams<double>, BlockConfig> read_params(const std::filesystem::path& path);
void write_params(const BlockParams<double>& params, const BlockConfig& cfg, const std::filesystem::path& path);
void write_heatmap(const Eigen::ArrayXXd& map, const HeatmapStyle& style, const std::filesystem::path& path);

/// 8-bit label image; label values above 254 or negative are written as 255.
void write_labels(const Eigen::ArrayXXi& labels, const std::filesystem::path& path);
Eigen::ArrayXXi read_pgm(const std::filesystem::path& path);

// Structured text records (JSON).

std::string intrinsics_to_json(const CameraIntrinsics& camera);
CameraIntrinsics intrinsics_from_json(std::string_view text);
CameraIntrinsics read_intrinsics(const std::filesystem::path& path);

/// What a plane list file stores about each plane.
struct PlaneRecord {
  Plane plane;
  std::size_t inlier_count = 0;
  double coverage = 0.0;
};

std::vector<PlaneRecord> to_records(const std::vector<DetectedPlane>& planes);

/// {"planes": [{nx, ny, nd, c, inlier_count, coverage}, ...]}
std::string planes_to_json(const std::vector<PlaneRecord>& planes);
std::vector<PlaneRecord> planes_from_json(std::string_view text);

/// One key per report field; absent optional metrics are omitted.
std::string report_to_json(const MetricsReport& report);

/// "step,value" lines.
std::string trace_to_csv(const std::vector<double>& trace);

}  // namespace dav
