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

#include "davkit/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "davkit/errors.hpp"

namespace dav {

namespace {

using json = nlohmann::json;

constexpr std::size_t kMaxDimension = 1u << 16;

std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0x0000ff00u) | ((v << 8) & 0x00ff0000u) | (v << 24);
}

void put_u32(std::string& out, std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) v = byteswap32(v);
  char bytes[4];
  std::memcpy(bytes, &v, 4);
  out.append(bytes, 4);
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

/// Bounds-checked little-endian cursor over a byte buffer.
class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  void expect_magic(std::string_view magic, const char* format) {
    if (remaining() < magic.size() || bytes_.substr(pos_, magic.size()) != magic)
      throw FormatError(std::string("not a ") + format + " file: bad magic", pos_);
    pos_ += magic.size();
  }

  std::uint32_t u32() {
    if (remaining() < 4) throw FormatError("truncated integer", pos_);
    std::uint32_t v;
    std::memcpy(&v, bytes_.data() + pos_, 4);
    pos_ += 4;
    if constexpr (std::endian::native == std::endian::big) v = byteswap32(v);
    return v;
  }

  float f32() { return std::bit_cast<float>(u32()); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

bool is_space(char c) { return c == ' ' || c == '\n' || c == '\r' || c == '\t'; }

// Text header tokens for the netpbm-style formats.
class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  void skip_space(bool allow_comments = false) {
    const std::size_t start = pos_;
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (allow_comments && bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
    if (pos_ == start) throw FormatError("expected whitespace in header", pos_);
  }

  std::string_view token() {
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !is_space(bytes_[pos_])) ++pos_;
    if (pos_ == start) throw FormatError("expected a header field", pos_);
    return bytes_.substr(start, pos_ - start);
  }

  std::size_t dimension() {
    const std::size_t start = pos_;
    const std::string_view t = token();
    std::size_t value = 0;
    const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || end != t.data() + t.size() || value == 0 || value > kMaxDimension)
      throw FormatError("invalid image dimension '" + std::string(t) + "'", start);
    return value;
  }

  double number() {
    const std::size_t start = pos_;
    const std::string_view t = token();
    double value = 0.0;
    const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || end != t.data() + t.size() || !std::isfinite(value))
      throw FormatError("invalid number '" + std::string(t) + "'", start);
    return value;
  }

  // Exactly one whitespace byte separates the header from the payload.
  void end_of_header() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) throw FormatError("header not terminated", pos_);
    ++pos_;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::array<unsigned char, 3> warm_cool(double t) {
  // Blue -> light grey -> red.
  static constexpr double kStops[3][3] = {{59, 76, 192}, {221, 221, 221}, {180, 4, 38}};
  const int seg = t < 0.5 ? 0 : 1;
  const double local = t < 0.5 ? t * 2.0 : (t - 0.5) * 2.0;
  std::array<unsigned char, 3> rgb{};
  for (int c = 0; c < 3; ++c)
    rgb[c] = static_cast<unsigned char>(
        std::lround(kStops[seg][c] + (kStops[seg + 1][c] - kStops[seg][c]) * local));
  return rgb;
}

}  // namespace

std::string encode_pfm(const DepthMap& depth) {
  std::string out = "Pf\n" + std::to_string(depth.width()) + " " + std::to_string(depth.height()) + "\n-1.0\n";
  out.reserve(out.size() + depth.pixel_count() * 4);
  for (int v = depth.height() - 1; v >= 0; --v)
    for (int u = 0; u < depth.width(); ++u)
      put_f32(out, depth.is_valid(v, u) ? static_cast<float>(depth(v, u)) : 0.0f);
  return out;
}

DepthMap decode_pfm(std::string_view bytes) {
  if (bytes.size() >= 2 && bytes.substr(0, 2) == "PF")
    throw FormatError("three-channel PFM is not a depth map", 0);
  if (bytes.size() < 2 || bytes.substr(0, 2) != "Pf") throw FormatError("not a PFM file: bad magic", 0);
  HeaderReader header(bytes.substr(2));
  header.skip_space();
  const std::size_t width = header.dimension();
  header.skip_space();
  const std::size_t height = header.dimension();
  header.skip_space();
  const std::size_t scale_at = header.offset() + 2;
  const double scale = header.number();
  if (scale == 0.0) throw FormatError("PFM scale must be non-zero", scale_at);
  header.end_of_header();

  const std::size_t data_start = header.offset() + 2;
  const std::size_t needed = width * height * 4;
  const std::size_t available = bytes.size() - data_start;
  if (available < needed)
    throw FormatError("truncated PFM payload: need " + std::to_string(needed) + " bytes, have " +
                          std::to_string(available),
                      bytes.size());
  if (available > needed) throw FormatError("trailing bytes after PFM payload", data_start + needed);

  const bool little = scale < 0.0;
  Eigen::ArrayXXd values(static_cast<Eigen::Index>(height), static_cast<Eigen::Index>(width));
  Mask valid(static_cast<Eigen::Index>(height), static_cast<Eigen::Index>(width));
  const char* p = bytes.data() + data_start;
  for (std::size_t row = 0; row < height; ++row) {
    const std::size_t v = height - 1 - row;
    for (std::size_t u = 0; u < width; ++u, p += 4) {
      std::uint32_t raw;
      std::memcpy(&raw, p, 4);
      const bool native_little = std::endian::native == std::endian::little;
      if (little != native_little) raw = byteswap32(raw);
      const double d = std::bit_cast<float>(raw);
      const bool ok = std::isfinite(d) && d > 0.0;
      values(v, u) = ok ? d : 0.0;
      valid(v, u) = ok;
    }
  }
  return DepthMap(std::move(values), std::move(valid));
}

std::string encode_dav(const DAVolume& dav) {
  std::string out = "DAV1";
  const auto cells = static_cast<std::size_t>(dav.cells());
  out.reserve(20 + cells * cells * 4);
  put_u32(out, static_cast<std::uint32_t>(dav.h));
  put_u32(out, static_cast<std::uint32_t>(dav.w));
  put_u32(out, static_cast<std::uint32_t>(dav.h));
  put_u32(out, static_cast<std::uint32_t>(dav.w));
  for (int p = 0; p < dav.cells(); ++p)
    for (int q = 0; q < dav.cells(); ++q) put_f32(out, static_cast<float>(dav.values(p, q)));
  return out;
}

DAVolume decode_dav(std::string_view bytes) {
  ByteReader r(bytes);
  r.expect_magic("DAV1", "DAV");
  const std::uint32_t h = r.u32();
  const std::uint32_t w = r.u32();
  const std::uint32_t h2 = r.u32();
  const std::uint32_t w2 = r.u32();
  if (h != h2 || w != w2) throw FormatError("DAV header dimensions disagree", 4);
  const std::uint64_t cells = static_cast<std::uint64_t>(h) * w;
  if (cells > (1u << 14)) throw FormatError("DAV grid too large", 4);
  const std::uint64_t needed = cells * cells * 4;
  if (r.remaining() != needed)
    throw FormatError("DAV size mismatch: header implies " + std::to_string(needed) + " payload bytes, file has " +
                          std::to_string(r.remaining()),
                      r.offset());
  DAVolume dav;
  dav.h = static_cast<int>(h);
  dav.w = static_cast<int>(w);
  dav.values.resize(static_cast<Eigen::Index>(cells), static_cast<Eigen::Index>(cells));
  for (Eigen::Index p = 0; p < dav.values.rows(); ++p)
    for (Eigen::Index q = 0; q < dav.values.cols(); ++q) dav.values(p, q) = r.f32();
  return dav;
}

std::string encode_params(const BlockParams<double>& params, const BlockConfig& cfg) {
  cfg.validate();
  std::string out = "DAVP";
  put_u32(out, static_cast<std::uint32_t>(cfg.c_in));
  put_u32(out, static_cast<std::uint32_t>(cfg.c_embed));
  put_u32(out, static_cast<std::uint32_t>(cfg.c_orange));
  put_u32(out, cfg.scale_logits ? 1u : 0u);
  BlockParams<double> copy = params;
  for_each_tensor(copy, [&](std::string_view, double* data, Eigen::Index n) {
    put_u32(out, static_cast<std::uint32_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) put_f32(out, static_cast<float>(data[i]));
  });
  return out;
}

std::pair<BlockParams<double>, BlockConfig> decode_params(std::string_view bytes) {
  ByteReader r(bytes);
  r.expect_magic("DAVP", "parameter");
  BlockConfig cfg;
  const std::uint32_t dims[3] = {r.u32(), r.u32(), r.u32()};
  for (std::uint32_t d : dims)
    if (d == 0 || d > 4096) throw FormatError("invalid channel count " + std::to_string(d), 4);
  cfg.c_in = static_cast<int>(dims[0]);
  cfg.c_embed = static_cast<int>(dims[1]);
  cfg.c_orange = static_cast<int>(dims[2]);
  const std::uint32_t flag = r.u32();
  if (flag > 1) throw FormatError("invalid logit-scaling flag", 16);
  cfg.scale_logits = flag == 1;

  BlockParams<double> params = BlockParams<double>::zeros(cfg);
  for_each_tensor(params, [&](std::string_view name, double* data, Eigen::Index n) {
    const std::size_t at = r.offset();
    const std::uint32_t len = r.u32();
    if (len != static_cast<std::uint32_t>(n))
      throw FormatError("tensor " + std::string(name) + " has length " + std::to_string(len) + ", expected " +
                            std::to_string(n),
                        at);
    if (r.remaining() < static_cast<std::size_t>(n) * 4) throw FormatError("truncated tensor " + std::string(name), r.offset());
    for (Eigen::Index i = 0; i < n; ++i) data[i] = r.f32();
  });
  if (r.remaining() != 0) throw FormatError("trailing bytes after parameters", r.offset());
  return {std::move(params), cfg};
}

Eigen::ArrayXXi decode_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes.substr(0, 2) != "P5") throw FormatError("not a binary PGM file: bad magic", 0);
  HeaderReader header(bytes.substr(2));
  header.skip_space(true);
  const std::size_t width = header.dimension();
  header.skip_space(true);
  const std::size_t height = header.dimension();
  header.skip_space(true);
  const std::size_t maxval_at = header.offset() + 2;
  const std::size_t maxval = header.dimension();
  if (maxval > 255) throw FormatError("only 8-bit PGM is supported", maxval_at);
  header.end_of_header();
  const std::size_t data_start = header.offset() + 2;
  if (bytes.size() - data_start != width * height)
    throw FormatError("PGM payload size does not match its header", bytes.size());
  Eigen::ArrayXXi out(static_cast<Eigen::Index>(height), static_cast<Eigen::Index>(width));
  for (std::size_t v = 0; v < height; ++v)
    for (std::size_t u = 0; u < width; ++u)
      out(v, u) = static_cast<unsigned char>(bytes[data_start + v * width + u]);
  return out;
}

std::string encode_pgm(const Eigen::ArrayXXi& samples) {
  std::string out = "P5\n" + std::to_string(samples.cols()) + " " + std::to_string(samples.rows()) + "\n255\n";
  for (Eigen::Index v = 0; v < samples.rows(); ++v)
    for (Eigen::Index u = 0; u < samples.cols(); ++u) {
      const int s = samples(v, u);
      out.push_back(static_cast<char>(s < 0 || s > 255 ? 255 : s));
    }
  return out;
}

std::string encode_heatmap(const Eigen::ArrayXXd& map, const HeatmapStyle& style) {
  if (!(style.min < style.max)) throw ConfigurationError("heatmap range must satisfy min < max");
  if (!map.allFinite()) throw ConfigurationError("heatmap values must be finite");
  const auto normalized = [&](double v) { return std::clamp((v - style.min) / (style.max - style.min), 0.0, 1.0); };
  const std::string dims = std::to_string(map.cols()) + " " + std::to_string(map.rows()) + "\n255\n";
  std::string out;
  if (style.colormap == Colormap::Grayscale) {
    out = "P5\n" + dims;
    for (Eigen::Index v = 0; v < map.rows(); ++v)
      for (Eigen::Index u = 0; u < map.cols(); ++u)
        out.push_back(static_cast<char>(std::lround(255.0 * normalized(map(v, u)))));
  } else {
    out = "P6\n" + dims;
    for (Eigen::Index v = 0; v < map.rows(); ++v)
      for (Eigen::Index u = 0; u < map.cols(); ++u)
        for (unsigned char c : warm_cool(normalized(map(v, u)))) out.push_back(static_cast<char>(c));
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
  return bytes;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

DepthMap read_pfm(const std::filesystem::path& path) { return decode_pfm(read_file(path)); }
void write_pfm(const DepthMap& depth, const std::filesystem::path& path) { write_file(path, encode_pfm(depth)); }
DAVolume read_dav(const std::filesystem::path& path) { return decode_dav(read_file(path)); }
void write_dav(const DAVolume& dav, const std::filesystem::path& path) { write_file(path, encode_dav(dav)); }

std::pair<BlockParams<double>, BlockConfig> read_params(const std::filesystem::path& path) {
  return decode_params(read_file(path));
}

void write_params(const BlockParams<double>& params, const BlockConfig& cfg, const std::filesystem::path& path) {
  write_file(path, encode_params(params, cfg));
}

void write_heatmap(const Eigen::ArrayXXd& map, const HeatmapStyle& style, const std::filesystem::path& path) {
  write_file(path, encode_heatmap(map, style));
}

void write_labels(const Eigen::ArrayXXi& labels, const std::filesystem::path& path) {
  write_file(path, encode_pgm(labels));
}

Eigen::ArrayXXi read_pgm(const std::filesystem::path& path) { return decode_pgm(read_file(path)); }

std::string intrinsics_to_json(const CameraIntrinsics& camera) {
  const json j = {{"fx", camera.fx},       {"fy", camera.fy},         {"cx", camera.cx},
                  {"cy", camera.cy},       {"width", camera.width},   {"height", camera.height}};
  return j.dump(2) + "\n";
}

CameraIntrinsics intrinsics_from_json(std::string_view text) {
  CameraIntrinsics k;
  try {
    const json j = json::parse(text);
    k.fx = j.at("fx").get<double>();
    k.fy = j.at("fy").get<double>();
    k.cx = j.at("cx").get<double>();
    k.cy = j.at("cy").get<double>();
    k.width = j.at("width").get<int>();
    k.height = j.at("height").get<int>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid intrinsics: ") + e.what(), 0);
  }
  k.validate();
  return k;
}

CameraIntrinsics read_intrinsics(const std::filesystem::path& path) { return intrinsics_from_json(read_file(path)); }

std::vector<PlaneRecord> to_records(const std::vector<DetectedPlane>& planes) {
  std::vector<PlaneRecord> out;
  out.reserve(planes.size());
  for (const auto& p : planes) out.push_back({p.plane, p.inlier_count(), p.coverage});
  return out;
}

std::string planes_to_json(const std::vector<PlaneRecord>& planes) {
  json list = json::array();
  for (const auto& p : planes) {
    list.push_back({{"nx", p.plane.normal.x()},
                    {"ny", p.plane.normal.y()},
                    {"nd", p.plane.normal.z()},
                    {"c", p.plane.offset},
                    {"inlier_count", p.inlier_count},
                    {"coverage", p.coverage}});
  }
  return json{{"planes", list}}.dump(2) + "\n";
}

std::vector<PlaneRecord> planes_from_json(std::string_view text) {
  std::vector<PlaneRecord> out;
  try {
    const json j = json::parse(text);
    for (const auto& p : j.at("planes")) {
      PlaneRecord r;
      r.plane.normal = {p.at("nx").get<double>(), p.at("ny").get<double>(), p.at("nd").get<double>()};
      r.plane.offset = p.at("c").get<double>();
      r.inlier_count = p.at("inlier_count").get<std::size_t>();
      r.coverage = p.at("coverage").get<double>();
      out.push_back(r);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid plane list: ") + e.what(), 0);
  }
  return out;
}

std::string report_to_json(const MetricsReport& r) {
  json j = {{"pixel_count", r.pixel_count},
            {"rel", r.rel},
            {"rmse", r.rmse},
            {"log10", r.log10},
            {"sqrel", r.sqrel},
            {"si", r.si},
            {"imae", r.imae},
            {"irmse", r.irmse},
            {"delta1", r.delta1},
            {"delta2", r.delta2},
            {"delta3", r.delta3},
            {"eps_0", r.eps_0},
            {"eps_minus", r.eps_minus},
            {"eps_plus", r.eps_plus}};
  if (r.eps_plan) {
    j["eps_plan"] = *r.eps_plan;
    j["eps_plan_definition"] = "per-plane std of point-to-plane distances (cm), averaged over planes";
  }
  if (r.eps_orie) j["eps_orie"] = *r.eps_orie;
  if (r.eps_acc) j["eps_acc"] = *r.eps_acc;
  if (r.eps_comp) j["eps_comp"] = *r.eps_comp;
  return j.dump(2) + "\n";
}

std::string trace_to_csv(const std::vector<double>& trace) {
  std::string out;
  for (std::size_t i = 0; i < trace.size(); ++i) out += std::to_string(i) + "," + format_double(trace[i]) + "\n";
  return out;
}

}  // namespace dav
