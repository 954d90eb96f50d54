#pragma once

#include <cstdint>
#include <filesystem>

#include "udepth/image.hpp"

namespace udepth {

/// Raw 16-bit single-channel pixels as stored on disk.
using RawDepth = Eigen::Matrix<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// TUM RGB-D depth PNGs store millimeters * 5.
constexpr double kTumDepthDivisor = 5000.0;

/// 8-bit PNG (gray, gray+alpha, RGB, RGBA) to a 1- or 3-channel image in [0,1].
/// Alpha is dropped.
ImageBuffer read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ImageBuffer& img);

/// Binary PGM (P5) / PPM (P6), maxval 255.
ImageBuffer read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const ImageBuffer& img);

/// Dispatches on extension: .png, .pgm, .ppm.
ImageBuffer read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const ImageBuffer& img);

/// Strict 16-bit single-channel PNG; anything else is a DataError.
RawDepth read_png16(const std::filesystem::path& path);
void write_png16(const std::filesystem::path& path, const RawDepth& raw);

/// meters = raw / divisor; raw 0 is invalid. No clamping.
DepthMap load_depth_png(const std::filesystem::path& path, double divisor = kTumDepthDivisor);

/// raw = round(meters * divisor), saturated to [1, 65535] on valid pixels,
/// 0 on invalid pixels.
void save_depth_png(const std::filesystem::path& path, const DepthMap& depth,
                    double divisor = kTumDepthDivisor);

RawDepth depth_to_raw(const DepthMap& depth, double divisor);
DepthMap raw_to_depth(const RawDepth& raw, double divisor);

/// Raw float depth interchange:
///   bytes 0..7   magic "UDMAPF32"
///   bytes 8..11  width, uint32 little endian
///   bytes 12..15 height, uint32 little endian
///   then width*height float32 little endian, row major; 0 marks invalid.
DepthMap read_depth_raw(const std::filesystem::path& path);
void write_depth_raw(const std::filesystem::path& path, const DepthMap& depth);

/// .png -> 16-bit PNG with divisor, .dmap -> raw float format.
DepthMap read_depth(const std::filesystem::path& path, double divisor = kTumDepthDivisor);
void write_depth(const std::filesystem::path& path, const DepthMap& depth,
                 double divisor = kTumDepthDivisor);

}  // namespace udepth
