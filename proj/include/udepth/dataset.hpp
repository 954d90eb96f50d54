#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "udepth/image.hpp"
#include "udepth/image_io.hpp"

namespace udepth {

/// One "timestamp path" line of a TUM-style listing.
struct ListingEntry {
  double timestamp = 0;
  std::string path;
};

/// An associated RGB/depth pair.
struct FrameRecord {
  double timestamp = 0;        // rgb timestamp
  double depth_timestamp = 0;
  std::string rgb_path;
  std::string depth_path;
  bool paired = false;
};

struct SequenceConfig {
  int stride = 5;
  int target_width = 320;
  int target_height = 192;
  double max_dt = 0.02;
  double depth_divisor = kTumDepthDivisor;

  bool valid() const {
    return stride >= 1 && max_dt >= 0 && target_width > 0 && target_height > 0 && depth_divisor > 0;
  }
};

/// Reads a listing; '#' lines and blank lines are skipped. Timestamps must
/// be strictly increasing. Throws DataError.
std::vector<ListingEntry> read_listing(const std::filesystem::path& path);
std::vector<ListingEntry> parse_listing(const std::string& text, const std::string& origin = "<text>");

/// Greedy nearest-timestamp matching: candidate pairs with |dt| <= max_dt
/// are taken in order of increasing |dt|, each frame used at most once.
/// Output is ordered by rgb timestamp. Throws DataError on empty input.
std::vector<FrameRecord> associate_frames(const std::vector<ListingEntry>& rgb,
                                          const std::vector<ListingEntry>& depth, double max_dt);

/// "rgb_ts rgb_path depth_ts depth_path" lines, as written by the TUM tools.
std::string format_association(const std::vector<FrameRecord>& records);
std::vector<FrameRecord> read_association(const std::filesystem::path& path);

struct Split {
  std::vector<FrameRecord> train;
  std::vector<FrameRecord> test;
  bool test_empty = false;
};

/// Records 0, stride, 2*stride, ... go to train until train_count is reached;
/// everything else is test. Throws DataError when fewer than train_count
/// records are reachable with the stride.
Split subsample_and_split(const std::vector<FrameRecord>& records, const SequenceConfig& cfg,
                          int train_count);

/// RGB resized bilinearly to the configured size.
ImageBuffer load_rgb(const std::filesystem::path& path, const SequenceConfig& cfg);

/// Nearest-neighbor resampling (pixel centers, align-corners-false) that
/// carries the mask along; used to bring predictions up to GT resolution.
DepthMap resize_nearest(const DepthMap& map, int width, int height);

}  // namespace udepth
