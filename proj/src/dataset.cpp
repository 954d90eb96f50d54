#include "udepth/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <tuple>

#include "udepth/errors.hpp"

namespace udepth {

std::vector<ListingEntry> parse_listing(const std::string& text, const std::string& origin) {
  std::vector<ListingEntry> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    ListingEntry e;
    if (!(fields >> e.timestamp >> e.path)) {
      throw DataError(origin + ":" + std::to_string(lineno) + ": expected 'timestamp path'");
    }
    if (!out.empty() && !(e.timestamp > out.back().timestamp)) {
      throw DataError(origin + ":" + std::to_string(lineno) + ": timestamps not strictly increasing");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ListingEntry> read_listing(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open listing " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_listing(ss.str(), path.string());
}

std::vector<FrameRecord> associate_frames(const std::vector<ListingEntry>& rgb,
                                          const std::vector<ListingEntry>& depth, double max_dt) {
  if (rgb.empty() || depth.empty()) throw DataError("associate_frames: empty listing");
  if (!(max_dt >= 0)) throw DataError("associate_frames: max_dt must be non-negative");

  struct Candidate {
    double dt;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Candidate> candidates;
  std::size_t lo = 0;
  for (std::size_t i = 0; i < rgb.size(); ++i) {
    while (lo < depth.size() && depth[lo].timestamp < rgb[i].timestamp - max_dt) ++lo;
    for (std::size_t j = lo; j < depth.size() && depth[j].timestamp <= rgb[i].timestamp + max_dt; ++j) {
      const double dt = std::abs(depth[j].timestamp - rgb[i].timestamp);
      if (dt <= max_dt) candidates.push_back({dt, i, j});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.dt, a.i, a.j) < std::tie(b.dt, b.i, b.j);
  });

  std::vector<int> match(rgb.size(), -1);
  std::vector<bool> used(depth.size(), false);
  for (const auto& c : candidates) {
    if (match[c.i] >= 0 || used[c.j]) continue;
    match[c.i] = static_cast<int>(c.j);
    used[c.j] = true;
  }

  std::vector<FrameRecord> out;
  for (std::size_t i = 0; i < rgb.size(); ++i) {
    if (match[i] < 0) continue;
    const auto& d = depth[static_cast<std::size_t>(match[i])];
    out.push_back({rgb[i].timestamp, d.timestamp, rgb[i].path, d.path, true});
  }
  return out;
}

std::string format_association(const std::vector<FrameRecord>& records) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6);
  for (const auto& r : records)
    os << r.timestamp << ' ' << r.rgb_path << ' ' << r.depth_timestamp << ' ' << r.depth_path << '\n';
  return os.str();
}

std::vector<FrameRecord> read_association(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open association file " + path.string());
  std::vector<FrameRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    FrameRecord r;
    if (!(fields >> r.timestamp >> r.rgb_path >> r.depth_timestamp >> r.depth_path)) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected 'rgb_ts rgb_path depth_ts depth_path'");
    }
    r.paired = true;
    out.push_back(std::move(r));
  }
  return out;
}

Split subsample_and_split(const std::vector<FrameRecord>& records, const SequenceConfig& cfg,
                          int train_count) {
  if (!cfg.valid()) throw DataError("subsample_and_split: invalid sequence config");
  if (train_count < 0) throw DataError("subsample_and_split: negative train count");
  const std::size_t stride = static_cast<std::size_t>(cfg.stride);
  const std::size_t reachable = (records.size() + stride - 1) / stride;
  if (reachable < static_cast<std::size_t>(train_count)) {
    throw DataError("subsample_and_split: " + std::to_string(records.size()) + " records give " +
                    std::to_string(reachable) + " frames at stride " + std::to_string(cfg.stride) +
                    ", " + std::to_string(train_count) + " requested");
  }
  Split s;
  std::vector<bool> in_train(records.size(), false);
  for (std::size_t i = 0; i < records.size() && s.train.size() < static_cast<std::size_t>(train_count);
       i += stride) {
    in_train[i] = true;
    s.train.push_back(records[i]);
  }
  for (std::size_t i = 0; i < records.size(); ++i)
    if (!in_train[i]) s.test.push_back(records[i]);
  s.test_empty = s.test.empty();
  return s;
}

ImageBuffer load_rgb(const std::filesystem::path& path, const SequenceConfig& cfg) {
  return resize_bilinear(read_image(path), cfg.target_width, cfg.target_height);
}

DepthMap resize_nearest(const DepthMap& map, int width, int height) {
  if (width <= 0 || height <= 0) throw DataError("resize_nearest: non-positive size");
  if (map.width() == width && map.height() == height) return map;
  auto index = [](int o, int in, int out) {
    const int s = static_cast<int>(std::floor((o + 0.5) * in / out));
    return std::clamp(s, 0, in - 1);
  };
  Plane<double> values(height, width);
  Mask mask(height, width);
  for (int y = 0; y < height; ++y) {
    const int sy = index(y, map.height(), height);
    for (int x = 0; x < width; ++x) {
      const int sx = index(x, map.width(), width);
      values(y, x) = map.values(sy, sx);
      mask(y, x) = map.mask(sy, sx);
    }
  }
  return DepthMap(std::move(values), std::move(mask));
}

}  // namespace udepth
