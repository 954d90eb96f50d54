#include "udepth/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include "udepth/errors.hpp"

namespace udepth {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw DataError("cannot open " + path.string());
  return f;
}

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  png_longjmp(png, 1);
}

struct DecodedPng {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<unsigned char> bytes;  // row major, big-endian samples for 16 bit
};

// Reads without any transform beyond palette/low-bit expansion when asked.
DecodedPng decode_png(const std::filesystem::path& path, bool expand_to_8bit) {
  FilePtr file = open_file(path, "rb");
  std::array<unsigned char, 8> sig{};
  if (std::fread(sig.data(), 1, sig.size(), file.get()) != sig.size() ||
      png_sig_cmp(sig.data(), 0, sig.size()) != 0) {
    throw DataError(path.string() + ": not a PNG file");
  }
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, nullptr);
  png_infop info = png_create_info_struct(png);
  DecodedPng out;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError(path.string() + ": " + error);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  if (expand_to_8bit) {
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
  }
  png_read_update_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  out.bytes.resize(stride * static_cast<std::size_t>(out.height));
  rows.resize(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) rows[y] = out.bytes.data() + stride * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void encode_png(const std::filesystem::path& path, int width, int height, int color_type,
                int bit_depth, const std::vector<unsigned char>& bytes) {
  FilePtr file = open_file(path, "wb");
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, nullptr);
  png_infop info = png_create_info_struct(png);
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t stride =
      static_cast<std::size_t>(width) * channels * (bit_depth == 16 ? 2 : 1);
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y)
    rows[y] = const_cast<unsigned char*>(bytes.data()) + stride * y;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError(path.string() + ": " + error);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

ImageBuffer from_interleaved(const unsigned char* data, int width, int height, int channels) {
  ImageBuffer img(width, height, channels);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c)
        img(y, x, c) = data[(static_cast<std::size_t>(y) * width + x) * channels + c] / 255.0;
  return img;
}

std::vector<unsigned char> to_interleaved(const ImageBuffer& img) {
  std::vector<unsigned char> bytes(static_cast<std::size_t>(img.width()) * img.height() *
                                   img.channels());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c)
        bytes[(static_cast<std::size_t>(y) * img.width() + x) * img.channels() + c] =
            to_byte(img(y, x, c));
  return bytes;
}

void check_writable(const ImageBuffer& img) {
  if (img.empty()) throw std::invalid_argument("cannot write an empty image");
  if (img.channels() != 1 && img.channels() != 3)
    throw std::invalid_argument("only 1- or 3-channel images can be written");
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext;
}

std::uint32_t load_le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_le32(unsigned char* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
}

constexpr std::array<char, 8> kRawMagic = {'U', 'D', 'M', 'A', 'P', 'F', '3', '2'};

}  // namespace

ImageBuffer read_png(const std::filesystem::path& path) {
  DecodedPng png = decode_png(path, true);
  if (png.channels == 1 || png.channels == 3)
    return from_interleaved(png.bytes.data(), png.width, png.height, png.channels);
  throw DataError(path.string() + ": unsupported channel count " + std::to_string(png.channels));
}

void write_png(const std::filesystem::path& path, const ImageBuffer& img) {
  check_writable(img);
  encode_png(path, img.width(), img.height(),
             img.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, 8,
             to_interleaved(img));
}

ImageBuffer read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string magic;
  in >> magic;
  int channels = 0;
  if (magic == "P5") channels = 1;
  else if (magic == "P6") channels = 3;
  else throw DataError(path.string() + ": expected binary PGM (P5) or PPM (P6)");
  auto next_int = [&]() {
    int value = 0;
    while (in >> std::ws && in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
    }
    if (!(in >> value)) throw DataError(path.string() + ": truncated header");
    return value;
  };
  const int width = next_int();
  const int height = next_int();
  const int maxval = next_int();
  if (width <= 0 || height <= 0 || maxval != 255)
    throw DataError(path.string() + ": only 8-bit (maxval 255) PNM is supported");
  in.get();
  std::vector<unsigned char> bytes(static_cast<std::size_t>(width) * height * channels);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw DataError(path.string() + ": truncated pixel data");
  return from_interleaved(bytes.data(), width, height, channels);
}

void write_pnm(const std::filesystem::path& path, const ImageBuffer& img) {
  check_writable(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << (img.channels() == 3 ? "P6" : "P5") << "\n"
      << img.width() << " " << img.height() << "\n255\n";
  const auto bytes = to_interleaved(img);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

ImageBuffer read_image(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm" || ext == ".ppm") return read_pnm(path);
  throw DataError(path.string() + ": unsupported image extension");
}

void write_image(const std::filesystem::path& path, const ImageBuffer& img) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return write_png(path, img);
  if (ext == ".pgm" || ext == ".ppm") return write_pnm(path, img);
  throw DataError(path.string() + ": unsupported image extension");
}

RawDepth read_png16(const std::filesystem::path& path) {
  DecodedPng png = decode_png(path, false);
  if (png.bit_depth != 16 || png.channels != 1) {
    throw DataError(path.string() + ": expected 16-bit single-channel PNG, got " +
                    std::to_string(png.bit_depth) + "-bit with " +
                    std::to_string(png.channels) + " channel(s)");
  }
  RawDepth raw(png.height, png.width);
  for (int y = 0; y < png.height; ++y)
    for (int x = 0; x < png.width; ++x) {
      const std::size_t i = 2 * (static_cast<std::size_t>(y) * png.width + x);
      raw(y, x) = static_cast<std::uint16_t>((png.bytes[i] << 8) | png.bytes[i + 1]);
    }
  return raw;
}

void write_png16(const std::filesystem::path& path, const RawDepth& raw) {
  if (raw.size() == 0) throw std::invalid_argument("cannot write an empty depth map");
  std::vector<unsigned char> bytes(static_cast<std::size_t>(raw.size()) * 2);
  for (Eigen::Index y = 0; y < raw.rows(); ++y)
    for (Eigen::Index x = 0; x < raw.cols(); ++x) {
      const std::size_t i = 2 * static_cast<std::size_t>(y * raw.cols() + x);
      bytes[i] = static_cast<unsigned char>(raw(y, x) >> 8);
      bytes[i + 1] = static_cast<unsigned char>(raw(y, x) & 0xffu);
    }
  encode_png(path, static_cast<int>(raw.cols()), static_cast<int>(raw.rows()),
             PNG_COLOR_TYPE_GRAY, 16, bytes);
}

DepthMap raw_to_depth(const RawDepth& raw, double divisor) {
  if (!(divisor > 0)) throw std::invalid_argument("depth divisor must be positive");
  Plane<double> meters = raw.cast<double>() / divisor;
  Mask mask = raw.array() != 0;
  return DepthMap(std::move(meters), std::move(mask));
}

RawDepth depth_to_raw(const DepthMap& depth, double divisor) {
  if (!(divisor > 0)) throw std::invalid_argument("depth divisor must be positive");
  RawDepth raw(depth.height(), depth.width());
  for (int y = 0; y < depth.height(); ++y)
    for (int x = 0; x < depth.width(); ++x) {
      if (!depth.mask(y, x)) {
        raw(y, x) = 0;
        continue;
      }
      const double r = std::round(depth.values(y, x) * divisor);
      raw(y, x) = static_cast<std::uint16_t>(std::clamp(r, 1.0, 65535.0));
    }
  return raw;
}

DepthMap load_depth_png(const std::filesystem::path& path, double divisor) {
  return raw_to_depth(read_png16(path), divisor);
}

void save_depth_png(const std::filesystem::path& path, const DepthMap& depth, double divisor) {
  write_png16(path, depth_to_raw(depth, divisor));
}

DepthMap read_depth_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::array<unsigned char, 16> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  if (in.gcount() != 16 || std::memcmp(header.data(), kRawMagic.data(), kRawMagic.size()) != 0)
    throw DataError(path.string() + ": not a raw depth map (bad magic)");
  const std::uint32_t width = load_le32(header.data() + 8);
  const std::uint32_t height = load_le32(header.data() + 12);
  if (width == 0 || height == 0 || width > (1u << 16) || height > (1u << 16))
    throw DataError(path.string() + ": implausible size in header");
  std::vector<unsigned char> bytes(static_cast<std::size_t>(width) * height * 4);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw DataError(path.string() + ": truncated pixel data");
  Plane<double> values(height, width);
  for (std::uint32_t i = 0; i < width * height; ++i)
    values.data()[i] = std::bit_cast<float>(load_le32(bytes.data() + 4 * i));
  return DepthMap::from_values(std::move(values));
}

void write_depth_raw(const std::filesystem::path& path, const DepthMap& depth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  std::vector<unsigned char> bytes(16 + static_cast<std::size_t>(depth.values.size()) * 4);
  std::memcpy(bytes.data(), kRawMagic.data(), kRawMagic.size());
  store_le32(bytes.data() + 8, static_cast<std::uint32_t>(depth.width()));
  store_le32(bytes.data() + 12, static_cast<std::uint32_t>(depth.height()));
  for (Eigen::Index i = 0; i < depth.values.size(); ++i) {
    const float v = depth.mask.data()[i] ? static_cast<float>(depth.values.data()[i]) : 0.0f;
    store_le32(bytes.data() + 16 + 4 * i, std::bit_cast<std::uint32_t>(v));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

DepthMap read_depth(const std::filesystem::path& path, double divisor) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return load_depth_png(path, divisor);
  if (ext == ".dmap") return read_depth_raw(path);
  throw DataError(path.string() + ": unsupported depth extension (expected .png or .dmap)");
}

void write_depth(const std::filesystem::path& path, const DepthMap& depth, double divisor) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return save_depth_png(path, depth, divisor);
  if (ext == ".dmap") return write_depth_raw(path, depth);
  throw DataError(path.string() + ": unsupported depth extension (expected .png or .dmap)");
}

}  // namespace udepth
