#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "webcolor/color.hpp"
#include "webcolor/common.hpp"

namespace webcolor {

/// A decoded page screenshot, row-major, origin top-left.
struct PageImage {
  int width = 0;
  int height = 0;
  std::vector<ColorRGB> pixels;
  std::string url;

  const ColorRGB& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  ColorRGB& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

inline PageImage make_image(int width, int height, ColorRGB fill = {1, 1, 1}) {
  if (width < 1 || height < 1) throw Error("BadImageSize", "image dimensions must be >= 1");
  PageImage img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(width) * height, fill);
  return img;
}

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace detail

/// Decodes an 8-bit PNG (gray/palette/RGB/RGBA all normalized to RGB; alpha
/// is composited over white). Throws UndecodableImage on anything libpng
/// rejects.
inline PageImage load_png(const std::string& path) {
  detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error("UndecodableImage", "cannot open " + path);

  png_byte header[8];
  if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
    throw Error("UndecodableImage", "not a PNG file: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("UndecodableImage", "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("UndecodableImage", "libpng init failed");
  }

  std::vector<png_byte> data;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("UndecodableImage", "PNG decode failed: " + path);
  }

  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  png_set_expand(png);
  png_set_strip_16(png);
  png_set_gray_to_rgb(png);
  png_set_add_alpha(png, 0xFF, PNG_FILLER_AFTER);
  png_read_update_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  data.resize(stride * h);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = data.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  PageImage img = make_image(static_cast<int>(w), static_cast<int>(h));
  for (png_uint_32 y = 0; y < h; ++y) {
    const png_byte* row = data.data() + y * stride;
    for (png_uint_32 x = 0; x < w; ++x) {
      double r = row[4 * x + 0] / 255.0;
      double g = row[4 * x + 1] / 255.0;
      double b = row[4 * x + 2] / 255.0;
      double a = row[4 * x + 3] / 255.0;
      // Composite over white.
      img.at(static_cast<int>(x), static_cast<int>(y)) = {
          r * a + (1.0 - a), g * a + (1.0 - a), b * a + (1.0 - a)};
    }
  }
  return img;
}

/// Writes an 8-bit RGB PNG. Channels are clamped to [0,1] and rounded.
inline void save_png(const PageImage& img, const std::string& path) {
  detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error("FileWrite", "cannot open " + path + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("FileWrite", "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("FileWrite", "libpng init failed");
  }

  std::vector<png_byte> row(static_cast<std::size_t>(img.width) * 3);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("FileWrite", "PNG encode failed: " + path);
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  auto to_byte = [](double v) {
    return static_cast<png_byte>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  };
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const ColorRGB& c = img.at(x, y);
      row[3 * x + 0] = to_byte(c.r);
      row[3 * x + 1] = to_byte(c.g);
      row[3 * x + 2] = to_byte(c.b);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

/// Nearest-neighbor resize. Archive snapshots of one URL often differ by a
/// few pixels; block correspondence needs a common grid.
inline PageImage resize_nearest(const PageImage& src, int width, int height) {
  if (src.width == width && src.height == height) return src;
  PageImage out = make_image(width, height);
  out.url = src.url;
  for (int y = 0; y < height; ++y) {
    int sy = std::min(static_cast<int>((static_cast<long long>(y) * src.height) / height),
                      src.height - 1);
    for (int x = 0; x < width; ++x) {
      int sx = std::min(static_cast<int>((static_cast<long long>(x) * src.width) / width),
                        src.width - 1);
      out.at(x, y) = src.at(sx, sy);
    }
  }
  return out;
}

/// A sequence of same-URL screenshots; the first image is the page under
/// assessment and defines the common dimensions.
struct SnapshotSet {
  std::string url;
  std::vector<PageImage> images;

  std::size_t count() const noexcept { return images.size(); }
  const PageImage& first() const { return images.front(); }
};

/// Loads every *.png in the directory, lexicographic filename order giving
/// temporal order. Later images are resized to the first one's dimensions.
inline SnapshotSet load_snapshot_set(const std::string& directory) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(directory))
    throw Error("EmptyDirectory", "not a directory: " + directory);

  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty())
    throw Error("EmptyDirectory", "no PNG files in " + directory);

  SnapshotSet set;
  set.images.resize(paths.size());
  std::vector<std::string> errors(paths.size());
  parallel_for(paths.size(), [&](std::size_t i) {
    try {
      set.images[i] = load_png(paths[i]);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < paths.size(); ++i)
    if (!errors[i].empty()) throw Error("UndecodableImage", errors[i]);

  for (std::size_t i = 1; i < set.images.size(); ++i)
    set.images[i] = resize_nearest(set.images[i], set.images[0].width, set.images[0].height);
  return set;
}

struct BlockRect {
  int x = 0, y = 0, w = 0, h = 0;
};

/// n1 x n2 rectangles tiling an image, row-major (iy * n1 + ix). When the
/// dimensions do not divide evenly the remainder goes to the last column/row.
struct BlockGrid {
  int n1 = 0;                    // blocks along width
  int n2 = 0;                    // blocks along height
  int width = 0, height = 0;
  std::vector<BlockRect> block_rects;

  int block_count() const noexcept { return n1 * n2; }
  const BlockRect& rect(int ix, int iy) const { return block_rects[static_cast<std::size_t>(iy) * n1 + ix]; }

  /// Index of the block containing pixel (x, y).
  int block_index_at(int x, int y) const {
    int bw = width / n1, bh = height / n2;
    int ix = std::min(x / bw, n1 - 1);
    int iy = std::min(y / bh, n2 - 1);
    return iy * n1 + ix;
  }
};

inline BlockGrid partition_blocks(const PageImage& image, int n1, int n2) {
  if (n1 < 1 || n2 < 1 || n1 > image.width || n2 > image.height)
    throw Error("GridTooFine", "grid " + std::to_string(n1) + "x" + std::to_string(n2) +
                                   " does not fit a " + std::to_string(image.width) + "x" +
                                   std::to_string(image.height) + " image");
  BlockGrid grid;
  grid.n1 = n1;
  grid.n2 = n2;
  grid.width = image.width;
  grid.height = image.height;
  grid.block_rects.reserve(static_cast<std::size_t>(n1) * n2);
  int bw = image.width / n1;
  int bh = image.height / n2;
  for (int iy = 0; iy < n2; ++iy) {
    int y = iy * bh;
    int h = iy == n2 - 1 ? image.height - y : bh;
    for (int ix = 0; ix < n1; ++ix) {
      int x = ix * bw;
      int w = ix == n1 - 1 ? image.width - x : bw;
      grid.block_rects.push_back({x, y, w, h});
    }
  }
  return grid;
}

} // namespace webcolor
