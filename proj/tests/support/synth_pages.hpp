#pragma once

// Synthetic page builders shared by the unit and acceptance suites: stripe
// pages with known palettes, and snapshot sets where a banner region
// changes per snapshot while the rest of the page stays fixed.

#include <array>
#include <vector>

#include "webcolor/color.hpp"
#include "webcolor/common.hpp"
#include "webcolor/image.hpp"

namespace synth {

using webcolor::ColorRGB;
using webcolor::PageImage;
using webcolor::SnapshotSet;

inline ColorRGB random_color(std::mt19937_64& gen) {
  return {webcolor::rng::uniform01(gen), webcolor::rng::uniform01(gen),
          webcolor::rng::uniform01(gen)};
}

/// Rejection-samples a color at least `min_de` away from everything in
/// `existing`.
inline ColorRGB separated_color(std::mt19937_64& gen, const std::vector<ColorRGB>& existing,
                                double min_de) {
  for (int tries = 0; tries < 10000; ++tries) {
    ColorRGB c = random_color(gen);
    bool ok = true;
    for (const ColorRGB& e : existing)
      if (webcolor::delta_e(c, e) < min_de) {
        ok = false;
        break;
      }
    if (ok) return c;
  }
  throw std::runtime_error("could not sample a separated color");
}

inline std::array<ColorRGB, 5> random_palette(std::mt19937_64& gen, double min_de = 25.0) {
  std::vector<ColorRGB> chosen;
  for (int i = 0; i < 5; ++i) chosen.push_back(separated_color(gen, chosen, min_de));
  return {chosen[0], chosen[1], chosen[2], chosen[3], chosen[4]};
}

/// Five equal vertical stripes, left to right in palette order.
inline PageImage stripe_page(int width, int height, const std::array<ColorRGB, 5>& palette) {
  PageImage img = webcolor::make_image(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      img.at(x, y) = palette[std::min(x * 5 / width, 4)];
  return img;
}

/// Replaces `fraction` of the pixels with random colors.
inline void sprinkle_noise(PageImage& img, double fraction, std::mt19937_64& gen) {
  auto n = static_cast<std::size_t>(fraction * img.pixels.size());
  for (std::size_t i = 0; i < n; ++i) {
    auto x = static_cast<int>(gen() % static_cast<std::uint64_t>(img.width));
    auto y = static_cast<int>(gen() % static_cast<std::uint64_t>(img.height));
    img.at(x, y) = random_color(gen);
  }
}

struct BannerPage {
  SnapshotSet set;                  // I snapshots; banner differs per snapshot
  std::array<ColorRGB, 5> palette;  // fixed-part palette
  int banner_x0, banner_y0, banner_x1, banner_y1;  // pixel bounds, half-open

  bool in_banner(int x, int y) const {
    return x >= banner_x0 && x < banner_x1 && y >= banner_y0 && y < banner_y1;
  }

  /// Lab points of the fixed (non-banner) region of the first snapshot.
  std::vector<Eigen::Vector3d> fixed_pixels(int stride = 1) const {
    std::vector<Eigen::Vector3d> out;
    const PageImage& img = set.first();
    for (int y = 0; y < img.height; y += stride)
      for (int x = 0; x < img.width; x += stride)
        if (!in_banner(x, y)) out.push_back(webcolor::lab_vec(img.at(x, y)));
    return out;
  }
};

/// A stripe page whose central banner region is filled with a different
/// well-separated solid color in every snapshot.
inline BannerPage banner_page(std::uint64_t seed, int width = 160, int height = 160,
                              int snapshots = 5) {
  std::mt19937_64 gen = webcolor::rng::substream(seed, "synth-banner");
  BannerPage page;
  page.palette = random_palette(gen);
  page.banner_x0 = width / 4;
  page.banner_x1 = 3 * width / 4;
  page.banner_y0 = height / 4;
  page.banner_y1 = height / 2;

  std::vector<ColorRGB> avoid(page.palette.begin(), page.palette.end());
  PageImage base = stripe_page(width, height, page.palette);
  for (int i = 0; i < snapshots; ++i) {
    ColorRGB banner = separated_color(gen, avoid, 20.0);
    avoid.push_back(banner);
    PageImage snap = base;
    for (int y = page.banner_y0; y < page.banner_y1; ++y)
      for (int x = page.banner_x0; x < page.banner_x1; ++x) snap.at(x, y) = banner;
    page.set.images.push_back(std::move(snap));
  }
  return page;
}

} // namespace synth
