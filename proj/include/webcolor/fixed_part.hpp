#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <json.hpp>

#include "webcolor/common.hpp"
#include "webcolor/histogram.hpp"
#include "webcolor/image.hpp"

namespace webcolor {

/// Per-block average similarity of the first snapshot against the rest,
/// min-max normalized into [0,1]. High values mark the fixed part.
struct SimilarityGrid {
  int n1 = 0;
  int n2 = 0;
  std::vector<double> values;

  double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * n1 + ix]; }

  nlohmann::json to_json() const { return {{"n1", n1}, {"n2", n2}, {"values", values}}; }

  static SimilarityGrid from_json(const nlohmann::json& j) {
    SimilarityGrid g;
    g.n1 = j.at("n1").get<int>();
    g.n2 = j.at("n2").get<int>();
    g.values = j.at("values").get<std::vector<double>>();
    return g;
  }
};

/// How often each block was drawn. The per-pixel clustering weight w_i is
/// the count of the block containing pixel i.
struct SampledBlocks {
  int n1 = 0;
  int n2 = 0;
  int width = 0;
  int height = 0;
  std::int64_t draws = 0;
  std::vector<std::int64_t> counts;

  std::int64_t count_at_pixel(int x, int y) const {
    int bw = width / n1, bh = height / n2;
    int ix = std::min(x / bw, n1 - 1);
    int iy = std::min(y / bh, n2 - 1);
    return counts[static_cast<std::size_t>(iy) * n1 + ix];
  }

  nlohmann::json to_json() const {
    return {{"n1", n1},         {"n2", n2},   {"width", width},
            {"height", height}, {"draws", draws}, {"counts", counts}};
  }

  static SampledBlocks from_json(const nlohmann::json& j) {
    SampledBlocks s;
    s.n1 = j.at("n1").get<int>();
    s.n2 = j.at("n2").get<int>();
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
    s.draws = j.at("draws").get<std::int64_t>();
    s.counts = j.at("counts").get<std::vector<std::int64_t>>();
    return s;
  }
};

/// Every block drawn once; the no-locator path for single images.
inline SampledBlocks uniform_sampled_blocks(const BlockGrid& grid) {
  SampledBlocks s;
  s.n1 = grid.n1;
  s.n2 = grid.n2;
  s.width = grid.width;
  s.height = grid.height;
  s.counts.assign(static_cast<std::size_t>(grid.block_count()), 1);
  s.draws = grid.block_count();
  return s;
}

struct SimilarityOptions {
  int bins_per_axis = 4;
  // The raw exp(-d) form saturates to 0 for Lab-scale EMD values, so the
  // distance is divided by this scale first; 1 recovers the raw form.
  double emd_scale = 10.0;
};

/// For each block: exp(-emd/s) against the same block of every later
/// snapshot, averaged over the I-1 comparisons, then min-max normalized
/// over the whole grid. Blocks are processed concurrently; the output
/// layout is fixed so the reduction is deterministic.
inline SimilarityGrid block_similarity_map(const SnapshotSet& set, const BlockGrid& grid,
                                           const SimilarityOptions& options = {}) {
  if (set.count() < 2)
    throw Error("NeedsMultipleSnapshots", "block similarity needs at least 2 snapshots");

  const std::size_t blocks = static_cast<std::size_t>(grid.block_count());
  SimilarityGrid out;
  out.n1 = grid.n1;
  out.n2 = grid.n2;
  out.values.assign(blocks, 0.0);

  parallel_for(blocks, [&](std::size_t b) {
    const BlockRect& rect = grid.block_rects[b];
    ColorHistogram first = block_histogram(set.images[0], rect, options.bins_per_axis);
    double sum = 0.0;
    for (std::size_t i = 1; i < set.count(); ++i) {
      double d = emd(first, block_histogram(set.images[i], rect, options.bins_per_axis));
      sum += std::exp(-d / options.emd_scale);
    }
    out.values[b] = sum / static_cast<double>(set.count() - 1);
  });

  auto [mn, mx] = std::minmax_element(out.values.begin(), out.values.end());
  double lo = *mn, hi = *mx;
  if (hi - lo < 1e-12) {
    // Uniform similarity: every block is equally fixed.
    std::fill(out.values.begin(), out.values.end(), 1.0);
  } else {
    for (double& v : out.values) v = (v - lo) / (hi - lo);
  }
  return out;
}

/// `draws` independent draws with replacement, P(block) proportional to its
/// similarity. Inverse-CDF sampling on a 53-bit uniform keeps results
/// reproducible for a given seed.
inline SampledBlocks sample_blocks(const SimilarityGrid& sim, const BlockGrid& grid,
                                   std::int64_t draws, std::uint64_t rng_seed) {
  double total = std::accumulate(sim.values.begin(), sim.values.end(), 0.0);
  if (total <= 0.0)
    throw Error("DegenerateSimilarities", "all block similarities are zero");
  if (sim.n1 != grid.n1 || sim.n2 != grid.n2)
    throw Error("LayoutMismatch", "similarity grid does not match block grid");

  std::vector<double> cdf(sim.values.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < sim.values.size(); ++i) {
    acc += sim.values[i];
    cdf[i] = acc;
  }
  cdf.back() = total;  // guard against rounding in the last bin

  SampledBlocks out;
  out.n1 = grid.n1;
  out.n2 = grid.n2;
  out.width = grid.width;
  out.height = grid.height;
  out.draws = draws;
  out.counts.assign(sim.values.size(), 0);

  std::mt19937_64 gen = rng::substream(rng_seed, "block-sampling");
  for (std::int64_t d = 0; d < draws; ++d) {
    double u = rng::uniform(gen, total);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    ++out.counts[static_cast<std::size_t>(it - cdf.begin())];
  }
  return out;
}

/// Per-pixel channel mean across all snapshots. Temporal colors blur toward
/// their average while the fixed part is reproduced exactly.
inline PageImage synthesize_fixed_image(const SnapshotSet& set) {
  if (set.count() < 2)
    throw Error("NeedsMultipleSnapshots", "image synthesis needs at least 2 snapshots");
  const PageImage& first = set.first();
  PageImage out = make_image(first.width, first.height);
  out.url = first.url;
  const double inv = 1.0 / static_cast<double>(set.count());
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      double r = 0, g = 0, b = 0;
      for (const PageImage& img : set.images) {
        const ColorRGB& c = img.at(x, y);
        r += c.r;
        g += c.g;
        b += c.b;
      }
      out.at(x, y) = {r * inv, g * inv, b * inv};
    }
  }
  return out;
}

/// Grayscale rendering of the similarity grid at the source resolution.
inline PageImage render_similarity(const SimilarityGrid& sim, const BlockGrid& grid) {
  PageImage out = make_image(grid.width, grid.height);
  for (int iy = 0; iy < grid.n2; ++iy) {
    for (int ix = 0; ix < grid.n1; ++ix) {
      double v = sim.at(ix, iy);
      const BlockRect& r = grid.rect(ix, iy);
      for (int y = r.y; y < r.y + r.h; ++y)
        for (int x = r.x; x < r.x + r.w; ++x) out.at(x, y) = {v, v, v};
    }
  }
  return out;
}

} // namespace webcolor
