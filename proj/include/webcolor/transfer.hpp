#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "webcolor/common.hpp"
#include "webcolor/ensemble.hpp"
#include "webcolor/features.hpp"
#include "webcolor/fixed_part.hpp"
#include "webcolor/image.hpp"
#include "webcolor/theme_extract.hpp"

namespace webcolor {

enum class MaskSource { Manual, BlockSampling, Synthesized, Full };

/// Per-pixel fixed-part flag for a page.
struct FixedPartMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> fixed;
  MaskSource source = MaskSource::Manual;

  bool at(int x, int y) const { return fixed[static_cast<std::size_t>(y) * width + x] != 0; }

  std::size_t fixed_count() const {
    std::size_t n = 0;
    for (auto f : fixed) n += f != 0;
    return n;
  }
};

/// White (luminance > 0.5) marks the fixed part.
inline FixedPartMask mask_from_image(const PageImage& image) {
  FixedPartMask mask;
  mask.width = image.width;
  mask.height = image.height;
  mask.source = MaskSource::Manual;
  mask.fixed.resize(image.pixels.size());
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const ColorRGB& c = image.pixels[i];
    mask.fixed[i] = (c.r + c.g + c.b) / 3.0 > 0.5 ? 1 : 0;
  }
  if (mask.fixed_count() == 0) throw Error("EmptyMask", "mask has no fixed pixels");
  return mask;
}

/// Blocks with a positive sample count become the fixed part.
inline FixedPartMask mask_from_sampled_blocks(const SampledBlocks& sampled) {
  FixedPartMask mask;
  mask.width = sampled.width;
  mask.height = sampled.height;
  mask.source = MaskSource::BlockSampling;
  mask.fixed.resize(static_cast<std::size_t>(sampled.width) * sampled.height);
  for (int y = 0; y < sampled.height; ++y)
    for (int x = 0; x < sampled.width; ++x)
      mask.fixed[static_cast<std::size_t>(y) * sampled.width + x] =
          sampled.count_at_pixel(x, y) > 0 ? 1 : 0;
  if (mask.fixed_count() == 0) throw Error("EmptyMask", "mask has no fixed pixels");
  return mask;
}

inline FixedPartMask mask_full(int width, int height) {
  FixedPartMask mask;
  mask.width = width;
  mask.height = height;
  mask.source = MaskSource::Full;
  mask.fixed.assign(static_cast<std::size_t>(width) * height, 1);
  return mask;
}

/// Per-channel Lab mean and population standard deviation.
struct LabStats {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d stddev = Eigen::Vector3d::Zero();
};

inline LabStats lab_stats(const std::vector<Eigen::Vector3d>& points) {
  if (points.empty()) throw Error("EmptyPixelSet", "no pixels to compute statistics over");
  LabStats s;
  for (const auto& p : points) s.mean += p;
  s.mean /= static_cast<double>(points.size());
  for (const auto& p : points) s.stddev += (p - s.mean).cwiseAbs2();
  s.stddev = (s.stddev / static_cast<double>(points.size())).cwiseSqrt();
  return s;
}

/// Stats implied by a theme: its colors as a distribution weighted by the
/// pixel proportions. Used for theme-only reference entries.
inline LabStats theme_stats(const ColorTheme& theme) {
  LabStats s;
  for (int k = 0; k < 5; ++k) s.mean += theme.proportions()[k] * lab_vec(theme.colors()[k]);
  for (int k = 0; k < 5; ++k)
    s.stddev += theme.proportions()[k] * (lab_vec(theme.colors()[k]) - s.mean).cwiseAbs2();
  s.stddev = s.stddev.cwiseSqrt();
  return s;
}

inline std::vector<Eigen::Vector3d> masked_lab_pixels(const PageImage& image,
                                                      const FixedPartMask& mask) {
  if (mask.width != image.width || mask.height != image.height)
    throw Error("ShapeMismatch", "mask does not match image dimensions");
  std::vector<Eigen::Vector3d> out;
  out.reserve(mask.fixed_count());
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      if (mask.at(x, y)) out.push_back(lab_vec(image.at(x, y)));
  return out;
}

/// Mapped Lab values of the masked pixels, in row-major pixel order, before
/// any gamut clipping: per channel x -> (x - mu_src) * (sigma_ref/sigma_src)
/// + mu_ref, degenerating to a pure shift where sigma_src is zero.
inline std::vector<Eigen::Vector3d> color_transfer_lab(const PageImage& source,
                                                       const FixedPartMask& mask,
                                                       const LabStats& reference) {
  std::vector<Eigen::Vector3d> pixels = masked_lab_pixels(source, mask);
  if (pixels.empty()) throw Error("EmptyMask", "mask selects no pixels");
  LabStats src = lab_stats(pixels);
  Eigen::Vector3d gain, shift;
  for (int c = 0; c < 3; ++c) {
    if (src.stddev[c] > 0.0) {
      gain[c] = reference.stddev[c] / src.stddev[c];
    } else {
      gain[c] = 1.0;  // degenerate channel: shift only
    }
    shift[c] = reference.mean[c] - gain[c] * src.mean[c];
  }
  for (auto& p : pixels) p = gain.cwiseProduct(p) + shift;
  return pixels;
}

/// Global-statistics color transfer in Lab over the masked region. Unmasked
/// pixels are returned untouched; masked results are clipped to the sRGB
/// gamut on conversion.
inline PageImage color_transfer(const PageImage& source, const FixedPartMask& mask,
                                const LabStats& reference) {
  std::vector<Eigen::Vector3d> mapped = color_transfer_lab(source, mask, reference);
  PageImage out = source;
  std::size_t next = 0;
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      if (mask.at(x, y)) out.at(x, y) = lab_to_rgb(mapped[next++]);
  return out;
}

inline PageImage color_transfer(const PageImage& source, const FixedPartMask& mask,
                                const std::vector<Eigen::Vector3d>& reference_pixels) {
  if (reference_pixels.size() < 2)
    throw Error("TooFewReferencePixels", "need at least 2 reference pixels");
  return color_transfer(source, mask, lab_stats(reference_pixels));
}

/// Mean per-slot Lab distance between two themes under the best of the 120
/// slot matchings. Used by the optional reference similarity gate.
inline double theme_distance(const ColorTheme& a, const ColorTheme& b) {
  std::array<Eigen::Vector3d, 5> la, lb;
  for (int i = 0; i < 5; ++i) {
    la[i] = lab_vec(a.colors()[i]);
    lb[i] = lab_vec(b.colors()[i]);
  }
  std::array<int, 5> perm{0, 1, 2, 3, 4};
  double best = std::numeric_limits<double>::infinity();
  do {
    double sum = 0.0;
    for (int i = 0; i < 5; ++i) sum += (la[i] - lb[perm[i]]).norm();
    best = std::min(best, sum / 5.0);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

struct ReferenceEntry {
  std::string id;
  std::string image_path;  // empty for theme-only entries
  std::string theme_path;
  std::vector<std::string> tags;
  std::optional<ColorTheme> theme;
  LabStats stats;
};

struct ReferenceCollection {
  std::vector<ReferenceEntry> entries;

  nlohmann::json manifest() const {
    nlohmann::json entries_json = nlohmann::json::array();
    for (const auto& e : entries) {
      nlohmann::json j = {{"id", e.id}, {"tags", e.tags}};
      if (!e.image_path.empty()) j["image_path"] = e.image_path;
      if (!e.theme_path.empty()) j["theme_path"] = e.theme_path;
      entries_json.push_back(j);
    }
    return {{"entries", entries_json}};
  }
};

struct CollectionOptions {
  int n1 = 40;
  int n2 = 40;
  SimilarityOptions similarity;
  ThemeExtractOptions theme;
  std::uint64_t seed = 0;
};

namespace detail {

/// Resolves one entry: theme from file when given, otherwise extracted from
/// the image (block-sampling located when a snapshot directory sits next to
/// it). The transfer statistics come from the located pixels when an image
/// is present, from the theme otherwise.
inline ReferenceEntry resolve_entry(std::string id, std::string image_path,
                                    std::string theme_path, std::vector<std::string> tags,
                                    const CollectionOptions& options) {
  namespace fs = std::filesystem;
  ReferenceEntry entry;
  entry.id = std::move(id);
  entry.image_path = std::move(image_path);
  entry.theme_path = std::move(theme_path);
  entry.tags = std::move(tags);

  ThemeExtractOptions theme_opts = options.theme;
  theme_opts.source_id = entry.id;
  theme_opts.clustering.seed = rng::substream(options.seed, "collection", rng::fnv1a(entry.id))();

  if (!entry.theme_path.empty()) {
    std::ifstream in(entry.theme_path);
    if (!in) throw Error("FileRead", "cannot open " + entry.theme_path);
    entry.theme = ColorTheme::from_json(nlohmann::json::parse(in));
  }

  if (!entry.image_path.empty()) {
    PageImage image = load_png(entry.image_path);
    fs::path snapdir = fs::path(entry.image_path).parent_path() /
                       (fs::path(entry.image_path).stem().string() + "_snapshots");
    SampledBlocks sampled;
    if (fs::is_directory(snapdir)) {
      SnapshotSet set = load_snapshot_set(snapdir.string());
      set.images.insert(set.images.begin(), image);
      BlockGrid grid = partition_blocks(image, std::min(options.n1, image.width),
                                        std::min(options.n2, image.height));
      SimilarityGrid sim = block_similarity_map(set, grid, options.similarity);
      sampled = sample_blocks(sim, grid, grid.block_count(),
                              rng::substream(options.seed, "collection-sampling",
                                             rng::fnv1a(entry.id))());
    } else {
      BlockGrid grid = partition_blocks(image, 1, 1);
      sampled = uniform_sampled_blocks(grid);
    }
    if (!entry.theme) entry.theme = extract_theme(image, sampled, theme_opts).theme;
    entry.stats = lab_stats(fixed_part_pixels(image, sampled));
  } else if (entry.theme) {
    entry.stats = theme_stats(*entry.theme);
  } else {
    throw Error("BadEntry", "entry '" + entry.id + "' has neither image nor theme");
  }
  return entry;
}

} // namespace detail

/// Scans a directory of page PNGs and/or *.theme.json files into a
/// collection. A sibling directory `<name>_snapshots/` beside an image
/// provides the temporal snapshots for block-sampling location.
inline ReferenceCollection build_collection(const std::string& directory,
                                            const CollectionOptions& options = {}) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(directory))
    throw Error("EmptyCollection", "not a directory: " + directory);

  struct Item {
    std::string id, image_path, theme_path;
  };
  std::vector<Item> items;
  for (const auto& e : fs::directory_iterator(directory)) {
    if (!e.is_regular_file()) continue;
    std::string name = e.path().filename().string();
    if (name.size() > 4 && name.ends_with(".png")) {
      items.push_back({e.path().stem().string(), e.path().string(), {}});
    } else if (name.size() > 11 && name.ends_with(".theme.json")) {
      items.push_back({name.substr(0, name.size() - 11), {}, e.path().string()});
    }
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.id < b.id; });
  if (items.empty()) throw Error("EmptyCollection", "no pages or themes in " + directory);

  ReferenceCollection collection;
  collection.entries.resize(items.size());
  std::vector<std::string> errors(items.size());
  parallel_for(items.size(), [&](std::size_t i) {
    try {
      collection.entries[i] =
          detail::resolve_entry(items[i].id, items[i].image_path, items[i].theme_path, {}, options);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  for (const auto& err : errors)
    if (!err.empty()) throw Error("BadEntry", err);
  return collection;
}

/// Loads a collection from its JSON manifest; relative paths resolve
/// against the manifest's directory.
inline ReferenceCollection load_collection(const std::string& manifest_path,
                                           const CollectionOptions& options = {}) {
  namespace fs = std::filesystem;
  std::ifstream in(manifest_path);
  if (!in) throw Error("FileRead", "cannot open " + manifest_path);
  nlohmann::json j = nlohmann::json::parse(in);
  fs::path base = fs::path(manifest_path).parent_path();

  auto resolve_path = [&](const nlohmann::json& e, const char* key) -> std::string {
    if (!e.contains(key)) return {};
    fs::path p = e.at(key).get<std::string>();
    return p.is_absolute() ? p.string() : (base / p).string();
  };

  const auto& entries = j.at("entries");
  if (entries.empty()) throw Error("EmptyCollection", manifest_path + " lists no entries");
  ReferenceCollection collection;
  collection.entries.resize(entries.size());
  std::vector<std::string> errors(entries.size());
  parallel_for(entries.size(), [&](std::size_t i) {
    try {
      const auto& e = entries[i];
      collection.entries[i] = detail::resolve_entry(
          e.at("id").get<std::string>(), resolve_path(e, "image_path"),
          resolve_path(e, "theme_path"), e.value("tags", std::vector<std::string>{}), options);
    } catch (const std::exception& ex) {
      errors[i] = ex.what();
    }
  });
  for (const auto& err : errors)
    if (!err.empty()) throw Error("BadEntry", err);
  return collection;
}

struct TransferResult {
  std::string reference_id;
  PageImage image;
  ColorTheme theme;
  double score = 0.0;
  int rank = 0;
};

struct TransferRankOptions {
  int top_n = 3;
  // Mean per-slot delta-E gate against the source theme; infinity disables.
  double filter_threshold = std::numeric_limits<double>::infinity();
  ThemeExtractOptions theme;
  std::uint64_t seed = 0;
};

struct TransferRanking {
  std::vector<TransferResult> results;  // descending score, ranks 1..N
  int skipped = 0;                      // references that failed transfer
  int filtered = 0;                     // references rejected by the gate
};

/// The application pipeline: transfer the source's fixed part toward every
/// reference, re-extract the transferred theme, score it with the model,
/// and keep the top N by score (ties broken by reference id).
inline TransferRanking transfer_and_rank(const PageImage& source, const FixedPartMask& mask,
                                         const ReferenceCollection& collection,
                                         const AssessmentModel& model,
                                         const TransferRankOptions& options = {}) {
  if (options.top_n < 1) throw Error("BadTopN", "top-N must be >= 1");
  if (collection.entries.empty()) throw Error("EmptyCollection", "no references to rank");

  std::optional<ColorTheme> source_theme;
  if (std::isfinite(options.filter_threshold)) {
    ThemeExtractOptions topts = options.theme;
    topts.clustering.seed = rng::substream(options.seed, "source-theme")();
    WeightedPoints data;
    std::vector<Eigen::Vector2d> pos;
    for (int y = 0; y < source.height; ++y)
      for (int x = 0; x < source.width; ++x)
        if (mask.at(x, y)) {
          data.points.push_back(lab_vec(source.at(x, y)));
          data.weights.push_back(1.0);
          pos.emplace_back(x, y);
        }
    source_theme = extract_theme_points(data, pos, topts).theme;
  }

  const std::size_t m = collection.entries.size();
  std::vector<std::optional<TransferResult>> slots(m);
  std::vector<char> failed(m, 0), gated(m, 0);

  parallel_for(m, [&](std::size_t i) {
    const ReferenceEntry& entry = collection.entries[i];
    try {
      if (source_theme && entry.theme &&
          theme_distance(*source_theme, *entry.theme) > options.filter_threshold) {
        gated[i] = 1;
        return;
      }
      PageImage transferred = color_transfer(source, mask, entry.stats);

      ThemeExtractOptions topts = options.theme;
      topts.source_id = entry.id;
      topts.clustering.seed = rng::substream(options.seed, "transfer-theme", rng::fnv1a(entry.id))();
      WeightedPoints data;
      std::vector<Eigen::Vector2d> pos;
      for (int y = 0; y < transferred.height; ++y)
        for (int x = 0; x < transferred.width; ++x)
          if (mask.at(x, y)) {
            data.points.push_back(lab_vec(transferred.at(x, y)));
            data.weights.push_back(1.0);
            pos.emplace_back(x, y);
          }
      ThemeExtraction extraction = extract_theme_points(data, pos, topts);
      double score = predict(model, extract_features(extraction.theme));
      slots[i] = TransferResult{entry.id, std::move(transferred), std::move(extraction.theme), score, 0};
    } catch (const std::exception&) {
      failed[i] = 1;
    }
  });

  TransferRanking ranking;
  for (std::size_t i = 0; i < m; ++i) {
    if (slots[i]) ranking.results.push_back(std::move(*slots[i]));
    ranking.skipped += failed[i];
    ranking.filtered += gated[i];
  }
  std::sort(ranking.results.begin(), ranking.results.end(),
            [](const TransferResult& a, const TransferResult& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.reference_id < b.reference_id;
            });
  for (std::size_t i = 0; i < ranking.results.size(); ++i)
    ranking.results[i].rank = static_cast<int>(i) + 1;
  if (ranking.results.size() > static_cast<std::size_t>(options.top_n))
    ranking.results.erase(ranking.results.begin() + options.top_n, ranking.results.end());
  return ranking;
}

} // namespace webcolor
