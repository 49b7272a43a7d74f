#include <catch2/catch_amalgamated.hpp>

#include "support/synth_pages.hpp"
#include "webcolor/theme_extract.hpp"

using namespace webcolor;

namespace {

double best_match_delta_e(const ColorTheme& theme, const std::array<ColorRGB, 5>& truth) {
  // Greedy is not enough for a tight bound; check all 120 matchings.
  std::array<int, 5> perm{0, 1, 2, 3, 4};
  double best = std::numeric_limits<double>::infinity();
  do {
    double worst = 0.0;
    for (int i = 0; i < 5; ++i)
      worst = std::max(worst, delta_e(theme.colors()[i], truth[perm[i]]));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

} // namespace

TEST_CASE("stripe page with uniform weights recovers the palette in order", "[theme]") {
  std::array<ColorRGB, 5> palette = {{{0.9, 0.1, 0.1}, {0.1, 0.8, 0.2}, {0.15, 0.2, 0.9},
                                      {0.95, 0.9, 0.1}, {0.1, 0.9, 0.9}}};
  PageImage img = synth::stripe_page(100, 60, palette);
  ThemeExtraction ext = extract_theme_whole(img, {.clustering = {.seed = 21}});

  // Colors match the stripes.
  CHECK(best_match_delta_e(ext.theme, palette) < 1.0);
  // And the spatial ordering reproduces left-to-right stripe order (up to
  // reversal, which the lexicographic tie-break resolves to identity).
  for (int i = 0; i < 5; ++i) CHECK(delta_e(ext.theme.colors()[i], palette[i]) < 1.0);
  for (double p : ext.theme.proportions()) CHECK(p == Catch::Approx(0.2).margin(0.01));
}

TEST_CASE("scattered noise is absorbed by the outlier term", "[theme]") {
  std::array<ColorRGB, 5> palette = {{{0.9, 0.1, 0.1}, {0.1, 0.8, 0.2}, {0.15, 0.2, 0.9},
                                      {0.95, 0.9, 0.1}, {0.1, 0.9, 0.9}}};
  PageImage img = synth::stripe_page(100, 60, palette);
  std::mt19937_64 gen = rng::substream(77, "noise");
  synth::sprinkle_noise(img, 0.005, gen);
  ThemeExtraction ext = extract_theme_whole(img, {.clustering = {.lambda = 70.0, .seed = 22}});
  CHECK(best_match_delta_e(ext.theme, palette) < 2.0);
}

TEST_CASE("an all-white page collapses to five coincident centroids", "[theme]") {
  PageImage img = make_image(20, 20, {1, 1, 1});
  ThemeExtraction ext = extract_theme_whole(img, {.clustering = {.seed = 2}});
  double sum = 0.0;
  for (int i = 0; i < 5; ++i) {
    CHECK(delta_e(ext.theme.colors()[i], {1, 1, 1}) < 1e-6);
    sum += ext.theme.proportions()[i];
  }
  CHECK(sum == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("too few weighted pixels is an error", "[theme]") {
  PageImage img = make_image(2, 2);
  BlockGrid grid = partition_blocks(img, 1, 1);
  try {
    extract_theme(img, uniform_sampled_blocks(grid), {});
    FAIL("expected TooFewPoints");
  } catch (const Error& e) {
    CHECK(e.code() == "TooFewPoints");
  }
}

TEST_CASE("order search: equally spaced line wins with the identity", "[theme]") {
  std::array<Eigen::Vector2d, 5> pos;
  for (int i = 0; i < 5; ++i) pos[i] = {static_cast<double>(i) * 10.0, 0.0};
  std::array<int, 5> perm = order_theme(pos);
  for (int i = 0; i < 5; ++i) CHECK(perm[i] == i);
}

TEST_CASE("order search: coincident positions fall back to the identity", "[theme]") {
  std::array<Eigen::Vector2d, 5> pos;
  pos.fill({3.0, 4.0});
  std::array<int, 5> perm = order_theme(pos);
  for (int i = 0; i < 5; ++i) CHECK(perm[i] == i);
}

TEST_CASE("order search matches an independently written evaluator", "[theme][oracle]") {
  std::mt19937_64 gen = rng::substream(41, "order");
  for (int trial = 0; trial < 20; ++trial) {
    std::array<Eigen::Vector2d, 5> pos;
    for (auto& p : pos) p = {rng::uniform01(gen) * 100, rng::uniform01(gen) * 100};

    // Second evaluator, written against the objective definition directly.
    double max_d = 0.0;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) max_d = std::max(max_d, (pos[i] - pos[j]).norm());
    std::array<int, 5> best{};
    double best_obj = std::numeric_limits<double>::infinity();
    std::array<int, 5> perm{0, 1, 2, 3, 4};
    do {
      double obj = 0.0;
      for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j) {
          double want = max_d > 0 ? (pos[i] - pos[j]).norm() / max_d : 0.0;
          double got = std::abs(perm[i] - perm[j]) / 4.0;
          obj += (got - want) * (got - want);
        }
      if (obj < best_obj) {
        best_obj = obj;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));

    CHECK(order_theme(pos) == best);
  }
}

TEST_CASE("order search is invariant under uniform position scaling", "[theme][property]") {
  std::mt19937_64 gen = rng::substream(43, "order-scale");
  for (int trial = 0; trial < 10; ++trial) {
    std::array<Eigen::Vector2d, 5> pos, scaled;
    for (int i = 0; i < 5; ++i) {
      pos[i] = {rng::uniform01(gen) * 40, rng::uniform01(gen) * 40};
      scaled[i] = pos[i] * 37.5;
    }
    CHECK(order_theme(pos) == order_theme(scaled));
  }
}

TEST_CASE("aCS basics", "[theme]") {
  std::array<ColorRGB, 5> colors = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}, {0, 0, 0}}};
  ColorTheme theme(colors, {0.2, 0.2, 0.2, 0.2, 0.2});

  SECTION("pixels equal to theme colors score zero") {
    std::vector<Eigen::Vector3d> pixels;
    for (const auto& c : colors) pixels.push_back(lab_vec(c));
    CHECK(acs(pixels, theme) == Catch::Approx(0.0).margin(1e-12));
  }

  SECTION("one pixel at distance 5 scores 1.0") {
    Eigen::Vector3d p = lab_vec(colors[4]);  // black: L=0
    p.x() += 5.0;                            // distance 5 to black, far from others
    CHECK(acs({p}, theme) == Catch::Approx(1.0).margin(1e-9));
  }

  SECTION("empty pixel set is an error") {
    try {
      acs({}, theme);
      FAIL("expected EmptyPixelSet");
    } catch (const Error& e) {
      CHECK(e.code() == "EmptyPixelSet");
    }
  }

  SECTION("permutation of theme slots does not change aCS") {
    std::mt19937_64 gen = rng::substream(47, "acs");
    std::vector<Eigen::Vector3d> pixels;
    for (int i = 0; i < 50; ++i)
      pixels.emplace_back(rng::uniform01(gen) * 100, rng::uniform01(gen) * 60 - 30,
                          rng::uniform01(gen) * 60 - 30);
    std::array<ColorRGB, 5> shuffled = {colors[3], colors[0], colors[4], colors[2], colors[1]};
    ColorTheme other(shuffled, {0.2, 0.2, 0.2, 0.2, 0.2});
    CHECK(acs(pixels, theme) == Catch::Approx(acs(pixels, other)).margin(1e-12));
  }
}

TEST_CASE("located robust theme beats whole-page k-means on a banner page", "[theme]") {
  synth::BannerPage page = synth::banner_page(123);
  const PageImage& img = page.set.first();
  BlockGrid grid = partition_blocks(img, 16, 16);
  SimilarityGrid sim = block_similarity_map(page.set, grid);
  SampledBlocks sampled = sample_blocks(sim, grid, grid.block_count(), 55);

  ThemeExtraction located = extract_theme(img, sampled, {.clustering = {.seed = 60}});

  // Plain k-means over the full page, banner included.
  WeightedPoints all;
  std::vector<Eigen::Vector2d> pos;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      all.points.push_back(lab_vec(img.at(x, y)));
      all.weights.push_back(1.0);
      pos.emplace_back(x, y);
    }
  ClusteringResult plain = weighted_kmeans(all, 5, {.restarts = 5, .seed = 60});
  std::array<ColorRGB, 5> plain_colors;
  std::array<double, 5> plain_props{};
  std::vector<double> wsum(5, 0.0);
  for (int a : plain.assignments) wsum[static_cast<std::size_t>(a)] += 1.0;
  for (int k = 0; k < 5; ++k) {
    plain_colors[k] = lab_to_rgb(plain.centroids[k]);
    plain_props[k] = wsum[k] / static_cast<double>(all.size());
  }
  ColorTheme plain_theme(plain_colors, plain_props);

  std::vector<Eigen::Vector3d> fixed = page.fixed_pixels(2);
  CHECK(acs(fixed, located.theme) < acs(fixed, plain_theme));
}
