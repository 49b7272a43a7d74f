#include <catch2/catch_amalgamated.hpp>

#include "webcolor/color.hpp"

using namespace webcolor;

namespace {

ColorRGB random_rgb(std::mt19937_64& gen) {
  return {rng::uniform01(gen), rng::uniform01(gen), rng::uniform01(gen)};
}

} // namespace

TEST_CASE("white and black map to the Lab axis endpoints", "[color]") {
  ColorCoords white = to_lab({1, 1, 1});
  CHECK(white.c1 == Catch::Approx(100.0).margin(1e-9));
  CHECK(white.c2 == Catch::Approx(0.0).margin(1e-9));
  CHECK(white.c3 == Catch::Approx(0.0).margin(1e-9));
  ColorCoords black = to_lab({0, 0, 0});
  CHECK(black.c1 == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("frozen Lab regression fixtures", "[color]") {
  // Values computed by an independent reference script.
  ColorCoords lab = to_lab({0.5, 0.25, 0.1});
  CHECK(lab.c1 == Catch::Approx(34.524369575205).margin(1e-9));
  CHECK(lab.c2 == Catch::Approx(24.610425028906).margin(1e-9));
  CHECK(lab.c3 == Catch::Approx(34.582237531841).margin(1e-9));

  ColorCoords red = to_lab({1, 0, 0});
  CHECK(red.c1 == Catch::Approx(53.240791833281).margin(1e-9));
  CHECK(red.c2 == Catch::Approx(80.092469544800).margin(1e-9));
  CHECK(red.c3 == Catch::Approx(67.203192536497).margin(1e-9));
}

TEST_CASE("pure red in HSV and CHSV", "[color]") {
  ColorCoords hsv = convert_color({1, 0, 0}, ColorSpace::HSV);
  CHECK(hsv.c1 == Catch::Approx(0.0));
  CHECK(hsv.c2 == Catch::Approx(1.0));
  CHECK(hsv.c3 == Catch::Approx(1.0));

  ColorCoords chsv = convert_color({1, 0, 0}, ColorSpace::CHSV);
  CHECK(chsv.c1 == Catch::Approx(1.0));
  CHECK(chsv.c2 == Catch::Approx(0.0).margin(1e-12));
  CHECK(chsv.c3 == Catch::Approx(1.0));
}

TEST_CASE("gray pixels get hue zero", "[color]") {
  ColorCoords hsv = to_hsv({0.4, 0.4, 0.4});
  CHECK(hsv.c1 == 0.0);
  CHECK(hsv.c2 == 0.0);
}

TEST_CASE("RGB-HSV round trip on random non-gray colors", "[color][property]") {
  std::mt19937_64 gen = rng::substream(7, "color-roundtrip");
  for (int i = 0; i < 500; ++i) {
    ColorRGB c = random_rgb(gen);
    ColorCoords hsv = to_hsv(c);
    if (hsv.c2 < 1e-6) continue;  // gray: hue is canonicalized, not preserved
    ColorRGB back = hsv_to_rgb(hsv.c1, hsv.c2, hsv.c3);
    CHECK(back.r == Catch::Approx(c.r).margin(1e-6));
    CHECK(back.g == Catch::Approx(c.g).margin(1e-6));
    CHECK(back.b == Catch::Approx(c.b).margin(1e-6));
  }
}

TEST_CASE("Lab round trip through the inverse conversion", "[color][property]") {
  std::mt19937_64 gen = rng::substream(11, "lab-roundtrip");
  for (int i = 0; i < 200; ++i) {
    ColorRGB c = random_rgb(gen);
    ColorRGB back = lab_to_rgb(lab_vec(c));
    CHECK(delta_e(c, back) < 1e-6);
  }
}

TEST_CASE("delta_e basics", "[color]") {
  CHECK(delta_e({0.3, 0.6, 0.9}, {0.3, 0.6, 0.9}) == 0.0);
  CHECK(delta_e({0, 0, 0}, {1, 1, 1}) == Catch::Approx(100.0).margin(1e-9));
  // Frozen from the reference conversion fixtures.
  CHECK(delta_e({1, 0, 0}, {0, 0, 1}) == Catch::Approx(176.31403782618952).margin(1e-9));
}

TEST_CASE("delta_e is symmetric and satisfies the triangle inequality", "[color][property]") {
  std::mt19937_64 gen = rng::substream(13, "delta-e");
  for (int i = 0; i < 300; ++i) {
    ColorRGB a = random_rgb(gen), b = random_rgb(gen), c = random_rgb(gen);
    double ab = delta_e(a, b), ba = delta_e(b, a);
    CHECK(ab == Catch::Approx(ba).margin(1e-12));
    CHECK(delta_e(a, c) <= ab + delta_e(b, c) + 1e-12);
  }
}

TEST_CASE("theme proportions normalize and validate", "[color]") {
  std::array<ColorRGB, 5> colors{};
  ColorTheme theme(colors, {2, 1, 1, 0, 0}, "t");
  double sum = 0.0;
  for (double p : theme.proportions()) sum += p;
  CHECK(sum == Catch::Approx(1.0).margin(1e-9));
  CHECK(theme.proportions()[0] == Catch::Approx(0.5));

  CHECK_THROWS_AS(ColorTheme(colors, {1, 1, 1, 1, -0.1}), Error);
  CHECK_THROWS_AS(ColorTheme(colors, {0, 0, 0, 0, 0}), Error);
}

TEST_CASE("theme JSON round trip", "[color]") {
  std::array<ColorRGB, 5> colors{{{0.1, 0.2, 0.3}, {1, 1, 1}, {0, 0, 0}, {0.5, 0.5, 0.5}, {0.9, 0.1, 0.4}}};
  ColorTheme theme(colors, {0.3, 0.3, 0.2, 0.1, 0.1}, "page-1");
  ColorTheme back = ColorTheme::from_json(theme.to_json());
  CHECK(back.source_id() == "page-1");
  for (int i = 0; i < 5; ++i) {
    CHECK(back.colors()[i] == theme.colors()[i]);
    CHECK(back.proportions()[i] == Catch::Approx(theme.proportions()[i]).margin(1e-15));
  }
}
