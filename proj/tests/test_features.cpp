#include <fstream>

#include <catch2/catch_amalgamated.hpp>

#include "support/temp_dir.hpp"
#include "webcolor/dataset.hpp"
#include "webcolor/features.hpp"

using namespace webcolor;

namespace {

ColorTheme monochrome_theme(ColorRGB c) {
  return ColorTheme({c, c, c, c, c}, {0.2, 0.2, 0.2, 0.2, 0.2});
}

double value_of(const FeatureVector& fv, const std::string& name) {
  const auto& names = feature_schema();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return fv.values[i];
  throw std::runtime_error("no such feature: " + name);
}

} // namespace

TEST_CASE("schema and vector lengths agree", "[features]") {
  CHECK(feature_dimension() == feature_schema().size());
  FeatureVector fv = extract_features(monochrome_theme({0.5, 0.5, 0.5}));
  CHECK(fv.values.size() == feature_dimension());
  CHECK(fv.schema_version == kFeatureSchemaVersion);
}

TEST_CASE("monochrome theme: zero spreads everywhere", "[features]") {
  FeatureVector fv = extract_features(monochrome_theme({0.3, 0.6, 0.8}));
  for (const char* name :
       {"RGB.r.adjacent_diff.0", "RGB.g.sorted_adjacent_diff.0", "CIELab.L.stddev",
        "CIELab.a.range", "HSV.s.adjacent_diff.2", "CHSV.v.stddev"})
    CHECK(value_of(fv, name) == Catch::Approx(0.0).margin(1e-12));
  CHECK(value_of(fv, "RGB.plane.sse") == Catch::Approx(0.0).margin(1e-12));
  CHECK(value_of(fv, "CIELab.plane.sse") == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("degenerate proportions pick out the first color's channel values", "[features]") {
  std::array<ColorRGB, 5> colors = {{{0.9, 0.2, 0.1}, {0.1, 0.8, 0.3}, {0.2, 0.3, 0.7},
                                     {0.5, 0.5, 0.5}, {0.0, 0.0, 0.0}}};
  ColorTheme theme(colors, {1, 0, 0, 0, 0});
  FeatureVector fv = extract_features(theme);
  CHECK(value_of(fv, "RGB.r.weighted_mean") == Catch::Approx(0.9));
  CHECK(value_of(fv, "RGB.g.weighted_mean") == Catch::Approx(0.2));
  CHECK(value_of(fv, "RGB.b.weighted_mean") == Catch::Approx(0.1));
}

TEST_CASE("feature vector matches the independently generated golden file", "[features][oracle]") {
  std::ifstream in(std::string(WEBCOLOR_TEST_DATA_DIR) + "/golden_features.json");
  REQUIRE(in.good());
  nlohmann::json golden = nlohmann::json::parse(in);
  ColorTheme theme = ColorTheme::from_json(golden.at("theme"));
  FeatureVector fv = extract_features(theme);

  auto names = golden.at("names").get<std::vector<std::string>>();
  auto values = golden.at("values").get<std::vector<double>>();
  REQUIRE(names == feature_schema());
  REQUIRE(values.size() == fv.values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    INFO("dimension " << i << " (" << names[i] << ")");
    CHECK(fv.values[i] == Catch::Approx(values[i]).margin(1e-9));
  }
}

TEST_CASE("extraction is byte-deterministic", "[features]") {
  std::array<ColorRGB, 5> colors = {{{0.91, 0.13, 0.21}, {0.18, 0.74, 0.32}, {0.22, 0.31, 0.86},
                                     {0.95, 0.88, 0.12}, {0.43, 0.09, 0.58}}};
  ColorTheme theme(colors, {0.32, 0.26, 0.18, 0.14, 0.10});
  FeatureVector a = extract_features(theme);
  FeatureVector b = extract_features(theme);
  CHECK(a.values == b.values);
}

TEST_CASE("sorted difference features are reversal-invariant", "[features][property]") {
  std::mt19937_64 gen = rng::substream(53, "reversal");
  for (int trial = 0; trial < 20; ++trial) {
    std::array<ColorRGB, 5> colors;
    std::array<double, 5> props;
    for (int i = 0; i < 5; ++i) {
      colors[i] = {rng::uniform01(gen), rng::uniform01(gen), rng::uniform01(gen)};
      props[i] = 0.1 + rng::uniform01(gen);
    }
    std::array<ColorRGB, 5> reversed_colors;
    std::array<double, 5> reversed_props;
    for (int i = 0; i < 5; ++i) {
      reversed_colors[i] = colors[4 - i];
      reversed_props[i] = props[4 - i];
    }
    FeatureVector fwd = extract_features(ColorTheme(colors, props));
    FeatureVector rev = extract_features(ColorTheme(reversed_colors, reversed_props));
    const auto& names = feature_schema();
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i].find("sorted_adjacent_diff") == std::string::npos) continue;
      INFO(names[i]);
      CHECK(fwd.values[i] == Catch::Approx(rev.values[i]).margin(1e-12));
    }
  }
}

TEST_CASE("hue statistics are circular", "[features]") {
  // Hues straddling the wrap point: 350deg and 10deg are 20deg apart.
  ColorRGB a = hsv_to_rgb(350.0, 1.0, 1.0);
  ColorRGB b = hsv_to_rgb(10.0, 1.0, 1.0);
  ColorTheme theme({a, b, a, b, a}, {0.2, 0.2, 0.2, 0.2, 0.2});
  FeatureVector fv = extract_features(theme);
  CHECK(value_of(fv, "HSV.h.adjacent_diff.0") == Catch::Approx(20.0 / 360.0).margin(1e-9));
  // Circular mean of {350, 10, 350, 10, 350} degrees is 358 degrees.
  CHECK(value_of(fv, "HSV.h.mean") == Catch::Approx(358.0 / 360.0).margin(1e-9));
}

TEST_CASE("feature-rating correlation ranks exact matches first", "[features]") {
  std::mt19937_64 gen = rng::substream(59, "corr");
  Eigen::MatrixXd X(30, 3);
  for (Eigen::Index i = 0; i < 30; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) X(i, j) = rng::uniform01(gen);
  X.col(2).setConstant(4.2);  // constant feature
  Eigen::VectorXd y = X.col(1);

  auto ranked = feature_rating_correlation(X, y, {"f0", "f1", "f2"});
  CHECK(ranked[0].name == "f1");
  CHECK(ranked[0].r == Catch::Approx(1.0).margin(1e-12));
  CHECK(std::string(ranked[0].sign()) == "positive");
  for (const auto& fc : ranked)
    if (fc.name == "f2") CHECK(fc.r == 0.0);
}

TEST_CASE("correlation matches a hand-computed fixture", "[features][oracle]") {
  Eigen::MatrixXd X(4, 2);
  X << 1, 2, 2, 1, 3, 4, 4, 3;
  Eigen::VectorXd y(4);
  y << 2, 4, 6, 8;
  // By hand: x0 = (1,2,3,4), y = 2*x0 -> r = 1. x1 = (2,1,4,3): cov(x1,y)=4,
  // sd(x1)=sqrt(1.25), sd(y)=sqrt(5), r = (4/4)/(sqrt(1.25)*sqrt(5)) = 0.4.
  auto ranked = feature_rating_correlation(X, y, {"x0", "x1"});
  CHECK(ranked[0].name == "x0");
  CHECK(ranked[0].r == Catch::Approx(1.0).margin(1e-12));
  CHECK(ranked[1].r == Catch::Approx(0.4).margin(1e-12));
}

TEST_CASE("negative correlation is labeled negative", "[features]") {
  Eigen::MatrixXd X(5, 1);
  X << 1, 2, 3, 4, 5;
  Eigen::VectorXd y(5);
  y << 10, 8, 6, 4, 2;
  auto ranked = feature_rating_correlation(X, y, {"x"});
  CHECK(ranked[0].r == Catch::Approx(-1.0).margin(1e-12));
  CHECK(std::string(ranked[0].sign()) == "negative");
}

TEST_CASE("dataset CSV round trip preserves schema and values", "[features]") {
  testutil::TempDir dir;
  std::array<ColorRGB, 5> colors = {{{0.91, 0.13, 0.21}, {0.18, 0.74, 0.32}, {0.22, 0.31, 0.86},
                                     {0.95, 0.88, 0.12}, {0.43, 0.09, 0.58}}};
  FeatureVector fv = extract_features(ColorTheme(colors, {0.3, 0.25, 0.2, 0.15, 0.1}));

  Dataset ds;
  ds.feature_names = feature_schema();
  ds.X.resize(2, static_cast<Eigen::Index>(fv.values.size()));
  for (int r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < fv.values.size(); ++c)
      ds.X(r, static_cast<Eigen::Index>(c)) = fv.values[c] * (r + 1);
  ds.y.resize(2);
  ds.y << 3.5, 4.25;

  save_dataset_csv(ds, dir.file("data.csv"));
  Dataset back = load_dataset_csv(dir.file("data.csv"));
  CHECK(back.schema_version == kFeatureSchemaVersion);
  CHECK(back.labeled());
  CHECK(back.y[1] == 4.25);
  CHECK((back.X - ds.X).cwiseAbs().maxCoeff() == 0.0);  // %.17g is lossless

  SECTION("unlabeled CSV loads as target data") {
    Dataset tgt = ds;
    tgt.y.resize(0);
    save_dataset_csv(tgt, dir.file("target.csv"));
    Dataset back2 = load_dataset_csv(dir.file("target.csv"));
    CHECK_FALSE(back2.labeled());
    CHECK(back2.X.rows() == 2);
  }
}
