// Command-line surface for the web page color toolkit: theme extraction,
// fixed-part location, assessment-model training, scoring, and the
// transfer-and-rank application. Errors leave as machine-readable JSON on
// stderr; every random stage draws from a named sub-stream of --seed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "webcolor/webcolor.hpp"

namespace fs = std::filesystem;
using namespace webcolor;

namespace {

struct Config {
  // Grid and similarity (block-sampling location).
  int n1 = 40;
  int n2 = 40;
  int bins_per_axis = 4;
  double emd_scale = 10.0;
  std::int64_t draws = 0;  // 0: one expected draw per block (n1*n2)

  // Clustering.
  double cluster_lambda = 70.0;
  int restarts = 5;

  // Learning.
  double kmm_B = 1000.0;
  double kmm_epsilon = 1.0;
  double kmm_sigma = 0.0;  // 0: median heuristic
  double lasso_lambda = 0.1;
  int ensemble_L = 50;

  std::uint64_t seed = 1;
  int top_n = 3;
};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("FileWrite", "cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error("FileWrite", "write failed: " + path);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  write_text(path, j.dump(1) + "\n");
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("FileRead", "cannot open " + path);
  return nlohmann::json::parse(in);
}

ThemeExtractOptions theme_options(const Config& cfg, std::uint64_t stream_seed,
                                  const std::string& source_id) {
  ThemeExtractOptions opts;
  opts.clustering.lambda = cfg.cluster_lambda;
  opts.clustering.restarts = cfg.restarts;
  opts.clustering.seed = stream_seed;
  opts.source_id = source_id;
  return opts;
}

SampledBlocks locate_blocks(const SnapshotSet& set, const Config& cfg) {
  BlockGrid grid = partition_blocks(set.first(), cfg.n1, cfg.n2);
  SimilarityOptions sopts;
  sopts.bins_per_axis = cfg.bins_per_axis;
  sopts.emd_scale = cfg.emd_scale;
  SimilarityGrid sim = block_similarity_map(set, grid, sopts);
  std::int64_t draws = cfg.draws > 0 ? cfg.draws : static_cast<std::int64_t>(grid.block_count());
  return sample_blocks(sim, grid, draws, rng::substream(cfg.seed, "locator")());
}

// ---------------------------------------------------------------------------
// extract-theme

int cmd_extract_theme(const std::string& input, const std::string& locator,
                      const std::string& out_path, const std::string& swatch_path,
                      const std::string& source_id, const Config& cfg) {
  SnapshotSet set;
  if (fs::is_directory(input)) {
    set = load_snapshot_set(input);
  } else {
    set.images.push_back(load_png(input));
  }

  std::string mode = locator;
  if (mode == "auto") mode = set.count() >= 2 ? "block" : "none";

  std::string id = source_id.empty() ? fs::path(input).stem().string() : source_id;
  ThemeExtraction extraction = [&] {
    if (mode == "block") {
      SampledBlocks sampled = locate_blocks(set, cfg);
      return extract_theme(set.first(), sampled,
                           theme_options(cfg, rng::substream(cfg.seed, "clustering")(), id));
    }
    if (mode == "synth") {
      PageImage synth = synthesize_fixed_image(set);
      return extract_theme_whole(synth,
                                 theme_options(cfg, rng::substream(cfg.seed, "clustering")(), id));
    }
    if (mode == "none") {
      return extract_theme_whole(set.first(),
                                 theme_options(cfg, rng::substream(cfg.seed, "clustering")(), id));
    }
    throw Error("BadLocator", "unknown locator '" + mode + "'");
  }();

  std::string json_text = extraction.theme.to_json().dump(1) + "\n";
  if (out_path.empty()) {
    std::cout << json_text;
  } else {
    write_text(out_path, json_text);
  }
  if (!swatch_path.empty()) save_png(render_swatch(extraction.theme), swatch_path);
  return 0;
}

// ---------------------------------------------------------------------------
// locate-fixed

int cmd_locate_fixed(const std::string& input, const std::string& grid_path,
                     const std::string& counts_path, const std::string& viz_path,
                     const Config& cfg) {
  SnapshotSet set = load_snapshot_set(input);
  BlockGrid grid = partition_blocks(set.first(), cfg.n1, cfg.n2);
  SimilarityOptions sopts;
  sopts.bins_per_axis = cfg.bins_per_axis;
  sopts.emd_scale = cfg.emd_scale;
  SimilarityGrid sim = block_similarity_map(set, grid, sopts);

  if (!grid_path.empty()) write_json(grid_path, sim.to_json());
  if (!viz_path.empty()) save_png(render_similarity(sim, grid), viz_path);
  if (!counts_path.empty()) {
    std::int64_t draws = cfg.draws > 0 ? cfg.draws : static_cast<std::int64_t>(grid.block_count());
    SampledBlocks sampled = sample_blocks(sim, grid, draws, rng::substream(cfg.seed, "locator")());
    write_json(counts_path, sampled.to_json());
  }
  if (grid_path.empty() && counts_path.empty() && viz_path.empty())
    std::cout << sim.to_json().dump(1) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

int cmd_train(const std::string& source_path, const std::string& target_path,
              const std::string& out_path, double holdout, bool no_kmm, bool weighted_bags,
              const Config& cfg) {
  Dataset source = load_dataset_csv(source_path);
  if (!source.labeled())
    throw Error("BadCsv", source_path + " needs a rating column for training");
  Dataset target = load_dataset_csv(target_path);
  if (source.feature_names != target.feature_names)
    throw Error("SchemaMismatch", "source and target CSV schemas differ");

  Eigen::MatrixXd train_X = source.X;
  Eigen::VectorXd train_y = source.y;
  Eigen::MatrixXd held_X;
  Eigen::VectorXd held_y;
  if (holdout > 0.0) {
    if (holdout >= 1.0) throw Error("BadHoldout", "--holdout must be in (0,1)");
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(source.X.rows()));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<Eigen::Index>(i);
    std::mt19937_64 gen = rng::substream(cfg.seed, "holdout");
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[gen() % i]);
    auto n_held = static_cast<Eigen::Index>(holdout * static_cast<double>(idx.size()));
    if (n_held < 1 || n_held >= source.X.rows())
      throw Error("BadHoldout", "holdout split leaves no train or test rows");
    held_X.resize(n_held, source.X.cols());
    held_y.resize(n_held);
    train_X.resize(source.X.rows() - n_held, source.X.cols());
    train_y.resize(source.X.rows() - n_held);
    for (Eigen::Index i = 0; i < n_held; ++i) {
      held_X.row(i) = source.X.row(idx[static_cast<std::size_t>(i)]);
      held_y[i] = source.y[idx[static_cast<std::size_t>(i)]];
    }
    for (Eigen::Index i = n_held; i < source.X.rows(); ++i) {
      train_X.row(i - n_held) = source.X.row(idx[static_cast<std::size_t>(i)]);
      train_y[i - n_held] = source.y[idx[static_cast<std::size_t>(i)]];
    }
  }

  EnsembleOptions opts;
  opts.lasso_lambda = cfg.lasso_lambda;
  opts.kmm.B = cfg.kmm_B;
  opts.kmm.epsilon = cfg.kmm_epsilon;
  opts.kmm.sigma = cfg.kmm_sigma;
  opts.ensemble_size = cfg.ensemble_L;
  opts.seed = rng::substream(cfg.seed, "bagging")();
  opts.use_kmm = !no_kmm;
  opts.weighted_bags = weighted_bags;

  AssessmentModel model = ensemble_train(train_X, train_y, target.X, opts);
  model.schema_version = source.schema_version;
  model.feature_names = source.feature_names;

  if (!out_path.empty()) write_json(out_path, model.to_json());
  nlohmann::json report = {{"members", model.members.size()},
                           {"schema_version", model.schema_version}};
  if (holdout > 0.0) report["holdout_rsse"] = rsse(model, held_X, held_y);
  std::cout << report.dump(1) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// assess / eval-rsse / eval-acs / correlate

int cmd_assess(const std::string& theme_path, const std::string& model_path) {
  ColorTheme theme = ColorTheme::from_json(read_json(theme_path));
  AssessmentModel model = AssessmentModel::from_json(read_json(model_path));
  double score = predict(model, extract_features(theme));
  std::cout << format_double(score) << "\n";
  return 0;
}

int cmd_eval_rsse(const std::string& model_path, const std::string& data_path) {
  AssessmentModel model = AssessmentModel::from_json(read_json(model_path));
  Dataset data = load_dataset_csv(data_path);
  if (!data.labeled()) throw Error("BadCsv", data_path + " needs a rating column");
  if (!model.feature_names.empty() && model.feature_names != data.feature_names)
    throw Error("SchemaMismatch", "model and data CSV schemas differ");
  std::cout << format_double(rsse(model, data.X, data.y)) << "\n";
  return 0;
}

int cmd_eval_acs(const std::string& image_path, const std::string& theme_path,
                 const std::string& mask_path) {
  PageImage image = load_png(image_path);
  ColorTheme theme = ColorTheme::from_json(read_json(theme_path));
  std::vector<Eigen::Vector3d> pixels;
  if (mask_path.empty()) {
    pixels.reserve(image.pixels.size());
    for (const ColorRGB& c : image.pixels) pixels.push_back(lab_vec(c));
  } else {
    pixels = masked_lab_pixels(image, mask_from_image(load_png(mask_path)));
  }
  std::cout << format_double(acs(pixels, theme)) << "\n";
  return 0;
}

int cmd_correlate(const std::string& data_path, int top, const std::string& out_path) {
  Dataset data = load_dataset_csv(data_path);
  if (!data.labeled()) throw Error("BadCsv", data_path + " needs a rating column");
  auto ranked = feature_rating_correlation(data.X, data.y, data.feature_names);
  nlohmann::json table = nlohmann::json::array();
  for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(top); ++i)
    table.push_back({{"rank", i + 1},
                     {"name", ranked[i].name},
                     {"r", ranked[i].r},
                     {"sign", ranked[i].sign()}});
  if (!out_path.empty()) write_json(out_path, table);
  std::cout << table.dump(1) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// transfer

CollectionOptions collection_options(const Config& cfg) {
  CollectionOptions opts;
  opts.n1 = cfg.n1;
  opts.n2 = cfg.n2;
  opts.similarity.bins_per_axis = cfg.bins_per_axis;
  opts.similarity.emd_scale = cfg.emd_scale;
  opts.theme.clustering.lambda = cfg.cluster_lambda;
  opts.theme.clustering.restarts = cfg.restarts;
  opts.seed = cfg.seed;
  return opts;
}

int cmd_transfer(const std::string& source_path, const std::string& mask_path,
                 const std::string& auto_mask_dir, const std::string& collection_path,
                 const std::string& model_path, const std::string& out_dir,
                 double filter_threshold, const Config& cfg) {
  PageImage source = load_png(source_path);

  FixedPartMask mask = [&] {
    if (!mask_path.empty()) return mask_from_image(load_png(mask_path));
    if (!auto_mask_dir.empty()) {
      SnapshotSet set = load_snapshot_set(auto_mask_dir);
      set.images.insert(set.images.begin(), source);
      return mask_from_sampled_blocks(locate_blocks(set, cfg));
    }
    return mask_full(source.width, source.height);
  }();

  ReferenceCollection collection =
      fs::is_directory(collection_path)
          ? build_collection(collection_path, collection_options(cfg))
          : load_collection(collection_path, collection_options(cfg));

  AssessmentModel model = AssessmentModel::from_json(read_json(model_path));

  TransferRankOptions opts;
  opts.top_n = cfg.top_n;
  if (filter_threshold > 0.0) opts.filter_threshold = filter_threshold;
  opts.theme.clustering.lambda = cfg.cluster_lambda;
  opts.theme.clustering.restarts = cfg.restarts;
  opts.seed = cfg.seed;
  TransferRanking ranking = transfer_and_rank(source, mask, collection, model, opts);

  nlohmann::json results = nlohmann::json::array();
  for (const TransferResult& r : ranking.results) {
    results.push_back({{"reference_id", r.reference_id}, {"score", r.score}, {"rank", r.rank}});
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      save_png(r.image, (fs::path(out_dir) / (std::to_string(r.rank) + "_" + r.reference_id + ".png")).string());
    }
  }
  nlohmann::json report = {{"results", results},
                           {"skipped", ranking.skipped},
                           {"filtered", ranking.filtered}};
  if (!out_dir.empty()) write_json((fs::path(out_dir) / "ranking.json").string(), report);
  std::cout << report.dump(1) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fetch-snapshots

int cmd_fetch(const std::string& url, int count, const std::string& out_dir,
              const std::string& endpoint) {
  FetchOptions opts;
  opts.endpoint_template = endpoint;
  std::vector<std::string> files = fetch_snapshots(url, count, out_dir, opts);
  nlohmann::json j = {{"written", files}};
  std::cout << j.dump(1) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// selftest: paper-stated defaults, then the full pipeline twice, byte-compared.

ColorRGB fixture_color(std::mt19937_64& gen) {
  return {rng::uniform01(gen), rng::uniform01(gen), rng::uniform01(gen)};
}

PageImage fixture_stripes(std::mt19937_64& gen, int w, int h) {
  PageImage img = make_image(w, h);
  std::array<ColorRGB, 5> palette;
  for (auto& c : palette) c = fixture_color(gen);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = palette[std::min(x * 5 / w, 4)];
  return img;
}

void make_fixtures(const fs::path& dir, std::uint64_t seed) {
  std::mt19937_64 gen = rng::substream(seed, "fixtures");

  // Source page and its manual mask (left 5/6 fixed).
  PageImage source = fixture_stripes(gen, 120, 90);
  save_png(source, (dir / "source.png").string());
  PageImage mask = make_image(120, 90, {0, 0, 0});
  for (int y = 0; y < 90; ++y)
    for (int x = 0; x < 100; ++x) mask.at(x, y) = {1, 1, 1};
  save_png(mask, (dir / "mask.png").string());

  // Three reference pages with temporal snapshots (changing banner).
  fs::create_directories(dir / "collection");
  for (int r = 0; r < 3; ++r) {
    std::string id = "ref" + std::to_string(r);
    PageImage page = fixture_stripes(gen, 120, 90);
    save_png(page, (dir / "collection" / (id + ".png")).string());
    fs::path snapdir = dir / "collection" / (id + "_snapshots");
    fs::create_directories(snapdir);
    for (int s = 0; s < 3; ++s) {
      PageImage snap = page;
      ColorRGB banner = fixture_color(gen);
      for (int y = 20; y < 45; ++y)
        for (int x = 30; x < 90; ++x) snap.at(x, y) = banner;
      char name[32];
      std::snprintf(name, sizeof(name), "%02d.png", s);
      save_png(snap, (snapdir / name).string());
    }
  }

  // Source/target feature CSVs from random themes; ratings follow a fixed
  // affine rule so training has signal.
  auto random_theme = [&] {
    std::array<ColorRGB, 5> colors;
    std::array<double, 5> props{};
    for (int i = 0; i < 5; ++i) {
      colors[i] = fixture_color(gen);
      props[i] = 0.1 + rng::uniform01(gen);
    }
    return ColorTheme(colors, props);
  };
  const auto& names = feature_schema();
  std::size_t dim = names.size();
  auto rating_of = [&](const FeatureVector& fv) {
    double r = 3.0;
    for (std::size_t i = 0; i < dim; i += 37) r += 0.05 * fv.values[i];
    return r + 0.1 * (rng::uniform01(gen) - 0.5);
  };

  Dataset src;
  src.feature_names = names;
  src.X.resize(40, static_cast<Eigen::Index>(dim));
  src.y.resize(40);
  for (int i = 0; i < 40; ++i) {
    FeatureVector fv = extract_features(random_theme());
    for (std::size_t c = 0; c < dim; ++c) src.X(i, static_cast<Eigen::Index>(c)) = fv.values[c];
    src.y[i] = rating_of(fv);
  }
  save_dataset_csv(src, (dir / "source_features.csv").string());

  Dataset tgt;
  tgt.feature_names = names;
  tgt.X.resize(20, static_cast<Eigen::Index>(dim));
  for (int i = 0; i < 20; ++i) {
    FeatureVector fv = extract_features(random_theme());
    for (std::size_t c = 0; c < dim; ++c) tgt.X(i, static_cast<Eigen::Index>(c)) = fv.values[c];
  }
  save_dataset_csv(tgt, (dir / "target_features.csv").string());
}

void run_pipeline(const fs::path& fixtures, const fs::path& out, const Config& cfg) {
  fs::create_directories(out);

  // Themes of the reference snapshot sets (block-sampling location).
  for (int r = 0; r < 3; ++r) {
    std::string id = "ref" + std::to_string(r);
    Config ref_cfg = cfg;
    ref_cfg.n1 = 12;
    ref_cfg.n2 = 9;
    SnapshotSet set = load_snapshot_set((fixtures / "collection" / (id + "_snapshots")).string());
    SampledBlocks sampled = locate_blocks(set, ref_cfg);
    ThemeExtraction ext = extract_theme(
        set.first(), sampled, theme_options(ref_cfg, rng::substream(ref_cfg.seed, "clustering")(), id));
    write_json((out / (id + ".theme.json")).string(), ext.theme.to_json());
    save_png(render_swatch(ext.theme), (out / (id + ".swatch.png")).string());
    if (r == 0) {
      BlockGrid grid = partition_blocks(set.first(), ref_cfg.n1, ref_cfg.n2);
      SimilarityOptions sopts;
      sopts.bins_per_axis = ref_cfg.bins_per_axis;
      sopts.emd_scale = ref_cfg.emd_scale;
      SimilarityGrid sim = block_similarity_map(set, grid, sopts);
      write_json((out / "ref0.simgrid.json").string(), sim.to_json());
      save_png(render_similarity(sim, grid), (out / "ref0.simgrid.png").string());
    }
  }

  // Train on the fixture CSVs.
  Dataset src = load_dataset_csv((fixtures / "source_features.csv").string());
  Dataset tgt = load_dataset_csv((fixtures / "target_features.csv").string());
  EnsembleOptions eopts;
  eopts.lasso_lambda = cfg.lasso_lambda;
  eopts.kmm.B = cfg.kmm_B;
  eopts.kmm.epsilon = cfg.kmm_epsilon;
  eopts.ensemble_size = cfg.ensemble_L;
  eopts.seed = rng::substream(cfg.seed, "bagging")();
  AssessmentModel model = ensemble_train(src.X, src.y, tgt.X, eopts);
  model.schema_version = src.schema_version;
  model.feature_names = src.feature_names;
  write_json((out / "model.json").string(), model.to_json());

  // Source theme + score.
  PageImage source = load_png((fixtures / "source.png").string());
  FixedPartMask mask = mask_from_image(load_png((fixtures / "mask.png").string()));
  WeightedPoints data;
  std::vector<Eigen::Vector2d> pos;
  for (int y = 0; y < source.height; ++y)
    for (int x = 0; x < source.width; ++x)
      if (mask.at(x, y)) {
        data.points.push_back(lab_vec(source.at(x, y)));
        data.weights.push_back(1.0);
        pos.emplace_back(x, y);
      }
  ThemeExtraction src_theme = extract_theme_points(
      data, pos, theme_options(cfg, rng::substream(cfg.seed, "clustering")(), "source"));
  write_json((out / "source.theme.json").string(), src_theme.theme.to_json());
  write_text((out / "source.score.txt").string(),
             format_double(predict(model, extract_features(src_theme.theme))) + "\n");
  write_text((out / "source.acs.txt").string(),
             format_double(acs(data.points, src_theme.theme)) + "\n");

  // Transfer over the bundled collection and rank.
  Config col_cfg = cfg;
  col_cfg.n1 = 12;
  col_cfg.n2 = 9;
  ReferenceCollection collection =
      build_collection((fixtures / "collection").string(), collection_options(col_cfg));
  TransferRankOptions topts;
  topts.top_n = 2;
  topts.theme.clustering.lambda = cfg.cluster_lambda;
  topts.theme.clustering.restarts = cfg.restarts;
  topts.seed = cfg.seed;
  TransferRanking ranking = transfer_and_rank(source, mask, collection, model, topts);
  nlohmann::json results = nlohmann::json::array();
  for (const TransferResult& r : ranking.results) {
    results.push_back({{"reference_id", r.reference_id}, {"score", r.score}, {"rank", r.rank}});
    save_png(r.image, (out / (std::to_string(r.rank) + "_" + r.reference_id + ".png")).string());
  }
  write_json((out / "ranking.json").string(),
             {{"results", results}, {"skipped", ranking.skipped}, {"filtered", ranking.filtered}});
}

bool identical_trees(const fs::path& a, const fs::path& b, std::vector<std::string>& report) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), a));
  std::sort(files.begin(), files.end());
  bool ok = true;
  for (const fs::path& rel : files) {
    std::ifstream fa(a / rel, std::ios::binary), fb(b / rel, std::ios::binary);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    bool same = fb.good() && sa.str() == sb.str();
    report.push_back((same ? "  ok  " : "  DIFF ") + rel.string());
    ok = ok && same;
  }
  return ok;
}

int cmd_selftest(const Config& cfg) {
  // Paper-stated defaults must be the CLI defaults.
  Config defaults;
  struct Check {
    const char* name;
    double got, want;
  };
  const Check checks[] = {
      {"n1", static_cast<double>(defaults.n1), 40.0},
      {"n2", static_cast<double>(defaults.n2), 40.0},
      {"K", static_cast<double>(ColorTheme::kColors), 5.0},
      {"clustering lambda", defaults.cluster_lambda, 70.0},
      {"KMM B", defaults.kmm_B, 1000.0},
      {"KMM epsilon", defaults.kmm_epsilon, 1.0},
      {"ensemble L", static_cast<double>(defaults.ensemble_L), 50.0},
  };
  bool defaults_ok = true;
  for (const Check& c : checks) {
    bool ok = c.got == c.want;
    defaults_ok = defaults_ok && ok;
    std::cout << "default " << c.name << " = " << c.got << (ok ? " (ok)" : " (MISMATCH)") << "\n";
  }

  fs::path root = fs::temp_directory_path() /
                  ("webcolor-selftest-" + std::to_string(cfg.seed) + "-" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root / "fixtures");

  make_fixtures(root / "fixtures", cfg.seed);
  run_pipeline(root / "fixtures", root / "run1", cfg);
  run_pipeline(root / "fixtures", root / "run2", cfg);

  std::vector<std::string> report;
  bool identical = identical_trees(root / "run1", root / "run2", report);
  std::cout << "pipeline outputs (" << report.size() << " files):\n";
  for (const std::string& line : report) std::cout << line << "\n";
  std::cout << "selftest: defaults " << (defaults_ok ? "ok" : "MISMATCH") << ", reruns "
            << (identical ? "byte-identical" : "DIFFER") << "\n";
  fs::remove_all(root);
  return defaults_ok && identical ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Color theme extraction, assessment and transfer for web page screenshots"};
  app.require_subcommand(1);

  Config cfg;
  app.add_option("--seed", cfg.seed, "Master seed; every random stage derives a named sub-stream");
  app.add_option("--n1", cfg.n1, "Blocks along image width");
  app.add_option("--n2", cfg.n2, "Blocks along image height");
  app.add_option("--bins", cfg.bins_per_axis, "Histogram bins per Lab axis");
  app.add_option("--emd-scale", cfg.emd_scale, "Similarity scale s in exp(-d/s)");
  app.add_option("--draws", cfg.draws, "Block sampling draws (0: one per block)");
  app.add_option("--cluster-lambda", cfg.cluster_lambda, "Outlier penalty of the clustering");
  app.add_option("--restarts", cfg.restarts, "Clustering restarts, best objective kept");

  std::string input, out_path, swatch_path, source_id;
  std::string locator = "auto";
  auto* extract = app.add_subcommand("extract-theme", "Extract a 5-color theme");
  extract->add_option("input", input, "Snapshot directory or single PNG")->required();
  extract->add_option("-o,--out", out_path, "Theme JSON path (default: stdout)");
  extract->add_option("--swatch", swatch_path, "Write the 5-swatch strip PNG here");
  extract->add_option("--locator", locator, "auto|block|synth|none");
  extract->add_option("--source-id", source_id, "Identifier stored in the theme");

  std::string grid_path, counts_path, viz_path;
  auto* locate = app.add_subcommand("locate-fixed", "Block-sampling fixed part location");
  locate->add_option("input", input, "Snapshot directory")->required();
  locate->add_option("-o,--grid", grid_path, "Similarity grid JSON");
  locate->add_option("--counts", counts_path, "Sampled block counts JSON");
  locate->add_option("--viz", viz_path, "Grayscale similarity PNG");

  std::string source_csv, target_csv, model_path;
  double holdout = 0.0;
  bool no_kmm = false, weighted_bags = false;
  auto* train = app.add_subcommand("train", "Train the ensemble assessment model");
  train->add_option("--source", source_csv, "Labeled source CSV")->required();
  train->add_option("--target", target_csv, "Unlabeled target CSV")->required();
  train->add_option("-o,--out", model_path, "Model JSON path");
  train->add_option("--lambda", cfg.lasso_lambda, "LASSO penalty");
  train->add_option("--L", cfg.ensemble_L, "Ensemble size");
  train->add_option("--B", cfg.kmm_B, "KMM box bound");
  train->add_option("--epsilon", cfg.kmm_epsilon, "KMM sum-band width");
  train->add_option("--sigma", cfg.kmm_sigma, "RBF bandwidth (0: median heuristic)");
  train->add_option("--holdout", holdout, "Source fraction held out; reports its RSSE");
  train->add_flag("--no-kmm", no_kmm, "Uniform weights instead of KMM");
  train->add_flag("--weighted-bags", weighted_bags, "Keep beta as per-sample weights inside bags");

  std::string theme_path;
  auto* assess = app.add_subcommand("assess", "Score a theme JSON with a model");
  assess->add_option("--theme", theme_path, "Theme JSON")->required();
  assess->add_option("--model", model_path, "Model JSON")->required();

  std::string data_csv;
  auto* eval_rsse = app.add_subcommand("eval-rsse", "RSSE of a model on labeled CSV data");
  eval_rsse->add_option("--model", model_path, "Model JSON")->required();
  eval_rsse->add_option("--data", data_csv, "Labeled CSV")->required();

  std::string image_path, mask_path;
  auto* eval_acs = app.add_subcommand("eval-acs", "Average within-cluster sum of a theme on a page");
  eval_acs->add_option("--image", image_path, "Page PNG")->required();
  eval_acs->add_option("--theme", theme_path, "Theme JSON")->required();
  eval_acs->add_option("--mask", mask_path, "Fixed-part mask PNG (white = fixed)");

  int corr_top = 10;
  auto* correlate = app.add_subcommand("correlate", "Feature-rating correlation ranking");
  correlate->add_option("--data", data_csv, "Labeled CSV")->required();
  correlate->add_option("--top", corr_top, "Rows to report");
  correlate->add_option("-o,--out", out_path, "Write the table JSON here");

  std::string transfer_source, auto_mask_dir, collection_path, transfer_out;
  double filter_threshold = 0.0;
  auto* transfer = app.add_subcommand("transfer", "Transfer source colors toward a collection and rank");
  transfer->add_option("--source", transfer_source, "Source page PNG")->required();
  transfer->add_option("--mask", mask_path, "Manual fixed-part mask PNG (white = fixed)");
  transfer->add_option("--auto-mask", auto_mask_dir, "Snapshot directory for block-sampling mask");
  transfer->add_option("--collection", collection_path, "Collection directory or manifest JSON")->required();
  transfer->add_option("--model", model_path, "Model JSON")->required();
  transfer->add_option("--top", cfg.top_n, "How many results to keep");
  transfer->add_option("--out", transfer_out, "Output directory for PNGs and ranking.json");
  transfer->add_option("--filter-threshold", filter_threshold,
                       "Theme-distance gate in delta-E (0: disabled)");

  std::string url, endpoint;
  int count = 5;
  auto* fetch = app.add_subcommand("fetch-snapshots", "Fetch temporal snapshots over HTTP");
  fetch->add_option("--url", url, "Page URL")->required();
  fetch->add_option("--count", count, "Snapshots to request");
  fetch->add_option("--out", out_path, "Output directory")->required();
  fetch->add_option("--endpoint", endpoint, "GET template with {url} and {i}")->required();

  auto* selftest = app.add_subcommand("selftest", "Defaults check + full pipeline determinism");

  CLI11_PARSE(app, argc, argv);

  try {
    if (extract->parsed())
      return cmd_extract_theme(input, locator, out_path, swatch_path, source_id, cfg);
    if (locate->parsed()) return cmd_locate_fixed(input, grid_path, counts_path, viz_path, cfg);
    if (train->parsed())
      return cmd_train(source_csv, target_csv, model_path, holdout, no_kmm, weighted_bags, cfg);
    if (assess->parsed()) return cmd_assess(theme_path, model_path);
    if (eval_rsse->parsed()) return cmd_eval_rsse(model_path, data_csv);
    if (eval_acs->parsed()) return cmd_eval_acs(image_path, theme_path, mask_path);
    if (correlate->parsed()) return cmd_correlate(data_csv, corr_top, out_path);
    if (transfer->parsed())
      return cmd_transfer(transfer_source, mask_path, auto_mask_dir, collection_path, model_path,
                          transfer_out, filter_threshold, cfg);
    if (fetch->parsed()) return cmd_fetch(url, count, out_path, endpoint);
    if (selftest->parsed()) return cmd_selftest(cfg);
  } catch (const Error& e) {
    nlohmann::json err = {{"error", e.code()}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    nlohmann::json err = {{"error", "Unhandled"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
