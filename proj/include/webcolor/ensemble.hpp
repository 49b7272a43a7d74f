#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "webcolor/common.hpp"
#include "webcolor/features.hpp"
#include "webcolor/kmm.hpp"
#include "webcolor/lasso.hpp"

namespace webcolor {

/// Bagged ensemble of affine scorers plus their average, which is the
/// deployed model. Members are kept for inspection and evaluation.
struct AssessmentModel {
  struct Member {
    Eigen::VectorXd a;
    double b = 0.0;
  };

  std::vector<Member> members;
  Eigen::VectorXd a;  // average of member a_l
  double b = 0.0;     // average of member b_l
  std::string schema_version;
  std::vector<std::string> feature_names;

  // Training metadata.
  double lasso_lambda = 0.0;
  double kmm_B = 0.0, kmm_epsilon = 0.0, kmm_sigma = 0.0;
  int ensemble_size = 0;
  std::uint64_t seed = 0;
  bool used_kmm = true;
  bool weighted_bags = false;
  int empty_bag_resamples = 0;

  nlohmann::json to_json() const {
    nlohmann::json members_json = nlohmann::json::array();
    for (const auto& m : members)
      members_json.push_back({{"a", std::vector<double>(m.a.data(), m.a.data() + m.a.size())},
                              {"b", m.b}});
    return {{"members", members_json},
            {"a", std::vector<double>(a.data(), a.data() + a.size())},
            {"b", b},
            {"schema_version", schema_version},
            {"feature_names", feature_names},
            {"metadata",
             {{"lasso_lambda", lasso_lambda},
              {"kmm_B", kmm_B},
              {"kmm_epsilon", kmm_epsilon},
              {"kmm_sigma", kmm_sigma},
              {"ensemble_size", ensemble_size},
              {"seed", seed},
              {"used_kmm", used_kmm},
              {"weighted_bags", weighted_bags},
              {"empty_bag_resamples", empty_bag_resamples}}}};
  }

  static AssessmentModel from_json(const nlohmann::json& j) {
    AssessmentModel m;
    for (const auto& mem : j.at("members")) {
      auto av = mem.at("a").get<std::vector<double>>();
      Member out;
      out.a = Eigen::Map<const Eigen::VectorXd>(av.data(), static_cast<Eigen::Index>(av.size()));
      out.b = mem.at("b").get<double>();
      m.members.push_back(std::move(out));
    }
    auto av = j.at("a").get<std::vector<double>>();
    m.a = Eigen::Map<const Eigen::VectorXd>(av.data(), static_cast<Eigen::Index>(av.size()));
    m.b = j.at("b").get<double>();
    m.schema_version = j.value("schema_version", std::string{});
    m.feature_names = j.value("feature_names", std::vector<std::string>{});
    const auto& meta = j.at("metadata");
    m.lasso_lambda = meta.value("lasso_lambda", 0.0);
    m.kmm_B = meta.value("kmm_B", 0.0);
    m.kmm_epsilon = meta.value("kmm_epsilon", 0.0);
    m.kmm_sigma = meta.value("kmm_sigma", 0.0);
    m.ensemble_size = meta.value("ensemble_size", 0);
    m.seed = meta.value("seed", std::uint64_t{0});
    m.used_kmm = meta.value("used_kmm", true);
    m.weighted_bags = meta.value("weighted_bags", false);
    m.empty_bag_resamples = meta.value("empty_bag_resamples", 0);
    return m;
  }
};

/// One bagging round: sample i joins the bag when a fresh uniform draw on
/// [0, max(beta)) falls below beta_i, so inclusion probability is
/// beta_i / max(beta).
inline std::vector<Eigen::Index> sample_bag(const Eigen::VectorXd& beta, std::mt19937_64& gen) {
  double max_beta = beta.maxCoeff();
  std::vector<Eigen::Index> bag;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    double d = rng::uniform(gen, max_beta);
    if (d < beta[i]) bag.push_back(i);
  }
  return bag;
}

struct EnsembleOptions {
  double lasso_lambda = 0.1;
  KmmOptions kmm;
  int ensemble_size = 50;  // L
  std::uint64_t seed = 0;
  bool use_kmm = true;        // false: beta = 1 (plain bagged LASSO)
  bool weighted_bags = false; // true: Eq. 5 inside a bag keeps the beta weights
  LassoOptions lasso;
};

/// Ensemble transfer trainer: KMM weights once, then L bags drawn by the
/// beta/max(beta) inclusion rule, each fit with Eq. 5, and the members
/// averaged. Bags run concurrently; each draws from its own seed-derived
/// stream, so scheduling cannot change the result. An empty bag is redrawn
/// from the same stream, up to 100 attempts.
inline AssessmentModel ensemble_train(const Eigen::MatrixXd& source_X,
                                      const Eigen::VectorXd& source_y,
                                      const Eigen::MatrixXd& target_X,
                                      const EnsembleOptions& options = {}) {
  if (source_X.rows() != source_y.size())
    throw Error("ShapeMismatch", "source features and ratings disagree in length");
  if (options.ensemble_size < 1) throw Error("BadEnsembleSize", "L must be >= 1");

  Eigen::VectorXd beta;
  double sigma = 0.0;
  if (options.use_kmm) {
    KmmWeights w = kmm_weights(source_X, target_X, options.kmm);
    beta = std::move(w.beta);
    sigma = w.kernel_sigma;
  } else {
    beta = Eigen::VectorXd::Ones(source_X.rows());
  }

  const int L = options.ensemble_size;
  std::vector<AssessmentModel::Member> members(L);
  std::vector<int> resamples(L, 0);
  std::vector<std::string> failures(L);

  parallel_for(static_cast<std::size_t>(L), [&](std::size_t l) {
    std::mt19937_64 gen = rng::substream(options.seed, "bag", l);
    std::vector<Eigen::Index> bag;
    for (int attempt = 0; attempt < 100 && bag.empty(); ++attempt) {
      bag = sample_bag(beta, gen);
      if (bag.empty()) ++resamples[l];
    }
    if (bag.empty()) {
      failures[l] = "bag stayed empty after 100 attempts";
      return;
    }
    Eigen::MatrixXd Xl(static_cast<Eigen::Index>(bag.size()), source_X.cols());
    Eigen::VectorXd yl(static_cast<Eigen::Index>(bag.size()));
    Eigen::VectorXd wl(static_cast<Eigen::Index>(bag.size()));
    for (std::size_t r = 0; r < bag.size(); ++r) {
      Xl.row(static_cast<Eigen::Index>(r)) = source_X.row(bag[r]);
      yl[static_cast<Eigen::Index>(r)] = source_y[bag[r]];
      wl[static_cast<Eigen::Index>(r)] = options.weighted_bags ? beta[bag[r]] : 1.0;
    }
    LassoFit fit = weighted_lasso(Xl, yl, wl, options.lasso_lambda, options.lasso);
    members[l] = {std::move(fit.a), fit.b};
  });

  for (const std::string& f : failures)
    if (!f.empty()) throw Error("EmptyBag", f);

  AssessmentModel model;
  model.members = std::move(members);
  model.a = Eigen::VectorXd::Zero(source_X.cols());
  for (const auto& m : model.members) {
    model.a += m.a;
    model.b += m.b;
  }
  model.a /= static_cast<double>(L);
  model.b /= static_cast<double>(L);
  model.lasso_lambda = options.lasso_lambda;
  model.kmm_B = options.kmm.B;
  model.kmm_epsilon = options.kmm.epsilon;
  model.kmm_sigma = sigma;
  model.ensemble_size = L;
  model.seed = options.seed;
  model.used_kmm = options.use_kmm;
  model.weighted_bags = options.weighted_bags;
  for (int r : resamples) model.empty_bag_resamples += r;
  return model;
}

/// Score with the averaged coefficients.
inline double predict(const AssessmentModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.a.size())
    throw Error("SchemaMismatch", "feature dimension does not match the model");
  return model.a.dot(x) + model.b;
}

inline double predict(const AssessmentModel& model, const FeatureVector& fv) {
  if (!model.schema_version.empty() && fv.schema_version != model.schema_version)
    throw Error("SchemaMismatch", "feature schema '" + fv.schema_version +
                                      "' does not match model schema '" +
                                      model.schema_version + "'");
  return predict(model, Eigen::Map<const Eigen::VectorXd>(
                            fv.values.data(), static_cast<Eigen::Index>(fv.values.size())));
}

/// Residual sum of squared errors of the averaged model.
inline double rsse(const AssessmentModel& model, const Eigen::MatrixXd& X,
                   const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw Error("ShapeMismatch", "X and y disagree in length");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double e = predict(model, Eigen::VectorXd(X.row(i))) - y[i];
    sum += e * e;
  }
  return sum;
}

} // namespace webcolor
