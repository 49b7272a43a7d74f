#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "webcolor/common.hpp"

namespace webcolor {

/// Principal components of a feature matrix. Rows of `components` are the
/// mutually orthonormal directions, strongest first.
struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;           // k x dims
  Eigen::VectorXd explained_variance;   // k
  std::string schema_version;
  bool rank_truncated = false;  // fewer components than requested

  Eigen::Index dims() const { return mean.size(); }
  Eigen::Index k() const { return components.rows(); }

  nlohmann::json to_json() const {
    nlohmann::json comps = nlohmann::json::array();
    for (Eigen::Index i = 0; i < components.rows(); ++i) {
      std::vector<double> row(components.cols());
      for (Eigen::Index j = 0; j < components.cols(); ++j) row[j] = components(i, j);
      comps.push_back(row);
    }
    return {{"mean", std::vector<double>(mean.data(), mean.data() + mean.size())},
            {"components", comps},
            {"explained_variance",
             std::vector<double>(explained_variance.data(),
                                 explained_variance.data() + explained_variance.size())},
            {"schema_version", schema_version},
            {"rank_truncated", rank_truncated}};
  }

  static PcaModel from_json(const nlohmann::json& j) {
    PcaModel m;
    auto mean = j.at("mean").get<std::vector<double>>();
    m.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    const auto& comps = j.at("components");
    m.components.resize(static_cast<Eigen::Index>(comps.size()), m.mean.size());
    for (Eigen::Index i = 0; i < m.components.rows(); ++i) {
      auto row = comps[static_cast<std::size_t>(i)].get<std::vector<double>>();
      m.components.row(i) = Eigen::Map<const Eigen::VectorXd>(row.data(), m.mean.size());
    }
    auto ev = j.at("explained_variance").get<std::vector<double>>();
    m.explained_variance = Eigen::Map<const Eigen::VectorXd>(ev.data(), static_cast<Eigen::Index>(ev.size()));
    m.schema_version = j.value("schema_version", std::string{});
    m.rank_truncated = j.value("rank_truncated", false);
    return m;
  }
};

/// Top-k eigenvectors of the sample covariance. Directions whose variance
/// is numerically zero are dropped and the model flagged rank_truncated.
inline PcaModel fit_pca(const Eigen::MatrixXd& X, int k,
                        const std::string& schema_version = {}) {
  if (X.rows() < 2) throw Error("TooFewSamples", "PCA needs at least 2 rows");
  if (k < 1 || k > std::min<Eigen::Index>(X.rows() - 1, X.cols()))
    throw Error("BadComponentCount",
                "k must be in [1, min(rows-1, dims)] for a " + std::to_string(X.rows()) + "x" +
                    std::to_string(X.cols()) + " matrix");

  PcaModel model;
  model.schema_version = schema_version;
  model.mean = X.colwise().mean();
  Eigen::MatrixXd centered = X.rowwise() - model.mean.transpose();
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(X.rows() - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const double tol = 1e-12 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());

  // Eigenvalues come back ascending; take from the top.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = cov.rows() - 1; i >= 0 && static_cast<int>(keep.size()) < k; --i) {
    if (eig.eigenvalues()[i] > tol) keep.push_back(i);
  }
  if (keep.empty()) throw Error("RankDeficient", "covariance has no positive directions");
  model.rank_truncated = static_cast<int>(keep.size()) < k;

  model.components.resize(static_cast<Eigen::Index>(keep.size()), cov.cols());
  model.explained_variance.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    Eigen::VectorXd v = eig.eigenvectors().col(keep[r]);
    int arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    model.components.row(static_cast<Eigen::Index>(r)) = v.transpose();
    model.explained_variance[static_cast<Eigen::Index>(r)] = eig.eigenvalues()[keep[r]];
  }
  return model;
}

inline Eigen::VectorXd apply_pca(const PcaModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.dims())
    throw Error("SchemaMismatch", "vector dimension does not match the PCA model");
  return model.components * (x - model.mean);
}

inline Eigen::MatrixXd apply_pca(const PcaModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.dims())
    throw Error("SchemaMismatch", "matrix width does not match the PCA model");
  return (X.rowwise() - model.mean.transpose()) * model.components.transpose();
}

} // namespace webcolor
