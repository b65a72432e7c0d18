#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tpp/errors.hpp"
#include "tpp/record.hpp"

namespace tpp {

// Empirical first and second moments of a labeled dataset:
//   s^(p)     per-class mean of the flattened records,
//   Sigma^(p) per-class biased (1/N) covariance,
//   V = sum_p Sigma^(p),
//   G = sum_p s^(p) s^(p)^T.
struct MomentSummary {
  std::vector<std::string> classes;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covariances;
  Eigen::MatrixXd V;
  Eigen::MatrixXd G;

  int n_classes() const { return static_cast<int>(classes.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }
};

// Flattened shots of one class as columns, shot index ascending.
inline Eigen::MatrixXd class_data_matrix(const LabeledDataset& ds, int c) {
  const int d = ds.dim();
  const int n = ds.n_shots(c);
  Eigen::MatrixXd X(d, n);
  for (int i = 0; i < n; ++i) X.col(i) = flatten(ds.shots[c][i]);
  return X;
}

inline MomentSummary estimate_moments(const LabeledDataset& ds) {
  const int d = ds.dim();
  if (d == 0) throw TooFewShots("estimate_moments: dataset has no shots");
  MomentSummary out;
  out.classes = ds.classes;
  out.V = Eigen::MatrixXd::Zero(d, d);
  out.G = Eigen::MatrixXd::Zero(d, d);
  for (int c = 0; c < ds.n_classes(); ++c) {
    const int n = ds.n_shots(c);
    if (n < 2)
      throw TooFewShots("estimate_moments: class '" + ds.classes[c] +
                        "' has fewer than 2 shots");
    Eigen::MatrixXd X = class_data_matrix(ds, c);
    Eigen::VectorXd mean = X.rowwise().mean();
    X.colwise() -= mean;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    cov.selfadjointView<Eigen::Lower>().rankUpdate(X, 1.0 / n);
    cov = cov.selfadjointView<Eigen::Lower>();  // exact symmetry
    out.V += cov;
    out.G.selfadjointView<Eigen::Lower>().rankUpdate(mean, 1.0);
    out.means.push_back(std::move(mean));
    out.covariances.push_back(std::move(cov));
  }
  out.G = out.G.selfadjointView<Eigen::Lower>();
  return out;
}

}  // namespace tpp
