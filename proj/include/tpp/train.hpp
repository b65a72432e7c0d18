#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <vector>

#include "tpp/errors.hpp"
#include "tpp/model.hpp"
#include "tpp/moments.hpp"
#include "tpp/record.hpp"

namespace tpp {

namespace detail {

// Solves W (A - lambda I) = B for W, A symmetric. LDLT while well
// conditioned, otherwise the minimum-norm pseudo-inverse limit (eigenvalues
// below threshold dropped). Rows of B must lie in the range of A for the
// pseudo-inverse limit to be the least-squares minimum-norm solution, which
// holds for B = Y Xa^T by construction.
inline Eigen::MatrixXd solve_right_regularized(const Eigen::MatrixXd& A0,
                                               const Eigen::MatrixXd& B,
                                               double lambda,
                                               bool* used_pinv = nullptr,
                                               double rcond_limit = 1e-12) {
  Eigen::MatrixXd A = A0;
  if (lambda != 0.0) A.diagonal().array() -= lambda;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  if (ldlt.info() == Eigen::Success && ldlt.rcond() > rcond_limit) {
    Eigen::MatrixXd Wt = ldlt.solve(B.transpose());
    Wt += ldlt.solve(B.transpose() - A * Wt);  // one refinement pass
    if (used_pinv) *used_pinv = false;
    return Wt.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success)
    throw SingularMoments("eigendecomposition of moment matrix failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cutoff =
      ev.cwiseAbs().maxCoeff() * A.rows() * std::numeric_limits<double>::epsilon();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev[i]) > cutoff) inv[i] = 1.0 / ev[i];
  if (used_pinv) *used_pinv = true;
  return ((B * es.eigenvectors()) * inv.asDiagonal()) *
         es.eigenvectors().transpose();
}

// Augmented data matrix [X; 1] with columns class-major, shot-minor.
inline Eigen::MatrixXd augmented_data(const LabeledDataset& ds) {
  const int d = ds.dim();
  const int n = ds.total_shots();
  Eigen::MatrixXd Xa(d + 1, n);
  int col = 0;
  for (int c = 0; c < ds.n_classes(); ++c)
    for (const auto& rec : ds.shots[c]) {
      Xa.col(col).head(d) = flatten(rec);
      Xa(d, col) = 1.0;
      ++col;
    }
  return Xa;
}

inline TrainedTpp weights_to_model(const Eigen::MatrixXd& Wb,
                                   const std::vector<std::string>& classes,
                                   double lambda, TrainMethod method) {
  const int d = static_cast<int>(Wb.cols()) - 1;
  TrainedTpp model;
  model.W = Wb.leftCols(d);
  model.b = Wb.col(d);
  model.lambda = lambda;
  model.method = method;
  model.classes = classes;
  return model;
}

}  // namespace detail

// Least-squares training on raw records: W = Y Xa^T (Xa Xa^T - lambda I)^-1
// with the bias row of ones appended to the data matrix.
inline TrainedTpp train_numeric(const LabeledDataset& ds,
                                const TrainingOptions& opts = {}) {
  ds.validate();
  for (int c = 0; c < ds.n_classes(); ++c)
    if (ds.shots[c].empty())
      throw DegenerateData("train_numeric: class '" + ds.classes[c] +
                           "' has no shots");
  const int d = ds.dim();
  const int n = ds.total_shots();
  if (n < d + 1)
    warn("train_numeric: " + std::to_string(n) + " shots for " +
         std::to_string(d + 1) + " unknowns; system is underdetermined");

  Eigen::MatrixXd Xa = detail::augmented_data(ds);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d + 1, d + 1);
  A.selfadjointView<Eigen::Lower>().rankUpdate(Xa, 1.0);
  A = A.selfadjointView<Eigen::Lower>();

  // B = Y Xa^T: row c is the column sum of class-c shots.
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(ds.n_classes(), d + 1);
  int col = 0;
  for (int c = 0; c < ds.n_classes(); ++c)
    for (std::size_t s = 0; s < ds.shots[c].size(); ++s)
      B.row(c) += Xa.col(col++).transpose();

  Eigen::MatrixXd Wb = detail::solve_right_regularized(A, B, opts.lambda);
  return detail::weights_to_model(Wb, ds.classes, opts.lambda,
                                  TrainMethod::NumericLsq);
}

// Closed-form training from moments: (W b) = M D^-1 with
//   D = [[G + V, sum_c s^(c)], [sum_c s^(c)^T, C]],
//   M rows (s^(c)^T, 1).
inline TrainedTpp train_closed_form(const MomentSummary& moments,
                                    const TrainingOptions& opts = {}) {
  const int d = moments.dim();
  const int C = moments.n_classes();
  if (C < 2) throw InvalidArgument("train_closed_form: need at least 2 classes");

  Eigen::MatrixXd D(d + 1, d + 1);
  D.topLeftCorner(d, d) = moments.G + moments.V;
  Eigen::VectorXd ssum = Eigen::VectorXd::Zero(d);
  for (const auto& s : moments.means) ssum += s;
  D.topRightCorner(d, 1) = ssum;
  D.bottomLeftCorner(1, d) = ssum.transpose();
  D(d, d) = static_cast<double>(C);

  Eigen::MatrixXd M(C, d + 1);
  for (int c = 0; c < C; ++c) {
    M.row(c).head(d) = moments.means[c].transpose();
    M(c, d) = 1.0;
  }

  bool used_pinv = false;
  Eigen::MatrixXd Wb =
      detail::solve_right_regularized(D, M, opts.lambda, &used_pinv);
  if (used_pinv)
    throw SingularMoments(
        "train_closed_form: moment matrix numerically singular; set lambda > 0");
  return detail::weights_to_model(Wb, moments.classes, opts.lambda,
                                  TrainMethod::ClosedForm);
}

// Trains on row-permuted data Xa_J = J Xa and verifies the exchanged-weights
// identity W_J = W J^T to the given relative tolerance. perm must be a
// permutation of the d+1 augmented row indices fixing the bias row.
inline bool shuffle_equivariance_check(const TrainedTpp& model,
                                       const LabeledDataset& ds,
                                       const std::vector<int>& perm,
                                       double tol = 1e-9) {
  const int d = ds.dim();
  if (static_cast<int>(perm.size()) != d + 1)
    throw DimensionMismatch("permutation must cover the d+1 augmented rows");
  if (perm[d] != d) throw InvalidArgument("permutation must fix the bias row");
  {
    std::vector<int> seen(d + 1, 0);
    for (int p : perm) {
      if (p < 0 || p > d || seen[p]++)
        throw InvalidArgument("not a permutation of augmented row indices");
    }
  }

  LabeledDataset permuted = ds;
  for (auto& cls : permuted.shots)
    for (auto& rec : cls) {
      const Eigen::VectorXd x = flatten(rec);
      Eigen::VectorXd xp(d);
      for (int i = 0; i < d; ++i) xp[i] = x[perm[i]];
      rec = unflatten(xp, rec.n_obs(), rec.n_time(), rec.dt);
    }

  TrainingOptions opts{model.lambda, TrainMethod::NumericLsq};
  const TrainedTpp shuffled = train_numeric(permuted, opts);

  Eigen::MatrixXd Wb_base(model.W.rows(), d + 1);
  Wb_base << model.W, model.b;
  Eigen::MatrixXd Wb_shuf(shuffled.W.rows(), d + 1);
  Wb_shuf << shuffled.W, shuffled.b;

  double max_diff = 0.0;
  for (int i = 0; i <= d; ++i)
    max_diff = std::max(max_diff,
                        (Wb_shuf.col(i) - Wb_base.col(perm[i])).cwiseAbs().maxCoeff());
  const double scale = std::max(Wb_base.cwiseAbs().maxCoeff(),
                                std::numeric_limits<double>::min());
  return max_diff <= tol * scale;
}

}  // namespace tpp
