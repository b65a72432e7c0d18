#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "tpp/cavity.hpp"
#include "tpp/errors.hpp"
#include "tpp/model.hpp"
#include "tpp/moments.hpp"
#include "tpp/record.hpp"

namespace tpp {

enum class FilterProvenance {
  WhiteNoiseAnalytic,
  GeneralSemiAnalytic,
  Numeric,
};

inline const char* provenance_name(FilterProvenance p) {
  switch (p) {
    case FilterProvenance::WhiteNoiseAnalytic: return "white-noise-analytic";
    case FilterProvenance::GeneralSemiAnalytic: return "general-semi-analytic";
    case FilterProvenance::Numeric: return "numeric";
  }
  return "unknown";
}

// C per-class filters f_k with biases, plus the coefficients C_kp expressing
// each filter as a combination of whitened mean traces, f_k = sum_p C_kp
// V^-1 s^(p). coefficients has size 0 for numeric provenance.
struct FilterBank {
  std::vector<Eigen::VectorXd> filters;
  Eigen::VectorXd biases;
  Eigen::MatrixXd coefficients;  // C x C
  FilterProvenance provenance = FilterProvenance::Numeric;

  int n_filters() const { return static_cast<int>(filters.size()); }
};

// The (C-1)-dimensional linear system whose solution fixes the filter
// coefficients: consecutive state pairs P_p = [p, p+1], Q the pair-difference
// overlap matrix and T the diagonal inhomogeneous part.
struct QSystem {
  Eigen::MatrixXd Q;       // (C-1) x (C-1)
  Eigen::VectorXd T_diag;  // (C-1)
  std::vector<std::array<int, 2>> pairs;
};

// Whitening factor L (lower triangular) with L^T L = (V + lambda_v I)^-1.
// lambda_v is applied only if plain factorization fails.
inline Eigen::MatrixXd whitening(const Eigen::MatrixXd& V, double lambda_v = 0.0) {
  if (V.rows() != V.cols()) throw InvalidArgument("whitening: V must be square");
  const Eigen::Index d = V.rows();
  Eigen::LLT<Eigen::MatrixXd> llt(V);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(V);
    const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
    if (es.eigenvalues().minCoeff() < -1e-8 * norm)
      throw NotPsd("whitening: V has a significantly negative eigenvalue");
    if (lambda_v > 0.0) {
      Eigen::MatrixXd Vj = V;
      Vj.diagonal().array() += lambda_v;
      llt.compute(Vj);
    }
    if (llt.info() != Eigen::Success)
      throw SingularMoments("whitening: V singular; supply lambda_v > 0");
  }
  Eigen::MatrixXd L = Eigen::MatrixXd::Identity(d, d);
  llt.matrixL().solveInPlace(L);  // L = chol(V)^-1
  return L;
}

namespace detail {

inline QSystem build_q_system(const Eigen::MatrixXd& M) {
  const int C = static_cast<int>(M.rows());
  QSystem qs;
  qs.Q.resize(C - 1, C - 1);
  qs.T_diag.resize(C - 1);
  for (int p = 0; p < C - 1; ++p) {
    const int a = p, b = p + 1;  // pair P_p = [p, p+1]
    qs.pairs.push_back({a, b});
    const double last = M(a, C - 1) - M(b, C - 1);
    for (int c = 0; c < C - 1; ++c) qs.Q(p, c) = (M(a, c) - M(b, c)) - last;
    qs.T_diag[p] = last;
  }
  return qs;
}

// Whitening factor, whitened means, and the overlap matrix M = O + 1 + delta
// shared by the filter synthesis and the exposed Q-system builder.
struct WhitenedMeans {
  Eigen::MatrixXd L;   // L^T L = V^-1
  Eigen::MatrixXd Ws;  // columns L s^(c)
  Eigen::MatrixXd M;   // C x C
};

inline WhitenedMeans whiten_means(const MomentSummary& moments, bool assume_white) {
  const int C = moments.n_classes();
  const int d = moments.dim();
  Eigen::MatrixXd Vuse = assume_white
                             ? (moments.V.trace() / d) *
                                   Eigen::MatrixXd::Identity(d, d)
                             : moments.V;
  WhitenedMeans wm;
  try {
    wm.L = whitening(Vuse);
  } catch (const SingularMoments&) {
    wm.L = whitening(Vuse, 1e-10 * Vuse.trace() / d);
  }
  wm.Ws.resize(d, C);
  for (int c = 0; c < C; ++c) wm.Ws.col(c) = wm.L * moments.means[c];
  wm.M = wm.Ws.transpose() * wm.Ws;
  wm.M.array() += 1.0;
  wm.M.diagonal().array() += 1.0;
  return wm;
}

}  // namespace detail

// Intermediate linear system for the given moments, in the fixed consecutive
// pair basis. Exposed for golden tests of the synthesis machinery.
inline QSystem build_q_system(const MomentSummary& moments, bool assume_white) {
  if (moments.n_classes() < 2)
    throw InvalidArgument("build_q_system: need at least 2 classes");
  return detail::build_q_system(detail::whiten_means(moments, assume_white).M);
}

// Optimal per-class filters from first and second moments. With assume_white
// the correlation matrix is replaced by its isotropic fit (tr V / dim) I.
// Filter C and bias C are reconstructed from the sum constraints
// sum_k f_k = 0, sum_k b_k = 1.
inline FilterBank analytic_filters(const MomentSummary& moments, bool assume_white) {
  const int C = moments.n_classes();
  const int d = moments.dim();
  if (C < 2) throw InvalidArgument("analytic_filters: need at least 2 classes");

  const detail::WhitenedMeans wm = detail::whiten_means(moments, assume_white);
  QSystem qs = detail::build_q_system(wm.M);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(qs.Q);
  if (!lu.isInvertible())
    throw SingularQ("analytic_filters: class means coincide under V^-1 inner product");
  Eigen::MatrixXd Qinv = lu.inverse();

  // V^-1 s^(p) via the whitening factor.
  Eigen::MatrixXd Vinv_s(d, C);
  for (int c = 0; c < C; ++c) Vinv_s.col(c) = wm.L.transpose() * wm.Ws.col(c);

  FilterBank bank;
  bank.provenance = assume_white ? FilterProvenance::WhiteNoiseAnalytic
                                 : FilterProvenance::GeneralSemiAnalytic;
  bank.filters.assign(C, Eigen::VectorXd::Zero(d));
  bank.biases = Eigen::VectorXd::Zero(C);
  bank.coefficients = Eigen::MatrixXd::Zero(C, C);

  for (int c = 0; c < C - 1; ++c) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(d);
    double bias = 0.0;
    for (int p = 0; p < C - 1; ++p) {
      f += Qinv(c, p) * (Vinv_s.col(qs.pairs[p][0]) - Vinv_s.col(qs.pairs[p][1]));
      bias -= Qinv(c, p) * qs.T_diag[p];
    }
    bank.filters[c] = f;
    bank.biases[c] = bias;
    // Coefficients on individual mean traces, from the pair differences.
    bank.coefficients(c, 0) = Qinv(c, 0);
    bank.coefficients(c, C - 1) = -Qinv(c, C - 2);
    for (int p = 1; p < C - 1; ++p)
      bank.coefficients(c, p) = Qinv(c, p) - Qinv(c, p - 1);
  }

  // Last filter and bias from the constraint.
  Eigen::VectorXd f_last = Eigen::VectorXd::Zero(d);
  double b_last = 1.0;
  for (int c = 0; c < C - 1; ++c) {
    f_last -= bank.filters[c];
    b_last -= bank.biases[c];
    bank.coefficients.row(C - 1) -= bank.coefficients.row(c);
  }
  bank.filters[C - 1] = f_last;
  bank.biases[C - 1] = b_last;
  return bank;
}

inline TrainedTpp filter_bank_model(const FilterBank& bank,
                                    const std::vector<std::string>& classes,
                                    double lambda = 0.0) {
  if (static_cast<int>(classes.size()) != bank.n_filters())
    throw DimensionMismatch("filter_bank_model: class count mismatch");
  TrainedTpp model;
  const int C = bank.n_filters();
  model.W.resize(C, bank.filters[0].size());
  for (int c = 0; c < C; ++c) model.W.row(c) = bank.filters[c].transpose();
  model.b = bank.biases;
  model.lambda = lambda;
  model.method = bank.provenance == FilterProvenance::WhiteNoiseAnalytic
                     ? TrainMethod::WhiteNoiseAnalytic
                     : TrainMethod::GeneralAnalytic;
  model.classes = classes;
  return model;
}

inline Eigen::VectorXd class_mean(const LabeledDataset& ds, int c) {
  if (ds.shots[c].empty())
    throw TooFewShots("class '" + ds.classes[c] + "' has no shots");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(ds.dim());
  for (const auto& rec : ds.shots[c]) mean += flatten(rec);
  return mean / static_cast<double>(ds.shots[c].size());
}

// Empirical matched filter: difference of class-mean traces, both quadratures.
inline Eigen::VectorXd matched_filter(const LabeledDataset& ds,
                                      const std::string& class_a,
                                      const std::string& class_b) {
  const int a = ds.class_index(class_a);
  const int b = ds.class_index(class_b);
  return class_mean(ds, a) - class_mean(ds, b);
}

// Uniform filter over the drive window, replicated for both quadratures.
inline Eigen::VectorXd boxcar_filter(const CavityConfig& cfg) {
  cfg.validate();
  const int nt = cfg.n_time();
  Eigen::VectorXd box = Eigen::VectorXd::Zero(2 * nt);
  int count = 0;
  for (int i = 0; i < nt; ++i) {
    const double t = i * cfg.dt;
    if (t >= cfg.t_on && t < cfg.t_off) {
      box[i] = 1.0;
      box[nt + i] = 1.0;
      ++count;
    }
  }
  if (count == 0) warn("boxcar_filter: empty drive window, filter is zero");
  return box;
}

// One-versus-all matched filter h_p = mean_p - mean of the other class means.
inline Eigen::VectorXd one_vs_all_filter(const LabeledDataset& ds,
                                         const std::string& class_p) {
  const int C = ds.n_classes();
  if (C < 3) throw InvalidArgument("one_vs_all_filter: need at least 3 classes");
  const int p = ds.class_index(class_p);
  Eigen::VectorXd rest = Eigen::VectorXd::Zero(ds.dim());
  for (int c = 0; c < C; ++c)
    if (c != p) rest += class_mean(ds, c);
  return class_mean(ds, p) - rest / static_cast<double>(C - 1);
}

}  // namespace tpp
