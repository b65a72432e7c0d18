#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "tpp/errors.hpp"
#include "tpp/record.hpp"
#include "tpp/rng.hpp"

namespace tpp {

struct EvalReport {
  Eigen::MatrixXi confusion;  // (true class) x (predicted class)
  double fidelity = 0.0;         // balanced: mean of per-class accuracies
  double pooled_fidelity = 0.0;  // trace / total
  double infidelity = 1.0;
  double binomial_se = 0.0;
  int n_eval = 0;
};

inline EvalReport fidelity(const std::vector<int>& truth,
                           const std::vector<int>& pred, int n_classes) {
  if (truth.size() != pred.size())
    throw LengthMismatch("fidelity: label vectors differ in length");
  if (truth.empty()) throw LengthMismatch("fidelity: empty label vectors");
  EvalReport rep;
  rep.confusion = Eigen::MatrixXi::Zero(n_classes, n_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= n_classes || pred[i] < 0 || pred[i] >= n_classes)
      throw InvalidArgument("fidelity: label out of range");
    rep.confusion(truth[i], pred[i]) += 1;
  }
  rep.n_eval = static_cast<int>(truth.size());
  double balanced = 0.0;
  int present = 0;
  int correct = 0;
  for (int c = 0; c < n_classes; ++c) {
    const int row = rep.confusion.row(c).sum();
    correct += rep.confusion(c, c);
    if (row > 0) {
      balanced += static_cast<double>(rep.confusion(c, c)) / row;
      ++present;
    }
  }
  rep.fidelity = present > 0 ? balanced / present : 0.0;
  rep.pooled_fidelity = static_cast<double>(correct) / rep.n_eval;
  rep.infidelity = 1.0 - rep.fidelity;
  rep.binomial_se = std::sqrt(rep.fidelity * (1.0 - rep.fidelity) / rep.n_eval);
  return rep;
}

// Percentage fewer errors of the TPP relative to the FGDA.
inline double e_metric(double f_tpp, double f_fgda) {
  if (f_tpp < 0.0 || f_tpp > 1.0 || f_fgda < 0.0 || f_fgda > 1.0)
    throw InvalidArgument("e_metric: fidelities must lie in [0, 1]");
  if (f_fgda == 1.0) throw DivideByZero("e_metric: FGDA fidelity is 1");
  return 100.0 * (f_tpp - f_fgda) / (1.0 - f_fgda);
}

// First-order error propagation of binomial standard errors through e_metric.
inline double e_metric_sigma(double f_tpp, double se_tpp, double f_fgda,
                             double se_fgda) {
  const double denom = 1.0 - f_fgda;
  const double d_tpp = 100.0 / denom;
  const double d_fgda = 100.0 * (f_tpp - 1.0) / (denom * denom);
  return std::sqrt(d_tpp * d_tpp * se_tpp * se_tpp +
                   d_fgda * d_fgda * se_fgda * se_fgda);
}

// Infidelity normalized by its value at the smallest amplitude.
inline std::map<double, double> n_metric(const std::map<double, double>& infidelities) {
  if (infidelities.empty()) throw InvalidArgument("n_metric: empty input");
  const double base = infidelities.begin()->second;
  if (base == 0.0) throw DivideByZero("n_metric: zero infidelity at smallest amplitude");
  std::map<double, double> out;
  for (const auto& [amp, inf] : infidelities) out[amp] = inf / base;
  return out;
}

namespace detail {

// Covariance of one observable for one class, biased 1/N, shots ascending.
inline Eigen::MatrixXd observable_covariance(const LabeledDataset& ds, int c,
                                             int obs) {
  const int nt = ds.n_time();
  const int n = ds.n_shots(c);
  if (n < 2) throw TooFewShots("noise_psd: need >= 2 shots");
  if (obs < 0 || obs >= ds.n_obs())
    throw InvalidArgument("noise_psd: observable index out of range");
  Eigen::MatrixXd X(nt, n);
  for (int i = 0; i < n; ++i)
    X.col(i) = ds.shots[c][i].values.row(obs).transpose();
  const Eigen::VectorXd mean = X.rowwise().mean();
  X.colwise() -= mean;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(nt, nt);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(X, 1.0 / n);
  return cov.selfadjointView<Eigen::Lower>();
}

// Covariance entries grouped by lag; lag 0 carries the full diagonal.
inline Eigen::VectorXd lag_sums(const Eigen::MatrixXd& cov) {
  const int nt = static_cast<int>(cov.rows());
  Eigen::VectorXd r = Eigen::VectorXd::Zero(nt);
  for (int j = 0; j < nt; ++j)
    for (int k = 0; k <= j; ++k) r[j - k] += cov(j, k);
  return r;
}

}  // namespace detail

inline std::vector<double> psd_frequencies(int n_time, double dt) {
  std::vector<double> f(n_time / 2 + 1);
  for (std::size_t m = 0; m < f.size(); ++m) f[m] = m / (n_time * dt);
  return f;
}

// One-sided noise power spectral density of the empirical covariance,
// evaluated on the FFT frequency grid [0, 1/(2 dt)]; real part. The
// equal-index (lag-0) term is included so white noise gives a flat spectrum
// at the total noise power.
inline Eigen::VectorXd noise_psd(const LabeledDataset& ds,
                                 const std::string& klass, int obs) {
  const int c = ds.class_index(klass);
  const Eigen::MatrixXd cov = detail::observable_covariance(ds, c, obs);
  const int nt = static_cast<int>(cov.rows());
  const Eigen::VectorXd r = detail::lag_sums(cov);
  Eigen::VectorXd psd(nt / 2 + 1);
  for (int m = 0; m <= nt / 2; ++m) {
    double s = r[0];
    for (int l = 1; l < nt; ++l)
      s += std::cos(2.0 * std::numbers::pi * m * l / nt) * r[l];
    psd[m] = s;
  }
  return psd;
}

// FFT-based evaluation of the same sum (radix-2, n_time must be a power of
// two); cross-check path for noise_psd.
inline Eigen::VectorXd noise_psd_fft(const LabeledDataset& ds,
                                     const std::string& klass, int obs) {
  const int c = ds.class_index(klass);
  const Eigen::MatrixXd cov = detail::observable_covariance(ds, c, obs);
  const int nt = static_cast<int>(cov.rows());
  if (nt & (nt - 1))
    throw InvalidArgument("noise_psd_fft: n_time must be a power of two");
  const Eigen::VectorXd r = detail::lag_sums(cov);

  std::vector<std::complex<double>> a(nt);
  for (int l = 0; l < nt; ++l) a[l] = r[l];
  // iterative Cooley-Tukey, decimation in time
  for (int i = 1, j = 0; i < nt; ++i) {
    int bit = nt >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= nt; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / len;
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (int i = 0; i < nt; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (int k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  Eigen::VectorXd psd(nt / 2 + 1);
  for (int m = 0; m <= nt / 2; ++m) psd[m] = a[m].real();
  return psd;
}

// Batch classifier produced by a pipeline's training stage; labels are in
// class-major, shot-minor order of the evaluated dataset.
using BatchClassifier = std::function<std::vector<int>(const LabeledDataset&)>;
using PipelineTrainer = std::function<BatchClassifier(const LabeledDataset&)>;

struct CrossValResult {
  double fidelity_mean = 0.0;
  double fidelity_std = 0.0;  // sample standard deviation over iterations
  std::vector<EvalReport> iterations;
  double train_frac = 0.0;
  int n_iter = 0;
  std::uint64_t seed = 0;
  double label_flip_prob = 0.0;
};

// Repeated class-balanced random splits; optional label corruption applied to
// the training labels only. Split indices depend only on (seed, iteration,
// class, shot counts), so results are reproducible and merge by iteration
// index.
inline CrossValResult cross_validate(const LabeledDataset& ds,
                                     const PipelineTrainer& trainer,
                                     double train_frac = 0.8, int n_iter = 10,
                                     std::uint64_t seed = 0,
                                     double label_flip_prob = 0.0) {
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw InvalidArgument("cross_validate: train_frac must be in (0, 1)");
  if (n_iter < 1) throw InvalidArgument("cross_validate: n_iter must be >= 1");
  if (label_flip_prob < 0.0 || label_flip_prob > 1.0)
    throw InvalidArgument("cross_validate: label_flip_prob must be in [0, 1]");
  const int C = ds.n_classes();

  CrossValResult res;
  res.train_frac = train_frac;
  res.n_iter = n_iter;
  res.seed = seed;
  res.label_flip_prob = label_flip_prob;

  for (int it = 0; it < n_iter; ++it) {
    std::vector<std::vector<int>> train_idx(C), eval_idx(C);
    for (int c = 0; c < C; ++c) {
      const int n = ds.n_shots(c);
      const int n_train =
          std::clamp(static_cast<int>(std::llround(train_frac * n)), 1, n - 1);
      if (n < 2)
        throw TooFewShots("cross_validate: class '" + ds.classes[c] +
                          "' cannot be split");
      std::vector<int> order(n);
      for (int i = 0; i < n; ++i) order[i] = i;
      RandomStream rng(derive_key(seed, {hash_str("cv-split"),
                                         static_cast<std::uint64_t>(it),
                                         static_cast<std::uint64_t>(c)}));
      for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.next_u64() % (i + 1));
        std::swap(order[i], order[j]);
      }
      train_idx[c].assign(order.begin(), order.begin() + n_train);
      eval_idx[c].assign(order.begin() + n_train, order.end());
    }

    LabeledDataset train = subset(ds, train_idx);
    if (label_flip_prob > 0.0) {
      RandomStream rng(derive_key(seed, {hash_str("cv-flip"),
                                         static_cast<std::uint64_t>(it)}));
      LabeledDataset flipped;
      flipped.classes = train.classes;
      flipped.dt = train.dt;
      flipped.shots.resize(C);
      for (int c = 0; c < C; ++c)
        for (auto& rec : train.shots[c]) {
          int label = c;
          if (rng.uniform01() < label_flip_prob) {
            const int shift = 1 + static_cast<int>(rng.next_u64() % (C - 1));
            label = (c + shift) % C;
          }
          flipped.shots[label].push_back(std::move(rec));
        }
      train = std::move(flipped);
      for (int c = 0; c < C; ++c)
        if (train.shots[c].empty())
          throw TooFewShots("cross_validate: label flips emptied a class");
    }

    const LabeledDataset eval_set = subset(ds, eval_idx);
    const BatchClassifier classifier = trainer(train);
    const std::vector<int> pred = classifier(eval_set);
    res.iterations.push_back(fidelity(truth_labels(eval_set), pred, C));
  }

  double mean = 0.0;
  for (const auto& rep : res.iterations) mean += rep.fidelity;
  mean /= n_iter;
  double var = 0.0;
  for (const auto& rep : res.iterations) {
    const double d = rep.fidelity - mean;
    var += d * d;
  }
  res.fidelity_mean = mean;
  res.fidelity_std = n_iter > 1 ? std::sqrt(var / (n_iter - 1)) : 0.0;
  return res;
}

}  // namespace tpp
