#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "tpp/errors.hpp"
#include "tpp/filters.hpp"
#include "tpp/model.hpp"
#include "tpp/record.hpp"
#include "tpp/rng.hpp"

namespace tpp {

// Per-class Gaussian likelihood model in filtered-feature space. Full (not
// diagonal) covariance per class; priors uniform.
struct GaussianDiscriminator {
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covariances;
  std::vector<Eigen::MatrixXd> chol;  // lower factors of the jittered covariances
  std::vector<double> log_det;

  int n_classes() const { return static_cast<int>(means.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }
};

inline GaussianDiscriminator fit_gaussian(
    const std::vector<std::vector<Eigen::VectorXd>>& features) {
  if (features.empty()) throw InvalidArgument("fit_gaussian: no classes");
  GaussianDiscriminator disc;
  const int dim = static_cast<int>(features.front().front().size());
  for (const auto& cls : features) {
    if (cls.size() < 2) throw TooFewShots("fit_gaussian: need >= 2 samples per class");
    const double n = static_cast<double>(cls.size());
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(dim);
    for (const auto& x : cls) mu += x;
    mu /= n;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& x : cls) {
      if (x.size() != dim) throw DimensionMismatch("fit_gaussian: feature size varies");
      cov.selfadjointView<Eigen::Lower>().rankUpdate(x - mu, 1.0 / n);
    }
    cov = cov.selfadjointView<Eigen::Lower>();

    const double base = cov.trace() / dim;
    double jitter = 1e-12 * (base > 0.0 ? base : 1.0);
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::MatrixXd c = cov;
      c.diagonal().array() += jitter;
      llt.compute(c);
      if (llt.info() == Eigen::Success) {
        cov = c;
        break;
      }
      jitter *= 100.0;
    }
    if (llt.info() != Eigen::Success)
      throw NotPsd("fit_gaussian: covariance not factorizable");

    double ld = 0.0;
    for (int i = 0; i < dim; ++i) ld += 2.0 * std::log(llt.matrixL()(i, i));
    disc.means.push_back(std::move(mu));
    disc.covariances.push_back(cov);
    disc.chol.push_back(llt.matrixL());
    disc.log_det.push_back(ld);
  }
  return disc;
}

inline double log_likelihood(const GaussianDiscriminator& disc, int c,
                             const Eigen::VectorXd& x) {
  const Eigen::VectorXd u =
      disc.chol[c].triangularView<Eigen::Lower>().solve(x - disc.means[c]);
  return -0.5 * u.squaredNorm() - 0.5 * disc.log_det[c];
}

// Maximum-likelihood label; ties break toward the lower class index.
inline int classify_gaussian(const GaussianDiscriminator& disc,
                             const Eigen::VectorXd& x) {
  if (x.size() != disc.dim())
    throw DimensionMismatch("classify_gaussian: feature dimension mismatch");
  int best = 0;
  double best_ll = log_likelihood(disc, 0, x);
  for (int c = 1; c < disc.n_classes(); ++c) {
    const double ll = log_likelihood(disc, c, x);
    if (ll > best_ll) {
      best = c;
      best_ll = ll;
    }
  }
  return best;
}

// argmax of W x + b; ties break toward the lower class index.
inline int classify_argmax(const TrainedTpp& model, const HeterodyneRecord& rec) {
  const Eigen::VectorXd y = predict(model, rec);
  int best = 0;
  for (int c = 1; c < y.size(); ++c)
    if (y[c] > y[best]) best = c;
  return best;
}

// One scalar feature per observable per filter: filter-major, observable-minor.
inline Eigen::VectorXd filter_features(const std::vector<Eigen::VectorXd>& filters,
                                       const HeterodyneRecord& rec) {
  const int no = rec.n_obs(), nt = rec.n_time();
  Eigen::VectorXd feat(static_cast<Eigen::Index>(filters.size()) * no);
  const Eigen::VectorXd x = flatten(rec);
  for (std::size_t k = 0; k < filters.size(); ++k) {
    if (filters[k].size() != x.size())
      throw DimensionMismatch("filter_features: filter/record size mismatch");
    for (int m = 0; m < no; ++m)
      feat[k * no + m] =
          filters[k].segment(m * nt, nt).dot(x.segment(m * nt, nt));
  }
  return feat;
}

namespace detail {

inline std::vector<std::vector<Eigen::VectorXd>> features_per_class(
    const std::vector<Eigen::VectorXd>& filters, const LabeledDataset& ds) {
  std::vector<std::vector<Eigen::VectorXd>> out(ds.n_classes());
  for (int c = 0; c < ds.n_classes(); ++c) {
    out[c].reserve(ds.shots[c].size());
    for (const auto& rec : ds.shots[c]) out[c].push_back(filter_features(filters, rec));
  }
  return out;
}

}  // namespace detail

// Filtered Gaussian discriminant analysis: per-observable scalar features
// from the given filters, Gaussian discriminator fitted on the training set,
// labels predicted for the evaluation set (class-major, shot-minor order).
inline std::vector<int> fgda_pipeline(const std::vector<Eigen::VectorXd>& filters,
                                      const LabeledDataset& train,
                                      const LabeledDataset& eval_set) {
  const GaussianDiscriminator disc =
      fit_gaussian(detail::features_per_class(filters, train));
  std::vector<int> labels;
  labels.reserve(eval_set.total_shots());
  for (int c = 0; c < eval_set.n_classes(); ++c)
    for (const auto& rec : eval_set.shots[c])
      labels.push_back(classify_gaussian(disc, filter_features(filters, rec)));
  return labels;
}

// C-1 one-versus-all FGDA instances (C = 3) combined by a decision table.
// scheme = (p, q) picks the two one-versus-all filters. The ambiguous joint
// outcome (both instances claim their class) resolves by a seeded choice.
inline std::vector<int> multi_fgda(const LabeledDataset& train,
                                   const LabeledDataset& eval_set,
                                   const std::string& class_p,
                                   const std::string& class_q,
                                   std::uint64_t seed) {
  if (train.n_classes() != 3)
    throw InvalidArgument("multi_fgda: built for 3-class problems");
  const int p = train.class_index(class_p);
  const int q = train.class_index(class_q);
  if (p == q) throw InvalidArgument("multi_fgda: scheme classes must differ");
  const int r = 3 - p - q;

  struct Instance {
    std::vector<Eigen::VectorXd> filters;
    GaussianDiscriminator disc;  // class 0: target, class 1: rest
  };
  auto make_instance = [&](int target, const std::string& name) {
    Instance inst;
    inst.filters = {one_vs_all_filter(train, name)};
    std::vector<std::vector<Eigen::VectorXd>> feats(2);
    for (int c = 0; c < 3; ++c)
      for (const auto& rec : train.shots[c])
        feats[c == target ? 0 : 1].push_back(filter_features(inst.filters, rec));
    inst.disc = fit_gaussian(feats);
    return inst;
  };
  const Instance inst_p = make_instance(p, class_p);
  const Instance inst_q = make_instance(q, class_q);

  RandomStream tie_rng(derive_key(seed, {hash_str("multi-fgda")}));
  std::vector<int> labels;
  labels.reserve(eval_set.total_shots());
  for (int c = 0; c < eval_set.n_classes(); ++c)
    for (const auto& rec : eval_set.shots[c]) {
      const bool is_p =
          classify_gaussian(inst_p.disc, filter_features(inst_p.filters, rec)) == 0;
      const bool is_q =
          classify_gaussian(inst_q.disc, filter_features(inst_q.filters, rec)) == 0;
      int label;
      if (is_p && !is_q) label = p;
      else if (!is_p && is_q) label = q;
      else if (!is_p && !is_q) label = r;
      else label = tie_rng.uniform01() < 0.5 ? p : q;
      labels.push_back(label);
    }
  return labels;
}

}  // namespace tpp
