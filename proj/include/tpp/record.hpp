#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tpp/errors.hpp"

namespace tpp {

// One measurement shot: n_obs observables, each a time series of n_time
// samples at interval dt. For heterodyne records n_obs = 2 with row 0 the I
// quadrature and row 1 the Q quadrature.
struct HeterodyneRecord {
  Eigen::MatrixXd values;  // n_obs x n_time
  double dt = 0.0;

  int n_obs() const { return static_cast<int>(values.rows()); }
  int n_time() const { return static_cast<int>(values.cols()); }

  void validate() const {
    if (n_obs() < 1 || n_time() < 1)
      throw InvalidArgument("record needs at least one observable and one sample");
    if (!(dt > 0.0)) throw InvalidArgument("record dt must be > 0");
    if (!values.allFinite())
      throw InvalidArgument("record contains non-finite values");
  }
};

// Observable-major concatenation: x[m*n_time + i] = values(m, i).
inline Eigen::VectorXd flatten(const HeterodyneRecord& r) {
  const int no = r.n_obs(), nt = r.n_time();
  Eigen::VectorXd x(static_cast<Eigen::Index>(no) * nt);
  for (int m = 0; m < no; ++m)
    x.segment(static_cast<Eigen::Index>(m) * nt, nt) = r.values.row(m).transpose();
  return x;
}

inline HeterodyneRecord unflatten(const Eigen::VectorXd& x, int n_obs,
                                  int n_time, double dt) {
  if (x.size() != static_cast<Eigen::Index>(n_obs) * n_time)
    throw DimensionMismatch("unflatten: vector length does not match n_obs*n_time");
  HeterodyneRecord r;
  r.dt = dt;
  r.values.resize(n_obs, n_time);
  for (int m = 0; m < n_obs; ++m)
    r.values.row(m) = x.segment(static_cast<Eigen::Index>(m) * n_time, n_time).transpose();
  return r;
}

// Shots grouped by known class label. Class order is canonical: it fixes the
// one-hot target index p used everywhere downstream.
struct LabeledDataset {
  std::vector<std::string> classes;
  std::vector<std::vector<HeterodyneRecord>> shots;  // [class][shot]
  double dt = 0.0;

  int n_classes() const { return static_cast<int>(classes.size()); }

  int n_obs() const {
    for (const auto& cls : shots)
      if (!cls.empty()) return cls.front().n_obs();
    return 0;
  }

  int n_time() const {
    for (const auto& cls : shots)
      if (!cls.empty()) return cls.front().n_time();
    return 0;
  }

  int dim() const { return n_obs() * n_time(); }

  int n_shots(int c) const { return static_cast<int>(shots.at(c).size()); }

  int total_shots() const {
    int n = 0;
    for (const auto& cls : shots) n += static_cast<int>(cls.size());
    return n;
  }

  int class_index(const std::string& name) const {
    for (int c = 0; c < n_classes(); ++c)
      if (classes[c] == name) return c;
    throw UnknownClass("unknown class '" + name + "'");
  }

  void validate() const {
    if (n_classes() < 2) throw InvalidArgument("dataset needs at least 2 classes");
    if (shots.size() != classes.size())
      throw InvalidArgument("dataset shots/classes size mismatch");
    if (!(dt > 0.0)) throw InvalidArgument("dataset dt must be > 0");
    for (int c = 0; c < n_classes(); ++c)
      for (int c2 = c + 1; c2 < n_classes(); ++c2)
        if (classes[c] == classes[c2])
          throw InvalidArgument("duplicate class name '" + classes[c] + "'");
    const int no = n_obs(), nt = n_time();
    for (const auto& cls : shots)
      for (const auto& rec : cls) {
        rec.validate();
        if (rec.n_obs() != no || rec.n_time() != nt)
          throw DimensionMismatch("dataset records have inconsistent shapes");
        if (rec.dt != dt)
          throw DimensionMismatch("dataset records have inconsistent dt");
      }
  }
};

// Ground-truth labels in evaluation order (class-major, shot-minor).
inline std::vector<int> truth_labels(const LabeledDataset& ds) {
  std::vector<int> y;
  y.reserve(ds.total_shots());
  for (int c = 0; c < ds.n_classes(); ++c)
    for (std::size_t n = 0; n < ds.shots[c].size(); ++n) y.push_back(c);
  return y;
}

// Per-class subset by shot indices.
inline LabeledDataset subset(const LabeledDataset& ds,
                             const std::vector<std::vector<int>>& idx) {
  if (idx.size() != ds.shots.size())
    throw DimensionMismatch("subset: index lists must match class count");
  LabeledDataset out;
  out.classes = ds.classes;
  out.dt = ds.dt;
  out.shots.resize(ds.shots.size());
  for (std::size_t c = 0; c < idx.size(); ++c) {
    out.shots[c].reserve(idx[c].size());
    for (int i : idx[c]) out.shots[c].push_back(ds.shots[c].at(i));
  }
  return out;
}

// Keeps time samples [i_begin, i_end) of every record.
inline LabeledDataset slice_time(const LabeledDataset& ds, int i_begin, int i_end) {
  if (i_begin < 0 || i_end <= i_begin || i_end > ds.n_time())
    throw InvalidArgument("slice_time: bad sample range");
  LabeledDataset out;
  out.classes = ds.classes;
  out.dt = ds.dt;
  out.shots.resize(ds.shots.size());
  for (std::size_t c = 0; c < ds.shots.size(); ++c) {
    out.shots[c].reserve(ds.shots[c].size());
    for (const auto& rec : ds.shots[c]) {
      HeterodyneRecord r;
      r.dt = rec.dt;
      r.values = rec.values.middleCols(i_begin, i_end - i_begin);
      out.shots[c].push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace tpp
