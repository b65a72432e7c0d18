#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tpp/errors.hpp"
#include "tpp/record.hpp"

namespace tpp {

enum class TrainMethod {
  NumericLsq,
  ClosedForm,
  WhiteNoiseAnalytic,
  GeneralAnalytic,
};

inline const char* method_name(TrainMethod m) {
  switch (m) {
    case TrainMethod::NumericLsq: return "numeric-lsq";
    case TrainMethod::ClosedForm: return "closed-form";
    case TrainMethod::WhiteNoiseAnalytic: return "white-noise-analytic";
    case TrainMethod::GeneralAnalytic: return "general-analytic";
  }
  return "unknown";
}

inline TrainMethod method_from_name(const std::string& s) {
  if (s == "numeric-lsq") return TrainMethod::NumericLsq;
  if (s == "closed-form") return TrainMethod::ClosedForm;
  if (s == "white-noise-analytic") return TrainMethod::WhiteNoiseAnalytic;
  if (s == "general-analytic") return TrainMethod::GeneralAnalytic;
  throw FormatError("unknown training method '" + s + "'");
}

struct TrainingOptions {
  double lambda = 0.0;
  TrainMethod method = TrainMethod::NumericLsq;
};

// Linear classifier y = W x + b over flattened records. Row k of W is the
// temporal filter applied for class k.
struct TrainedTpp {
  Eigen::MatrixXd W;  // C x (n_obs*n_time)
  Eigen::VectorXd b;  // C
  double lambda = 0.0;
  TrainMethod method = TrainMethod::NumericLsq;
  std::vector<std::string> classes;

  int n_classes() const { return static_cast<int>(W.rows()); }
  int dim() const { return static_cast<int>(W.cols()); }

  void validate() const {
    if (W.rows() != b.size() ||
        W.rows() != static_cast<Eigen::Index>(classes.size()))
      throw DimensionMismatch("model W/b/classes sizes disagree");
  }
};

inline Eigen::VectorXd predict(const TrainedTpp& model,
                               const HeterodyneRecord& record) {
  const Eigen::VectorXd x = flatten(record);
  if (x.size() != model.W.cols())
    throw DimensionMismatch("predict: record dimension does not match model");
  return model.W * x + model.b;
}

}  // namespace tpp
