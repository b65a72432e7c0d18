#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "tpp/errors.hpp"

namespace tpp {

// Dispersive readout configuration. chi holds the per-class cavity shift for
// every class the simulator may encounter (including jump targets outside the
// label set); order of entries is not significant.
struct CavityConfig {
  double kappa = 0.0;     // total cavity linewidth (rad/s)
  double delta_da = 0.0;  // drive-cavity detuning (rad/s)
  double eta = 0.0;       // drive amplitude (rad/s)
  double t_on = 0.0;      // drive window start (s)
  double t_off = 0.0;     // drive window end (s)
  double t_meas = 0.0;    // total record length (s)
  double dt = 0.0;        // sampling interval (s)
  std::vector<std::pair<std::string, double>> chi;  // class -> shift (rad/s)

  int n_time() const { return static_cast<int>(std::llround(t_meas / dt)); }

  double chi_for(const std::string& name) const {
    for (const auto& [cls, value] : chi)
      if (cls == name) return value;
    throw UnknownClass("no dispersive shift for class '" + name + "'");
  }

  void validate() const {
    if (!(kappa > 0.0)) throw InvalidArgument("kappa must be > 0");
    if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
    if (!(eta >= 0.0)) throw InvalidArgument("eta must be >= 0");
    if (t_on < 0.0 || t_on > t_off || t_off > t_meas)
      throw InvalidArgument("drive window must satisfy 0 <= t_on <= t_off <= t_meas");
    const double n = t_meas / dt;
    if (std::abs(n - std::llround(n)) > 1e-9 * n)
      throw InvalidArgument("dt must divide t_meas");
    for (std::size_t i = 0; i < chi.size(); ++i)
      for (std::size_t j = i + 1; j < chi.size(); ++j)
        if (chi[i].first == chi[j].first)
          throw InvalidArgument("duplicate chi entry for class '" + chi[i].first + "'");
  }
};

enum class NoiseModel { White, IqVariances, Amplifier, Jumps, PinkMix };

inline const char* noise_model_name(NoiseModel m) {
  switch (m) {
    case NoiseModel::White: return "white";
    case NoiseModel::IqVariances: return "iq-variances";
    case NoiseModel::Amplifier: return "amplifier";
    case NoiseModel::Jumps: return "jumps";
    case NoiseModel::PinkMix: return "pink-mix";
  }
  return "unknown";
}

inline NoiseModel noise_model_from_name(const std::string& s) {
  if (s == "white") return NoiseModel::White;
  if (s == "iq-variances") return NoiseModel::IqVariances;
  if (s == "amplifier") return NoiseModel::Amplifier;
  if (s == "jumps") return NoiseModel::Jumps;
  if (s == "pink-mix") return NoiseModel::PinkMix;
  throw ConfigError("unknown noise model '" + s + "'");
}

struct NoiseSpec {
  NoiseModel model = NoiseModel::White;

  // iq-variances
  double sigma_i2 = 1.0;
  double sigma_q2 = 1.0;

  // amplifier
  double gain_tr = 1.0;           // transmission power gain G_tr
  double gamma_over_kappa = 5.0;  // bare amplifier linewidth / kappa
  double n_cl = 0.0;              // classical white noise power (photon units)

  // jumps
  struct Transition {
    std::string from, to;
    double rate = 0.0;  // 1/s
  };
  std::vector<Transition> transitions;

  // pink-mix
  double sigma_w = 1.0;
  double sigma_p = 0.0;

  void validate() const {
    if (sigma_i2 < 0 || sigma_q2 < 0 || n_cl < 0 || sigma_w < 0 || sigma_p < 0)
      throw InvalidArgument("noise variances and powers must be >= 0");
    if (!(gain_tr >= 1.0)) throw InvalidArgument("gain_tr must be >= 1");
    if (!(gamma_over_kappa > 0.0))
      throw InvalidArgument("gamma_over_kappa must be > 0");
    for (const auto& t : transitions) {
      if (t.rate < 0.0) throw InvalidArgument("transition rates must be >= 0");
      if (t.from == t.to)
        throw InvalidArgument("transition rate matrix must have zero diagonal");
    }
  }
};

}  // namespace tpp
