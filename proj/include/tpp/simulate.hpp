#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "tpp/cavity.hpp"
#include "tpp/errors.hpp"
#include "tpp/parallel.hpp"
#include "tpp/record.hpp"
#include "tpp/rng.hpp"

namespace tpp {

namespace detail {

// da/dt = -lam a - i eta with lam = i(chi - delta_da) + kappa/2, drive held
// constant over the step.
inline std::complex<double> rk4_step(std::complex<double> a,
                                     std::complex<double> lam, double eta,
                                     double h) {
  const std::complex<double> drive(0.0, -eta);
  auto f = [&](std::complex<double> x) { return -lam * x + drive; };
  const std::complex<double> k1 = f(a);
  const std::complex<double> k2 = f(a + 0.5 * h * k1);
  const std::complex<double> k3 = f(a + 0.5 * h * k2);
  const std::complex<double> k4 = f(a + h * k3);
  return a + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline bool drive_on(const CavityConfig& cfg, double t) {
  return t >= cfg.t_on && t < cfg.t_off;
}

inline HeterodyneRecord mean_trace_impl(const CavityConfig& cfg, double chi) {
  const int nt = cfg.n_time();
  const std::complex<double> lam(cfg.kappa / 2.0, chi - cfg.delta_da);
  const double scale = std::sqrt(2.0 * cfg.kappa);
  HeterodyneRecord rec;
  rec.dt = cfg.dt;
  rec.values.resize(2, nt);
  std::complex<double> a(0.0, 0.0);
  for (int i = 0; i < nt; ++i) {
    rec.values(0, i) = scale * a.real();
    rec.values(1, i) = scale * a.imag();
    const double eta = drive_on(cfg, i * cfg.dt) ? cfg.eta : 0.0;
    a = rk4_step(a, lam, eta, cfg.dt);
  }
  return rec;
}

}  // namespace detail

// Piecewise-constant jump trajectory of the multi-level atom: state indices
// refer to cfg.chi order. times[k] is when the state switches to states[k+1].
struct JumpPath {
  std::vector<double> times;
  std::vector<int> states;  // states[0] = initial; size = times.size() + 1
};

// Exponential-competition (Gillespie) sampling of a continuous-time Markov
// chain with rate matrix rates(j, k) for j -> k.
inline JumpPath sample_jump_path(RandomStream& rng, const Eigen::MatrixXd& rates,
                                 int initial, double t_total) {
  JumpPath path;
  path.states.push_back(initial);
  int state = initial;
  double t = 0.0;
  const int S = static_cast<int>(rates.rows());
  while (true) {
    double total = 0.0;
    for (int k = 0; k < S; ++k)
      if (k != state) total += rates(state, k);
    if (total <= 0.0) break;
    t += rng.exponential(total);
    if (t >= t_total) break;
    double u = rng.uniform01() * total;
    int dest = -1;
    for (int k = 0; k < S; ++k) {
      if (k == state) continue;
      u -= rates(state, k);
      if (u < 0.0) {
        dest = k;
        break;
      }
    }
    if (dest < 0) {  // rounding at u ~ total: take the last nonzero channel
      for (int k = S - 1; k >= 0; --k)
        if (k != state && rates(state, k) > 0.0) {
          dest = k;
          break;
        }
    }
    path.times.push_back(t);
    path.states.push_back(dest);
    state = dest;
  }
  return path;
}

// Noiseless heterodyne means for one class: fixed-step RK4 integration of the
// cavity mean field, sampled at interval starts, with I = sqrt(2 kappa) Re a,
// Q = sqrt(2 kappa) Im a.
inline HeterodyneRecord cavity_mean_trace(const CavityConfig& cfg,
                                          const std::string& klass) {
  cfg.validate();
  if (cfg.kappa * cfg.dt > 0.1)
    warn("cavity_mean_trace: kappa*dt > 0.1, RK4 step may be coarse");
  return detail::mean_trace_impl(cfg, cfg.chi_for(klass));
}

namespace detail {

// Mean trace for a shot following a jump path: the mean-field ODE is
// integrated piecewise, chi switching at jump times within each sample step.
// With no jumps in a step the single full step is arithmetically identical to
// mean_trace_impl.
inline HeterodyneRecord jump_mean_trace(const CavityConfig& cfg,
                                        const std::vector<double>& chi_by_state,
                                        const JumpPath& path) {
  const int nt = cfg.n_time();
  const double scale = std::sqrt(2.0 * cfg.kappa);
  HeterodyneRecord rec;
  rec.dt = cfg.dt;
  rec.values.resize(2, nt);
  std::complex<double> a(0.0, 0.0);
  std::size_t next_jump = 0;
  int state = path.states[0];
  for (int i = 0; i < nt; ++i) {
    rec.values(0, i) = scale * a.real();
    rec.values(1, i) = scale * a.imag();
    const double t0 = i * cfg.dt;
    const double t1 = t0 + cfg.dt;
    const double eta = drive_on(cfg, t0) ? cfg.eta : 0.0;
    double done = 0.0;  // integrated portion of this step
    while (next_jump < path.times.size() && path.times[next_jump] < t1) {
      const double seg = path.times[next_jump] - t0 - done;
      if (seg > 0.0) {
        const std::complex<double> lam(cfg.kappa / 2.0,
                                       chi_by_state[state] - cfg.delta_da);
        a = rk4_step(a, lam, eta, seg);
        done += seg;
      }
      state = path.states[next_jump + 1];
      ++next_jump;
    }
    const std::complex<double> lam(cfg.kappa / 2.0,
                                   chi_by_state[state] - cfg.delta_da);
    a = rk4_step(a, lam, eta, done == 0.0 ? cfg.dt : cfg.dt - done);
  }
  return rec;
}

}  // namespace detail

// Discrete one-pole response (zero-order hold) with pole rate gamma_eff and
// DC amplitude gain, applied per observable. Models the finite
// gain-bandwidth amplifier acting on the mean field.
inline HeterodyneRecord lowpass_record(const HeterodyneRecord& in, double gamma_eff,
                                       double dc_gain = 1.0) {
  const double a = std::exp(-gamma_eff * in.dt);
  HeterodyneRecord out;
  out.dt = in.dt;
  out.values.resizeLike(in.values);
  for (int m = 0; m < in.n_obs(); ++m) {
    double y = 0.0;
    for (int i = 0; i < in.n_time(); ++i) {
      y = a * y + (1.0 - a) * in.values(m, i);
      out.values(m, i) = dc_gain * y;
    }
  }
  return out;
}

// 1/f noise synthesized on the FFT frequency grid [1/T_meas, 1/(2 dt)], total
// per-sample power matched to `power`. Cos/sin tables index as (k*i) mod n.
class PinkSynth {
public:
  PinkSynth() = default;
  PinkSynth(int n_time, double power) : n_(n_time) {
    const int K = n_ / 2;
    if (K < 1) throw InvalidArgument("pink noise needs at least 2 samples");
    double norm = 0.0;
    amps_.resize(K);
    for (int k = 1; k <= K; ++k) {
      amps_[k - 1] = 1.0 / k;  // S ~ 1/f with f_k = k / (n dt)
      norm += amps_[k - 1];
    }
    const double scale = power / norm;
    for (auto& a : amps_) a = std::sqrt(a * scale);
    cos_.resize(n_);
    sin_.resize(n_);
    for (int m = 0; m < n_; ++m) {
      const double ang = 2.0 * std::numbers::pi * m / n_;
      cos_[m] = std::cos(ang);
      sin_[m] = std::sin(ang);
    }
  }

  // Adds one realization to row `m` of `values`.
  void add(RandomStream& rng, Eigen::MatrixXd& values, int m) const {
    const int K = static_cast<int>(amps_.size());
    for (int k = 1; k <= K; ++k) {
      const double ca = amps_[k - 1] * rng.gaussian();
      const double sa = amps_[k - 1] * rng.gaussian();
      int idx = 0;
      for (int i = 0; i < n_; ++i) {
        values(m, i) += ca * cos_[idx] + sa * sin_[idx];
        idx += k;
        if (idx >= n_) idx -= n_;
      }
    }
  }

private:
  int n_ = 0;
  std::vector<double> amps_;
  std::vector<double> cos_, sin_;
};

// Labeled synthetic dataset under the requested noise model. Output is a pure
// function of (cfg, noise, classes, n_shots, seed): shot n of class p draws
// from an independent stream keyed by (seed, p, n), so results do not depend
// on the thread count.
inline LabeledDataset simulate(const CavityConfig& cfg, const NoiseSpec& noise,
                               const std::vector<std::string>& classes,
                               int n_shots, std::uint64_t seed) {
  cfg.validate();
  noise.validate();
  if (classes.empty()) throw InvalidArgument("simulate: no classes requested");
  if (n_shots < 0) throw InvalidArgument("simulate: n_shots must be >= 0");
  if (cfg.kappa * cfg.dt > 0.1)
    warn("simulate: kappa*dt > 0.1, RK4 step may be coarse");
  for (const auto& cls : classes) (void)cfg.chi_for(cls);

  const int nt = cfg.n_time();
  const double vac_sd = std::sqrt(1.0 / cfg.dt);

  LabeledDataset ds;
  ds.classes = classes;
  ds.dt = cfg.dt;
  ds.shots.resize(classes.size());
  for (auto& cls : ds.shots) cls.resize(n_shots);

  const bool jumps = noise.model == NoiseModel::Jumps;
  std::vector<HeterodyneRecord> means(classes.size());
  if (!jumps)
    for (std::size_t c = 0; c < classes.size(); ++c)
      means[c] = detail::mean_trace_impl(cfg, cfg.chi_for(classes[c]));

  double gamma_eff = 0.0, ou_power = 0.0, cl_sd = 0.0;
  if (noise.model == NoiseModel::Amplifier) {
    gamma_eff = noise.gamma_over_kappa * cfg.kappa / std::sqrt(noise.gain_tr);
    ou_power = noise.gain_tr / cfg.dt;
    cl_sd = std::sqrt(noise.n_cl / cfg.dt);
    // amplitude gain sqrt(G_tr) with bandwidth gamma/sqrt(G_tr): fixed
    // gain-bandwidth product; the OU term is the amplified vacuum at the
    // matching power G_tr.
    for (auto& m : means) m = lowpass_record(m, gamma_eff, std::sqrt(noise.gain_tr));
  }

  PinkSynth pink;
  double white_sd = vac_sd;
  if (noise.model == NoiseModel::PinkMix) {
    pink = PinkSynth(nt, noise.sigma_p * noise.sigma_p / cfg.dt);
    white_sd = std::sqrt((1.0 + noise.sigma_w * noise.sigma_w) / cfg.dt);
  }

  // Jump machinery: the CTMC runs over every class with a chi entry, so
  // transitions may leave the label set.
  Eigen::MatrixXd rates;
  std::vector<double> chi_by_state;
  std::vector<int> label_state;
  if (jumps) {
    const int S = static_cast<int>(cfg.chi.size());
    rates = Eigen::MatrixXd::Zero(S, S);
    chi_by_state.resize(S);
    auto state_of = [&](const std::string& name) {
      for (int s = 0; s < S; ++s)
        if (cfg.chi[s].first == name) return s;
      throw UnknownClass("jump transition references class '" + name +
                         "' with no chi entry");
    };
    for (int s = 0; s < S; ++s) chi_by_state[s] = cfg.chi[s].second;
    for (const auto& tr : noise.transitions)
      rates(state_of(tr.from), state_of(tr.to)) += tr.rate;
    label_state.resize(classes.size());
    for (std::size_t c = 0; c < classes.size(); ++c)
      label_state[c] = state_of(classes[c]);
  }

  const std::uint64_t shot_tag = hash_str("shot");
  parallel_for(0, static_cast<int>(classes.size()) * n_shots, [&](int flat) {
    const int c = flat / n_shots;
    const int n = flat % n_shots;
    RandomStream rng(derive_key(seed, {shot_tag, static_cast<std::uint64_t>(c),
                                       static_cast<std::uint64_t>(n)}));
    HeterodyneRecord rec;
    switch (noise.model) {
      case NoiseModel::White: {
        rec = means[c];
        for (int m = 0; m < 2; ++m)
          for (int i = 0; i < nt; ++i) rec.values(m, i) += vac_sd * rng.gaussian();
        break;
      }
      case NoiseModel::IqVariances: {
        rec = means[c];
        const double sd_i = std::sqrt(noise.sigma_i2 / cfg.dt);
        const double sd_q = std::sqrt(noise.sigma_q2 / cfg.dt);
        for (int i = 0; i < nt; ++i) rec.values(0, i) += sd_i * rng.gaussian();
        for (int i = 0; i < nt; ++i) rec.values(1, i) += sd_q * rng.gaussian();
        break;
      }
      case NoiseModel::Amplifier: {
        rec = means[c];
        const double a = std::exp(-gamma_eff * cfg.dt);
        const double innov = std::sqrt(ou_power * (1.0 - a * a));
        for (int m = 0; m < 2; ++m) {
          double x = std::sqrt(ou_power) * rng.gaussian();
          rec.values(m, 0) += x;
          for (int i = 1; i < nt; ++i) {
            x = a * x + innov * rng.gaussian();
            rec.values(m, i) += x;
          }
          if (cl_sd > 0.0)
            for (int i = 0; i < nt; ++i) rec.values(m, i) += cl_sd * rng.gaussian();
        }
        break;
      }
      case NoiseModel::Jumps: {
        const JumpPath path =
            sample_jump_path(rng, rates, label_state[c], cfg.t_meas);
        rec = detail::jump_mean_trace(cfg, chi_by_state, path);
        for (int m = 0; m < 2; ++m)
          for (int i = 0; i < nt; ++i) rec.values(m, i) += vac_sd * rng.gaussian();
        break;
      }
      case NoiseModel::PinkMix: {
        rec = means[c];
        for (int m = 0; m < 2; ++m) {
          for (int i = 0; i < nt; ++i) rec.values(m, i) += white_sd * rng.gaussian();
          if (noise.sigma_p > 0.0) pink.add(rng, rec.values, m);
        }
        break;
      }
    }
    ds.shots[c][n] = std::move(rec);
  });
  return ds;
}

}  // namespace tpp
