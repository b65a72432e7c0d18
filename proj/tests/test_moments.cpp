#include <catch2/catch_amalgamated.hpp>

#include "tpp/moments.hpp"
#include "tpp/rng.hpp"
#include "tpp/simulate.hpp"

using namespace tpp;

namespace {

LabeledDataset scalar_dataset(const std::vector<std::vector<double>>& per_class) {
  LabeledDataset ds;
  ds.dt = 1.0;
  for (std::size_t c = 0; c < per_class.size(); ++c)
    ds.classes.push_back("c" + std::to_string(c));
  ds.shots.resize(per_class.size());
  for (std::size_t c = 0; c < per_class.size(); ++c)
    for (double v : per_class[c]) {
      HeterodyneRecord r;
      r.dt = 1.0;
      r.values.resize(1, 1);
      r.values(0, 0) = v;
      ds.shots[c].push_back(r);
    }
  return ds;
}

}  // namespace

TEST_CASE("identical shots give zero covariance") {
  LabeledDataset ds;
  ds.dt = 1.0;
  ds.classes = {"a", "b"};
  ds.shots.resize(2);
  HeterodyneRecord r;
  r.dt = 1.0;
  r.values.resize(1, 2);
  r.values << 1.0, 1.0;
  ds.shots[0] = {r, r};
  r.values << 2.0, -1.0;
  ds.shots[1] = {r, r};
  const MomentSummary m = estimate_moments(ds);
  CHECK(m.means[0].isApprox(Eigen::Vector2d(1.0, 1.0)));
  CHECK(m.covariances[0].isZero(0.0));
  CHECK(m.covariances[1].isZero(0.0));
}

TEST_CASE("biased 1/N covariance of {0, 2}") {
  const auto ds = scalar_dataset({{0.0, 2.0}, {5.0, 5.0}});
  const MomentSummary m = estimate_moments(ds);
  CHECK(m.means[0][0] == Catch::Approx(1.0));
  CHECK(m.covariances[0](0, 0) == Catch::Approx(1.0));  // 1/N, not 1/(N-1)
}

TEST_CASE("too few shots per class") {
  const auto ds = scalar_dataset({{0.0, 2.0}, {5.0}});
  CHECK_THROWS_AS(estimate_moments(ds), TooFewShots);
}

TEST_CASE("V matches a brute-force double-loop oracle") {
  RandomStream rng(5);
  LabeledDataset ds;
  ds.dt = 1.0;
  ds.classes = {"a", "b"};
  ds.shots.resize(2);
  const int d_obs = 2, d_time = 3;
  for (int c = 0; c < 2; ++c)
    for (int n = 0; n < 4; ++n) {
      HeterodyneRecord r;
      r.dt = 1.0;
      r.values.resize(d_obs, d_time);
      for (int m = 0; m < d_obs; ++m)
        for (int i = 0; i < d_time; ++i) r.values(m, i) = rng.gaussian();
      ds.shots[c].push_back(r);
    }
  const MomentSummary mom = estimate_moments(ds);

  const int d = d_obs * d_time;
  Eigen::MatrixXd v_oracle = Eigen::MatrixXd::Zero(d, d);
  for (int c = 0; c < 2; ++c) {
    const int n = static_cast<int>(ds.shots[c].size());
    Eigen::VectorXd s = Eigen::VectorXd::Zero(d);
    for (const auto& rec : ds.shots[c]) s += flatten(rec);
    s /= n;
    for (const auto& rec : ds.shots[c]) {
      const Eigen::VectorXd z = flatten(rec) - s;
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) v_oracle(j, k) += z[j] * z[k] / n;
    }
  }
  CHECK((mom.V - v_oracle).cwiseAbs().maxCoeff() < 1e-12);

  for (const auto& cov : mom.covariances)
    CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() <=
          1e-12 * cov.cwiseAbs().maxCoeff());

  // Gram matrix has rank <= C.
  Eigen::FullPivLU<Eigen::MatrixXd> lu(mom.G);
  CHECK(lu.rank() <= 2);
}

TEST_CASE("moment estimation is invariant to shot order within a class") {
  RandomStream rng(9);
  auto values = std::vector<std::vector<double>>{{}, {}};
  for (int n = 0; n < 7; ++n) {
    values[0].push_back(rng.gaussian());
    values[1].push_back(rng.gaussian() + 3.0);
  }
  const MomentSummary a = estimate_moments(scalar_dataset(values));
  std::reverse(values[0].begin(), values[0].end());
  std::swap(values[1][0], values[1][4]);
  const MomentSummary b = estimate_moments(scalar_dataset(values));
  CHECK((a.V - b.V).cwiseAbs().maxCoeff() < 1e-12 * a.V.cwiseAbs().maxCoeff());
  CHECK((a.means[0] - b.means[0]).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("white-noise variance follows the 1/dt convention") {
  CavityConfig cfg;
  cfg.kappa = 1.0e6;
  cfg.dt = 2.0e-8;
  cfg.t_meas = 32 * cfg.dt;
  cfg.t_on = 0.0;
  cfg.t_off = 0.0;
  cfg.eta = 0.0;
  cfg.chi = {{"e", 0.0}, {"g", 0.0}};
  NoiseSpec noise;
  noise.model = NoiseModel::White;
  const LabeledDataset ds = simulate(cfg, noise, {"e", "g"}, 10000, 21);
  const MomentSummary m = estimate_moments(ds);
  const Eigen::VectorXd diag = m.V.diagonal() / 2.0;  // V sums over C=2 classes
  const double want = 1.0 / cfg.dt;
  for (int i = 0; i < diag.size(); ++i)
    CHECK(std::abs(diag[i] - want) < 0.05 * want);
}
