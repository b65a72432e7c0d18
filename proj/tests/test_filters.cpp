#include <catch2/catch_amalgamated.hpp>

#include "tpp/filters.hpp"
#include "tpp/moments.hpp"
#include "tpp/rng.hpp"
#include "tpp/simulate.hpp"
#include "tpp/train.hpp"

using namespace tpp;

namespace {

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.dot(b) / (a.norm() * b.norm());
}

// Synthetic moments with chosen means and correlation matrix.
MomentSummary make_moments(const std::vector<Eigen::VectorXd>& means,
                           const Eigen::MatrixXd& V) {
  MomentSummary m;
  const int d = static_cast<int>(means[0].size());
  m.V = V;
  m.G = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t c = 0; c < means.size(); ++c) {
    m.classes.push_back("k" + std::to_string(c));
    m.means.push_back(means[c]);
    m.covariances.push_back(V / static_cast<double>(means.size()));
    m.G += means[c] * means[c].transpose();
  }
  return m;
}

LabeledDataset mean_dataset(const std::vector<Eigen::VectorXd>& means, int n_obs,
                            int n_time) {
  LabeledDataset ds;
  ds.dt = 1.0;
  ds.shots.resize(means.size());
  for (std::size_t c = 0; c < means.size(); ++c) {
    ds.classes.push_back("k" + std::to_string(c));
    ds.shots[c] = {unflatten(means[c], n_obs, n_time, 1.0),
                   unflatten(means[c], n_obs, n_time, 1.0)};
  }
  return ds;
}

}  // namespace

TEST_CASE("whitening basics") {
  CHECK(whitening(Eigen::MatrixXd::Identity(3, 3))
            .isApprox(Eigen::MatrixXd::Identity(3, 3)));

  Eigen::MatrixXd V = Eigen::Vector2d(4.0, 1.0).asDiagonal();
  const Eigen::MatrixXd L = whitening(V);
  CHECK((L.transpose() * L).isApprox(Eigen::Vector2d(0.25, 1.0).asDiagonal().toDenseMatrix(), 1e-12));

  RandomStream rng(3);
  Eigen::MatrixXd A(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) A(i, j) = rng.gaussian();
  const Eigen::MatrixXd spd = A * A.transpose() + Eigen::MatrixXd::Identity(4, 4);
  const Eigen::MatrixXd Ls = whitening(spd);
  CHECK((Ls.transpose() * Ls * spd).isApprox(Eigen::MatrixXd::Identity(4, 4), 1e-8));

  Eigen::MatrixXd neg = Eigen::MatrixXd::Identity(2, 2);
  neg(1, 1) = -1.0;
  CHECK_THROWS_AS(whitening(neg), NotPsd);

  // PSD-but-singular without jitter
  Eigen::MatrixXd sing = Eigen::MatrixXd::Zero(2, 2);
  sing(0, 0) = 1.0;
  CHECK_THROWS_AS(whitening(sing), SingularMoments);
  CHECK_NOTHROW(whitening(sing, 1e-8));
}

TEST_CASE("binary white-noise filter is the matched filter direction") {
  Eigen::VectorXd s1(4), s2(4);
  s1 << 1.0, 2.0, -1.0, 0.5;
  s2 = -s1;
  const auto mom = make_moments({s1, s2}, Eigen::MatrixXd::Identity(4, 4));
  const FilterBank bank = analytic_filters(mom, true);
  CHECK(cosine(bank.filters[0], s1 - s2) == Catch::Approx(1.0).margin(1e-12));
  // binary coefficients are exactly opposite
  CHECK(bank.coefficients(0, 0) == -bank.coefficients(0, 1));
  // constraint closure
  CHECK((bank.filters[0] + bank.filters[1]).cwiseAbs().maxCoeff() <=
        1e-9 * bank.filters[0].cwiseAbs().maxCoeff());
  CHECK(bank.biases.sum() == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("binary general-V filter matches the closed two-state formula") {
  RandomStream rng(17);
  const int d = 6;
  Eigen::VectorXd s1(d), s2(d);
  for (int i = 0; i < d; ++i) {
    s1[i] = rng.gaussian();
    s2[i] = rng.gaussian();
  }
  Eigen::MatrixXd A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = rng.gaussian();
  const Eigen::MatrixXd V = A * A.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
  const auto mom = make_moments({s1, s2}, V);
  const FilterBank bank = analytic_filters(mom, false);

  const Eigen::MatrixXd Vinv = V.inverse();
  auto overlap = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a.transpose() * Vinv * b).value();
  };
  const double m11 = overlap(s1, s1) + 2.0, m12 = overlap(s1, s2) + 1.0;
  const double m21 = m12, m22 = overlap(s2, s2) + 2.0;
  const double q = (m11 - m21) - (m12 - m22);
  const Eigen::VectorXd f_direct = Vinv * (s1 - s2) / q;
  const double b_direct = -(m21 - m22) / q;
  CHECK((bank.filters[0] - f_direct).cwiseAbs().maxCoeff() <
        1e-9 * f_direct.cwiseAbs().maxCoeff());
  CHECK(bank.biases[0] == Catch::Approx(b_direct).margin(1e-9));
}

TEST_CASE("filters reproduce the coefficient expansion") {
  RandomStream rng(29);
  const int d = 8, C = 4;
  std::vector<Eigen::VectorXd> means;
  for (int c = 0; c < C; ++c) {
    Eigen::VectorXd s(d);
    for (int i = 0; i < d; ++i) s[i] = rng.gaussian();
    means.push_back(s);
  }
  Eigen::MatrixXd A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = rng.gaussian();
  const Eigen::MatrixXd V = A * A.transpose() + Eigen::MatrixXd::Identity(d, d);
  const auto mom = make_moments(means, V);
  const FilterBank bank = analytic_filters(mom, false);
  const Eigen::MatrixXd Vinv = V.inverse();
  for (int k = 0; k < C; ++k) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(d);
    for (int p = 0; p < C; ++p) f += bank.coefficients(k, p) * (Vinv * means[p]);
    CHECK((bank.filters[k] - f).cwiseAbs().maxCoeff() <
          1e-8 * bank.filters[k].cwiseAbs().maxCoeff() + 1e-15);
  }
  // sum constraints
  Eigen::VectorXd fsum = Eigen::VectorXd::Zero(d);
  double max_norm = 0.0;
  for (const auto& f : bank.filters) {
    fsum += f;
    max_norm = std::max(max_norm, f.cwiseAbs().maxCoeff());
  }
  CHECK(fsum.cwiseAbs().maxCoeff() <= 1e-9 * max_norm);
  CHECK(bank.biases.sum() == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("scaled isotropic V leaves analytic filters scale-free downstream") {
  Eigen::VectorXd s1(3), s2(3);
  s1 << 1.0, 0.0, 2.0;
  s2 << -1.0, 0.5, 0.0;
  const auto m1 = make_moments({s1, s2}, Eigen::MatrixXd::Identity(3, 3));
  const auto m9 = make_moments({s1, s2}, 9.0 * Eigen::MatrixXd::Identity(3, 3));
  const FilterBank b1 = analytic_filters(m1, false);
  const FilterBank b9 = analytic_filters(m9, false);
  // same direction; scale absorbed in the coefficients
  CHECK(cosine(b1.filters[0], b9.filters[0]) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("coincident class means give the prior-only solution") {
  // The bias/normalization structure keeps Q invertible even here; the
  // least-squares optimum is zero filters with b = 1/C.
  Eigen::VectorXd s(3);
  s << 1.0, 2.0, 3.0;
  const auto mom = make_moments({s, s}, Eigen::MatrixXd::Identity(3, 3));
  const FilterBank bank = analytic_filters(mom, false);
  CHECK(bank.filters[0].cwiseAbs().maxCoeff() < 1e-12);
  CHECK(bank.biases[0] == Catch::Approx(0.5));
  CHECK(bank.biases[1] == Catch::Approx(0.5));
}

TEST_CASE("matched filter from class means") {
  Eigen::VectorXd a(2), b(2);
  a << 1.0, 1.0;
  b << 0.0, 0.0;
  const LabeledDataset ds = mean_dataset({a, b}, 1, 2);
  const Eigen::VectorXd h = matched_filter(ds, "k0", "k1");
  CHECK(h.isApprox(a - b));
  CHECK(matched_filter(ds, "k0", "k0").isZero(0.0));
  CHECK_THROWS_AS(matched_filter(ds, "k0", "zz"), UnknownClass);
}

TEST_CASE("boxcar filter windows") {
  CavityConfig cfg;
  cfg.kappa = 1e6;
  cfg.dt = 1.0;
  cfg.t_meas = 8.0;
  cfg.chi = {{"e", 0.0}};

  cfg.t_on = 0.0;
  cfg.t_off = 8.0;
  CHECK(boxcar_filter(cfg).sum() == Catch::Approx(16.0));

  cfg.t_on = 2.0;
  cfg.t_off = 6.0;  // half the record
  const Eigen::VectorXd box = boxcar_filter(cfg);
  CHECK(box.head(8).sum() == Catch::Approx(4.0));
  CHECK(box.tail(8).sum() == Catch::Approx(4.0));
  CHECK(box[1] == 0.0);
  CHECK(box[2] == 1.0);

  cfg.t_on = 3.0;
  cfg.t_off = 3.0;  // empty window: zero filter, warning on stderr
  CHECK(boxcar_filter(cfg).isZero(0.0));
}

TEST_CASE("one-vs-all filters") {
  Eigen::VectorXd e(1), g(1), f(1);
  e << 2.0;
  g << 0.0;
  f << -2.0;
  const LabeledDataset ds = mean_dataset({e, g, f}, 1, 1);
  CHECK(one_vs_all_filter(ds, "k1")[0] == Catch::Approx(0.0));  // 0 - (2-2)/2
  const Eigen::VectorXd sum = one_vs_all_filter(ds, "k0") +
                              one_vs_all_filter(ds, "k1") +
                              one_vs_all_filter(ds, "k2");
  CHECK(sum.cwiseAbs().maxCoeff() < 1e-12);

  const LabeledDataset same = mean_dataset({e, e, e}, 1, 1);
  CHECK(one_vs_all_filter(same, "k0").isZero(1e-15));

  const LabeledDataset binary = mean_dataset({e, g}, 1, 1);
  CHECK_THROWS_AS(one_vs_all_filter(binary, "k0"), InvalidArgument);
}

TEST_CASE("per-quadrature variances rescale the sub-filters") {
  const int nt = 5;
  RandomStream rng(41);
  Eigen::VectorXd s1(2 * nt), s2(2 * nt);
  for (int i = 0; i < 2 * nt; ++i) {
    s1[i] = rng.gaussian();
    s2[i] = rng.gaussian();
  }
  const double var_i = 1.0, var_q = 4.0;
  Eigen::VectorXd diag(2 * nt);
  diag.head(nt).setConstant(var_i);
  diag.tail(nt).setConstant(var_q);
  const auto mom = make_moments({s1, s2}, diag.asDiagonal());
  const FilterBank general = analytic_filters(mom, false);
  // I sub-filter ~ ds_I / var_i, Q sub-filter ~ ds_Q / var_q up to the common
  // coefficient: the norm ratio carries the var_i/var_q penalty.
  const Eigen::VectorXd ds_vec = s1 - s2;
  const double want =
      (ds_vec.tail(nt).norm() / var_q) / (ds_vec.head(nt).norm() / var_i);
  const double got =
      general.filters[0].tail(nt).norm() / general.filters[0].head(nt).norm();
  CHECK(got == Catch::Approx(want).epsilon(1e-9));
}

TEST_CASE("analytic filters agree with closed-form training rows") {
  CavityConfig cfg;
  cfg.kappa = 2.0 * std::numbers::pi * 1.54e6;
  const double chi = 0.195 * cfg.kappa;
  cfg.chi = {{"e", -chi}, {"g", chi}, {"f", -3.0 * chi}};
  cfg.dt = 1.0e-8;
  cfg.t_meas = 80 * cfg.dt;
  cfg.t_on = 10 * cfg.dt;
  cfg.t_off = 60 * cfg.dt;
  cfg.eta = 0.8 * cfg.kappa;
  NoiseSpec noise;
  noise.model = NoiseModel::White;
  const LabeledDataset ds = simulate(cfg, noise, {"e", "g", "f"}, 1200, 5);
  const MomentSummary mom = estimate_moments(ds);

  const FilterBank bank = analytic_filters(mom, false);
  const TrainedTpp cf = train_closed_form(mom);
  for (int k = 0; k < 3; ++k) {
    const Eigen::VectorXd row = cf.W.row(k).transpose();
    CHECK((bank.filters[k] - row).norm() <= 1e-6 * row.norm());
    CHECK(bank.biases[k] == Catch::Approx(cf.b[k]).margin(1e-6));
  }

  // three-state white-noise filters mix all three mean traces
  const FilterBank white = analytic_filters(mom, true);
  for (int k = 0; k < 3; ++k)
    for (int p = 0; p < 3; ++p) CHECK(std::abs(white.coefficients(k, p)) > 1e-12);
}

TEST_CASE("q-system golden values for a hand-solved three-state case") {
  // V = I, s1 = (1,0), s2 = (0,1), s3 = (0,0): O = diag(1,1,0),
  // M = O + 1 + delta, pairs [1,2] and [2,3].
  Eigen::VectorXd s1(2), s2(2), s3(2);
  s1 << 1, 0;
  s2 << 0, 1;
  s3 << 0, 0;
  const auto mom = make_moments({s1, s2, s3}, Eigen::MatrixXd::Identity(2, 2));
  const QSystem qs = build_q_system(mom, false);
  REQUIRE(qs.pairs.size() == 2);
  CHECK(qs.pairs[0] == std::array<int, 2>{0, 1});
  CHECK(qs.pairs[1] == std::array<int, 2>{1, 2});
  Eigen::Matrix2d q_want;
  q_want << 2, -2, 1, 3;
  CHECK((qs.Q - q_want).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(qs.T_diag[0] == Catch::Approx(0.0).margin(1e-12));
  CHECK(qs.T_diag[1] == Catch::Approx(-1.0).margin(1e-12));

  // frozen solution of the same system, worked by hand via Q^-1
  const FilterBank bank = analytic_filters(mom, false);
  CHECK(bank.filters[0].isApprox(Eigen::Vector2d(0.375, -0.125), 1e-12));
  CHECK(bank.filters[1].isApprox(Eigen::Vector2d(-0.125, 0.375), 1e-12));
  CHECK(bank.filters[2].isApprox(Eigen::Vector2d(-0.25, -0.25), 1e-12));
  CHECK(bank.biases.isApprox(Eigen::Vector3d(0.25, 0.25, 0.5), 1e-12));
}

TEST_CASE("analytic and closed-form routes stay aligned on jump data") {
  CavityConfig cfg;
  cfg.kappa = 2.0 * std::numbers::pi * 1.54e6;
  const double chi = 0.195 * cfg.kappa;
  cfg.chi = {{"e", -chi}, {"g", chi}, {"f", -3.0 * chi}};
  cfg.dt = 1.0e-8;
  cfg.t_meas = 100 * cfg.dt;
  cfg.t_on = 10 * cfg.dt;
  cfg.t_off = 90 * cfg.dt;
  cfg.eta = 0.9 * cfg.kappa;
  NoiseSpec noise;
  noise.model = NoiseModel::Jumps;
  noise.transitions = {{"e", "g", 5e5}, {"g", "e", 1.5e5}, {"e", "f", 2.5e5}};
  const LabeledDataset ds = simulate(cfg, noise, {"e", "g"}, 3000, 61);
  const MomentSummary mom = estimate_moments(ds);
  const FilterBank bank = analytic_filters(mom, false);
  const TrainedTpp cf = train_closed_form(mom);
  // qualitative agreement on correlated (non-Gaussian) data
  for (int k = 0; k < 2; ++k)
    CHECK(cosine(bank.filters[k], cf.W.row(k).transpose()) > 0.99);
}
