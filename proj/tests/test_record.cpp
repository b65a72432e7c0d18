#include <catch2/catch_amalgamated.hpp>

#include "tpp/record.hpp"
#include "tpp/rng.hpp"

using namespace tpp;

namespace {

HeterodyneRecord make_record(const std::vector<std::vector<double>>& rows,
                             double dt = 1.0) {
  HeterodyneRecord r;
  r.dt = dt;
  r.values.resize(rows.size(), rows[0].size());
  for (std::size_t m = 0; m < rows.size(); ++m)
    for (std::size_t i = 0; i < rows[m].size(); ++i) r.values(m, i) = rows[m][i];
  return r;
}

}  // namespace

TEST_CASE("flatten is observable-major") {
  const auto r = make_record({{1, 2}, {3, 4}});
  const Eigen::VectorXd x = flatten(r);
  REQUIRE(x.size() == 4);
  CHECK(x[0] == 1.0);
  CHECK(x[1] == 2.0);
  CHECK(x[2] == 3.0);
  CHECK(x[3] == 4.0);
}

TEST_CASE("flatten zero and scalar cases") {
  const Eigen::VectorXd z = flatten(make_record({{0, 0, 0}}));
  CHECK(z.isZero(0.0));
  const Eigen::VectorXd s = flatten(make_record({{42.5}}));
  REQUIRE(s.size() == 1);
  CHECK(s[0] == 42.5);
}

TEST_CASE("flatten and unflatten are inverse for random shapes") {
  RandomStream rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int no = 1 + static_cast<int>(rng.next_u64() % 4);
    const int nt = 1 + static_cast<int>(rng.next_u64() % 12);
    HeterodyneRecord r;
    r.dt = 0.5;
    r.values.resize(no, nt);
    for (int m = 0; m < no; ++m)
      for (int i = 0; i < nt; ++i) r.values(m, i) = rng.gaussian();
    const HeterodyneRecord back = unflatten(flatten(r), no, nt, r.dt);
    CHECK(back.values == r.values);
  }
}

TEST_CASE("record validation rejects bad inputs") {
  auto r = make_record({{1, 2}});
  r.dt = 0.0;
  CHECK_THROWS_AS(r.validate(), InvalidArgument);
  r.dt = 1.0;
  r.values(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(r.validate(), InvalidArgument);
}

TEST_CASE("dataset validation") {
  LabeledDataset ds;
  ds.dt = 1.0;
  ds.classes = {"e", "g"};
  ds.shots.resize(2);
  ds.shots[0].push_back(make_record({{1, 2}}));
  ds.shots[1].push_back(make_record({{3, 4}}));
  CHECK_NOTHROW(ds.validate());
  CHECK(ds.class_index("g") == 1);
  CHECK_THROWS_AS(ds.class_index("f"), UnknownClass);

  ds.shots[1][0] = make_record({{3, 4, 5}});
  CHECK_THROWS_AS(ds.validate(), DimensionMismatch);

  ds.shots[1][0] = make_record({{3, 4}});
  ds.classes[1] = "e";
  CHECK_THROWS_AS(ds.validate(), InvalidArgument);
}

TEST_CASE("slice_time keeps the requested window") {
  LabeledDataset ds;
  ds.dt = 1.0;
  ds.classes = {"e", "g"};
  ds.shots.resize(2);
  ds.shots[0].push_back(make_record({{0, 1, 2, 3}, {4, 5, 6, 7}}));
  ds.shots[1].push_back(make_record({{9, 8, 7, 6}, {5, 4, 3, 2}}));
  const LabeledDataset cut = slice_time(ds, 1, 3);
  CHECK(cut.n_time() == 2);
  CHECK(cut.shots[0][0].values(0, 0) == 1.0);
  CHECK(cut.shots[0][0].values(1, 1) == 6.0);
  CHECK_THROWS_AS(slice_time(ds, 2, 2), InvalidArgument);
}
