#include "reference.hpp"
#include "turbohse/evaluation.hpp"

#include <doctest.h>

#include <json.hpp>

#include <numeric>
#include <set>

using namespace turbohse;
using namespace turbohse::eval;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

double hand_pearson(const Vec& a, const Vec& b) {
  const double ma = a.mean(), mb = b.mean();
  double sab = 0, saa = 0, sbb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

double hand_smape(const Vec& t, const Vec& p) {
  double s = 0;
  for (Eigen::Index i = 0; i < t.size(); ++i) s += 2 * std::abs(p[i] - t[i]) / (std::abs(t[i]) + std::abs(p[i]) + 1e-8);
  return s / static_cast<double>(t.size());
}

}  // namespace

TEST_CASE("SMAPE") {
  CHECK(smape(vec({0.1, -0.2}), vec({0.1, -0.2})) == 0.0);
  CHECK(smape(vec({0.1}), vec({-0.1})) == doctest::Approx(0.4 / (0.2 + 1e-8)).epsilon(1e-14));
  CHECK(smape(vec({0.1}), vec({-0.1})) == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(smape(vec({-0.04}), vec({-0.05})) == doctest::Approx(0.02 / (0.09 + 1e-8)).epsilon(1e-12));
  CHECK(smape(vec({-0.04}), vec({-0.05})) == doctest::Approx(0.2222).epsilon(1e-4));
  std::mt19937_64 rng(1);
  const Vec a = ref::random_vector(50, rng), b = ref::random_vector(50, rng);
  CHECK(smape(a, b) == smape(b, a));
  CHECK(smape(Vec::Zero(3), Vec::Zero(3)) == 0.0);
  CHECK_THROWS_AS(smape(vec({1.0}), vec({1.0}), vec({0.0})), MetricUndefined);
}

TEST_CASE("RMSE") {
  const Vec t = vec({0.01, -0.02, 0.005});
  CHECK(rmse(t, t) == 0.0);
  CHECK(rmse(t, (t.array() + 1e-3).matrix()) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(rmse(vec({0.0, 0.0}), vec({3.0, 4.0})) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
  CHECK(rmse(vec({0.0, 0.0}), vec({3.0, 4.0})) == doctest::Approx(3.5355).epsilon(1e-4));
}

TEST_CASE("Pearson") {
  std::mt19937_64 rng(2);
  const Vec t = ref::random_vector(100, rng);
  CHECK(pearson(t, (2.0 * t.array() + 3.0).matrix()) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pearson(t, -t) == doctest::Approx(-1.0).epsilon(1e-14));
  const Vec p = ref::random_vector(100, rng);
  CHECK(pearson(t, p) == doctest::Approx(hand_pearson(t, p)).epsilon(1e-12));
  // positive affine maps of either argument leave it unchanged
  CHECK(pearson((5.0 * t.array() - 1.0).matrix(), (0.5 * p.array() + 7.0).matrix()) ==
        doctest::Approx(pearson(t, p)).epsilon(1e-12));
  CHECK_THROWS_AS(pearson(Vec::Constant(5, 0.3), ref::random_vector(5, rng)), MetricUndefined);

  // attenuation with equal-variance noise
  const int n = 10000;
  const Vec sig = ref::random_vector(n, rng);
  const Vec noisy = sig + ref::random_vector(n, rng);
  CHECK(std::abs(pearson(sig, noisy) - 1.0 / std::sqrt(2.0)) < 0.02);
}

TEST_CASE("masks ignore padded steps") {
  std::mt19937_64 rng(3);
  const Vec t = ref::random_vector(30, rng), p = ref::random_vector(30, rng);
  Vec tp(40), pp(40), mask = Vec::Zero(40);
  tp << t, ref::random_vector(10, rng);
  pp << p, ref::random_vector(10, rng);
  mask.head(30).setOnes();
  CHECK(smape(tp, pp, mask) == smape(t, p));
  CHECK(rmse(tp, pp, mask) == rmse(t, p));
  CHECK(pearson(tp, pp, mask) == doctest::Approx(pearson(t, p)).epsilon(1e-14));
}

TEST_CASE("k-fold plans") {
  std::vector<int> ten(10);
  std::iota(ten.begin(), ten.end(), 0);
  const auto plans = kfold_plan(ten, 5, 7);
  REQUIRE(plans.size() == 5);
  std::set<int> seen;
  for (const auto& p : plans) {
    CHECK(p.test_ids.size() == 2);
    for (int id : p.test_ids) CHECK(seen.insert(id).second);
  }
  CHECK(seen.size() == 10);

  const auto again = kfold_plan(ten, 5, 7);
  for (std::size_t f = 0; f < 5; ++f) {
    CHECK(again[f].test_ids == plans[f].test_ids);
    CHECK(again[f].train_ids == plans[f].train_ids);
  }

  std::vector<int> fifty(50);
  std::iota(fifty.begin(), fifty.end(), 100);
  for (const auto& p : kfold_plan(fifty, 5, 0)) {
    CHECK(p.test_ids.size() == 10);
    CHECK(p.train_ids.size() == 35);
    CHECK(p.val_ids.size() == 5);
    std::set<int> all(p.train_ids.begin(), p.train_ids.end());
    all.insert(p.val_ids.begin(), p.val_ids.end());
    CHECK(all.size() == 40);
    for (int id : p.test_ids) CHECK(all.count(id) == 0);
  }
  CHECK_THROWS_AS(kfold_plan(ten, 1, 0), UsageError);

  const SplitPlan h = holdout_plan(fifty, 1);
  CHECK(h.test_ids.size() + h.val_ids.size() + h.train_ids.size() == 50);
}

TEST_CASE("ACF and PACF") {
  std::mt19937_64 rng(4);
  SUBCASE("white noise stays inside the Bartlett band") {
    const int n = 10000;
    const Vec x = ref::random_vector(n, rng);
    const Vec a = acf(x, 20);
    CHECK(a[0] == doctest::Approx(1.0).epsilon(1e-14));
    for (int k = 1; k <= 20; ++k) CHECK(std::abs(a[k]) < 3.0 / std::sqrt(n));
  }
  SUBCASE("random walk") {
    const Vec steps = ref::random_vector(2000, rng);
    Vec walk(2000);
    std::partial_sum(steps.data(), steps.data() + 2000, walk.data());
    const Vec a = acf(walk, 10), p = pacf(walk, 10);
    CHECK(a[1] > 0.95);
    CHECK(p[0] == 1.0);
    CHECK(p[1] > 0.95);
    for (int k = 2; k <= 10; ++k) CHECK(std::abs(p[k]) < 0.1);
  }
  SUBCASE("AR(1) oracle") {
    const double phi = 0.6;
    Vec x(20000);
    x[0] = 0;
    const Vec e = ref::random_vector(20000, rng);
    for (int t = 1; t < 20000; ++t) x[t] = phi * x[t - 1] + e[t];
    const Vec p = pacf(x, 5);
    CHECK(p[1] == doctest::Approx(phi).epsilon(0.05));
    CHECK(p[1] == doctest::Approx(acf(x, 1)[1]).epsilon(1e-12));
    for (int k = 2; k <= 5; ++k) CHECK(std::abs(p[k]) < 0.03);
  }
}

TEST_CASE("report assembly") {
  // Two folds, one 3-step series each. Fold 0 adds a constant 1e-3 to every
  // indicator; fold 1 adds (h+1) * 1e-3 * (+1, -1, +1) to indicator h.
  auto make_truth = [] {
    Mat t(3, kNumHi);
    for (int h = 0; h < kNumHi; ++h) t.col(h) << -0.01 * (h + 1), -0.02 * (h + 1), -0.035 * (h + 1);
    return t;
  };
  const Mat truth = make_truth();
  Mat pred0 = truth.array() + 1e-3;
  Mat pred1 = truth;
  for (int h = 0; h < kNumHi; ++h) pred1.col(h) += (h + 1) * 1e-3 * vec({1, -1, 1});
  const std::vector<FoldPredictions> folds{{0, {{1, truth, pred0, {}}}}, {1, {{2, truth, pred1, {}}}}};
  const ModelReport rep = assemble_model_report("toy", folds);

  for (int h = 0; h < kNumHi; ++h) {
    const double r0 = 1e-3, r1 = (h + 1) * 1e-3;
    const Cell& c = rep.at(Metric::Rmse, h);
    CHECK(c.folds == 2);
    CHECK(c.mean == doctest::Approx((r0 + r1) / 2).epsilon(1e-12));
    CHECK(c.std == doctest::Approx(std::abs(r1 - r0) / 2).epsilon(1e-9));

    const double s0 = hand_smape(truth.col(h), pred0.col(h)), s1 = hand_smape(truth.col(h), pred1.col(h));
    CHECK(rep.at(Metric::Smape, h).mean == doctest::Approx((s0 + s1) / 2).epsilon(1e-12));

    const double p1 = hand_pearson(truth.col(h), pred1.col(h));
    CHECK(rep.at(Metric::Pearson, h).mean == doctest::Approx((1.0 + p1) / 2).epsilon(1e-12));
  }
  // Avg pools every indicator's residuals
  double sq = 0;
  for (int h = 0; h < kNumHi; ++h) sq += 3 * std::pow((h + 1) * 1e-3, 2);
  const double pooled1 = std::sqrt(sq / 30);
  CHECK(rep.avg(Metric::Rmse).mean == doctest::Approx((1e-3 + pooled1) / 2).epsilon(1e-12));
  double mean_cells = 0;
  for (int h = 0; h < kNumHi; ++h) mean_cells += rep.at(Metric::Rmse, h).mean / kNumHi;
  CHECK(std::abs(rep.avg(Metric::Rmse).mean - mean_cells) > 1e-5);

  // fold order does not matter
  const std::vector<FoldPredictions> swapped{folds[1], folds[0]};
  const ModelReport rep2 = assemble_model_report("toy", swapped);
  for (int m = 0; m < kNumMetrics; ++m)
    for (int c = 0; c <= kNumHi; ++c) {
      CHECK(rep2.cells[m][c].mean == rep.cells[m][c].mean);
      CHECK(rep2.cells[m][c].std == rep.cells[m][c].std);
    }

  // single fold -> zero spread
  const ModelReport one = assemble_model_report("one", {folds[1]});
  for (int m = 0; m < kNumMetrics; ++m)
    for (int c = 0; c <= kNumHi; ++c) CHECK(one.cells[m][c].std == 0.0);
}

TEST_CASE("perfect predictions and undefined correlation") {
  Mat truth = Mat::Zero(4, kNumHi);
  truth.col(0) << -0.01, -0.02, -0.03, -0.04;  // only indicator 0 varies
  const ModelReport rep = assemble_model_report("oracle", {{0, {{0, truth, truth, {}}}}});
  for (int h = 0; h <= kNumHi; ++h) {
    CHECK(rep.cells[0][h].mean == 0.0);
    CHECK(rep.cells[1][h].mean == 0.0);
  }
  CHECK(rep.at(Metric::Pearson, 0).mean == doctest::Approx(1.0));
  CHECK_FALSE(rep.at(Metric::Pearson, 3).available);
  CHECK(rep.avg(Metric::Pearson).available);

  EvalReport er{{rep}};
  const std::string csv = er.to_csv();
  CHECK(csv.find("NA") != std::string::npos);
  CHECK(csv.find("RMSE_x1e3") != std::string::npos);
  const auto j = nlohmann::json::parse(er.to_json());
  CHECK(j.contains("models"));
}
