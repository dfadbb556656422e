#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "molab/theory.hpp"

using namespace molab;

namespace {

VectorXd pt(std::initializer_list<double> v) {
  VectorXd out(v.size());
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

ScalingQuery query(ApproximationOrder order, int du, int dv, double eps, std::optional<int> dw = {}) {
  ScalingQuery q;
  q.order = order;
  q.d_U = du;
  q.d_V = dv;
  q.d_W = dw;
  q.epsilon = eps;
  return q;
}

constexpr auto FF = ApproximationOrder::FunctionFirst;
constexpr auto FCF = ApproximationOrder::FunctionalFirst;

}  // namespace

TEST_SUITE("theory") {

TEST_CASE("eta-net on [0,2]") {
  const auto net = build_eta_net(Box::interval(0, 2), 1.0);
  REQUIRE(net.size() == 2);
  CHECK(net.centers(0, 0) == 0.5);
  CHECK(net.centers(0, 1) == 1.5);
  for (int i = 0; i <= 2000; ++i) {
    const double x = 2.0 * i / 2000;
    CHECK(std::min(std::abs(x - 0.5), std::abs(x - 1.5)) <= 1.0);
  }
  const auto single = build_eta_net(Box::interval(0, 2), 2.5);
  REQUIRE(single.size() == 1);
  CHECK(single.centers(0, 0) == 1.0);
  CHECK_THROWS_AS(build_eta_net(Box::interval(0, 2), 0.0), DomainError);
}

TEST_CASE("eta-net covers the box and scales with halving") {
  for (int d = 1; d <= 3; ++d) {
    CAPTURE(d);
    const Box box = Box::cube(d, 1.0);
    for (double eta : {0.9, 0.5, 0.3}) {
      const auto net = build_eta_net(box, eta);
      const auto half = build_eta_net(box, eta / 2);
      const double slack = std::pow(2.0, d) * std::pow(static_cast<double>(net.counts[0]) + 1.0, d - 1) * d + 1;
      CHECK(static_cast<double>(half.size()) <= std::pow(2.0, d) * static_cast<double>(net.size()) + slack);
      std::mt19937_64 rng(d);
      std::uniform_real_distribution<double> U(-1, 1);
      for (int k = 0; k < 300; ++k) {
        VectorXd x(d);
        for (auto& v : x) v = U(rng);
        CHECK((net.centers.colwise() - x).colwise().norm().minCoeff() <= eta);
      }
    }
  }
}

TEST_CASE("partition of unity axioms") {
  const PartitionOfUnity one(build_eta_net(Box::interval(0, 2), 1.0));
  CHECK(pou_eval(one, pt({0.5})) == pt({1.0, 0.0}));
  const VectorXd mid = pou_eval(one, pt({1.0}));
  CHECK(mid(0) == 0.5);
  CHECK(mid(1) == 0.5);

  const PartitionOfUnity pou(build_eta_net(Box::cube(2, 1.0), 0.35));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int k = 0; k < 1000; ++k) {
    const VectorXd x = pt({U(rng), U(rng)});
    const VectorXd w = pou_eval(pou, x);
    CHECK(std::abs(w.sum() - 1.0) <= 1e-12);
    CHECK(w.minCoeff() >= 0.0);
    CHECK(w.maxCoeff() <= 1.0);
    for (Eigen::Index j = 0; j < w.size(); ++j)
      if ((pou.net.centers.col(j) - x).norm() > 0.35) CHECK(w(j) == 0.0);
  }
  CHECK_THROWS_WITH_AS(pou_eval(one, pt({5.0})), doctest::Contains("cover violated at x"), DomainError);
}

TEST_CASE("projection and lifting") {
  const PartitionOfUnity pou(build_eta_net(Box::interval(0, 2), 0.25));
  const auto n = pou.net.size();
  const VectorXd c = VectorXd::Constant(n, 1.7);
  VectorXd v(n);
  for (Eigen::Index j = 0; j < n; ++j) v(j) = pou.net.centers(0, j);
  double worst = 0;
  for (int i = 0; i <= 4000; ++i) {
    const VectorXd x = pt({2.0 * i / 4000});
    CHECK(project_function(c, pou, x) == doctest::Approx(1.7).epsilon(1e-14));
    worst = std::max(worst, std::abs(project_function(v, pou, x) - x(0)));
    CHECK(lift_discrete(v, pou, x) == project_function(v, pou, x));
    CHECK(lift_discrete(c, pou, x) == doctest::Approx(1.7).epsilon(1e-14));
  }
  CHECK(worst <= 0.25);
  CHECK(project_function(v, pou, pou.net.centers.col(3)) == doctest::Approx(v(3)).epsilon(1e-15));

  VectorXd z2 = v;
  z2(4) += 0.3;
  for (int i = 0; i <= 400; ++i) {
    const VectorXd x = pt({2.0 * i / 400});
    CHECK(std::abs(lift_discrete(z2, pou, x) - lift_discrete(v, pou, x)) <= 0.3 + 1e-15);
  }
  CHECK_THROWS_AS(lift_discrete(VectorXd::Zero(n + 1), pou, pt({1.0})), DimensionError);
}

TEST_CASE("cover counts") {
  CHECK(cover_count(1, 1.0, 0.0625).value == 16);
  CHECK(cover_count(1, 1.0, 0.5).value == 2);
  CHECK(cover_count(2, 1.0, 0.5).value == 9);  // ceil(2 sqrt 2)^2
  CHECK(cover_count(3, 1.0, 1e-200).log10 == doctest::Approx(3 * (std::log10(std::sqrt(3.0)) + 200)));
}

TEST_CASE("function-first worked example") {
  const auto r = scaling_single(query(FF, 1, 1, 0.5));
  CHECK(r.N.value == std::ceil(2 * 1 * std::sqrt(1.0) / 0.5));
  CHECK(r.N.value == 4);
  CHECK(r.delta == 0.0625);
  CHECK(r.n_cU.value == 16);
  CHECK(r.H.value == 64);
  CHECK(r.blowup_side == BlowupSide::Branch);
  CHECK(r.F1.input_dim.value == 1);
  CHECK(r.F2.input_dim.value == 16);
  CHECK(r.F1.width == 1);
  CHECK(r.F1.output_bound == 1.0);
  CHECK(r.terms.size() == 2);
}

TEST_CASE("functional-first worked example") {
  const auto r = scaling_single(query(FCF, 1, 1, 0.5));
  CHECK(r.delta == 0.25);
  CHECK(r.n_cU.value == 4);
  CHECK(r.H.value == std::ceil(2 * std::sqrt(4.0) * 2));
  CHECK(r.blowup_side == BlowupSide::Trunk);
  // N = 2^(n+1) C sqrt(dV) (C' sqrt n)^n eps^-(n+1) with n = 4
  CHECK(r.N.value == std::ceil(32.0 * 16.0 * 32.0));
}

TEST_CASE("multi-operator worked example") {
  const auto r = scaling_multi(query(FF, 1, 1, 0.5, 1));
  REQUIRE(r.n_cW);
  CHECK(r.n_cW->value == 2);
  CHECK(r.P->value == 6);
  CHECK(r.zeta == 0.5);
  CHECK(r.F3.has_value());
  CHECK(r.terms.size() == 3);
  CHECK(r.N.value == std::ceil(16.0 * 2.0 * 8.0));
  CHECK(r.N > scaling_single(query(FF, 1, 1, 0.5)).N);
}

TEST_CASE("recomposition identities") {
  for (int du = 1; du <= 3; ++du)
    for (int dv = 1; dv <= 3; ++dv)
      for (double eps : {0.5, 0.3, 0.1}) {
        for (auto order : {FF, FCF}) {
          const auto r = scaling_single(query(order, du, dv, eps));
          CHECK(r.total == recompose_total(r));
          CHECK(r.total == magnitude_sum(r.terms));
        }
        const auto m = scaling_multi(query(FF, du, dv, eps, du));
        CHECK(m.total == recompose_total(m));
      }
  const auto small = scaling_single(query(FF, 1, 1, 0.5));
  const double direct = std::pow(small.N.value, 1) * small.F1.sparsity.value +
                        std::pow(small.H.value, small.n_cU.value) * small.F2.sparsity.value;
  CHECK(small.total.value == direct);
}

TEST_CASE("counts grow as epsilon shrinks") {
  for (auto order : {FF, FCF}) {
    SizeReport prev = scaling_single(query(order, 1, 2, 0.9));
    for (double eps = 0.8; eps > 0.05; eps *= 0.8) {
      const auto r = scaling_single(query(order, 1, 2, eps));
      CHECK(r.N >= prev.N);
      CHECK(r.H >= prev.H);
      CHECK(r.n_cU >= prev.n_cU);
      CHECK(r.total > prev.total);
      prev = r;
    }
  }
  double last = 0;
  for (double eps : {0.5, 0.4, 0.3}) {
    const auto r = scaling_multi(query(FF, 1, 1, eps, 1));
    CHECK(std::isfinite(r.total.log10));
    CHECK(r.total.log10 > last);
    last = r.total.log10;
  }
}

TEST_CASE("approximation-order comparison") {
  for (int du = 1; du <= 3; ++du)
    for (int dv = 1; dv <= 3; ++dv)
      for (double eps : {0.5, 0.3, 0.1}) {
        const auto ff = scaling_single(query(FF, du, dv, eps));
        const auto fcf = scaling_single(query(FCF, du, dv, eps));
        CHECK(fcf.log10_delta >= ff.log10_delta);
        CHECK(fcf.n_cU <= ff.n_cU);
      }
}

TEST_CASE("huge reports stay in log space") {
  const auto r = scaling_single(query(FCF, 3, 2, 0.01));
  CHECK_FALSE(r.N.representable());
  CHECK(r.total >= r.N);
  const auto m = scaling_multi(query(FF, 2, 2, 0.05, 2));
  CHECK_FALSE(m.total.representable());
  CHECK(m.total.log10_log10 > 0);
}

TEST_CASE("magnitude arithmetic") {
  const auto a = Magnitude::from_value(1000);
  CHECK(a.log10 == 3);
  CHECK(Magnitude::from_log10(2).value == doctest::Approx(100));
  const auto big = Magnitude::from_log10_log10(400);
  CHECK_FALSE(std::isfinite(big.log10));
  CHECK(big > Magnitude::from_log10(1e300));
  CHECK(power_term(Magnitude::from_value(2), Magnitude::from_value(10), Magnitude::from_value(3)).value == 3072);
  const auto tower = power_term(Magnitude::from_value(10), Magnitude::from_log10(500), Magnitude::from_value(1));
  CHECK(tower.log10_log10 == doctest::Approx(500));
  CHECK(magnitude_sum({Magnitude::from_value(2), Magnitude::from_value(5)}).value == 7);
  CHECK(Magnitude::from_value(64).str() == "64");
}

TEST_CASE("query validation") {
  CHECK_THROWS_AS(scaling_single(query(FF, 1, 1, 1.0)), DomainError);
  CHECK_THROWS_AS(scaling_single(query(FF, 1, 1, 0.0)), DomainError);
  CHECK_THROWS_AS(scaling_single(query(FF, 0, 1, 0.5)), DomainError);
  CHECK_THROWS_AS(scaling_single(query(FF, 1, 1, 0.5, 1)), DomainError);
  CHECK_THROWS_AS(scaling_multi(query(FF, 1, 1, 0.5)), DomainError);
  auto q = query(FF, 1, 1, 0.5);
  q.constants.C = -1;
  CHECK_THROWS_AS(scaling_single(q), DomainError);
}

TEST_CASE("constants change the counts") {
  auto q = query(FF, 1, 1, 0.5);
  q.constants.C = 2;
  CHECK(scaling_single(q).N.value == 8);
}

TEST_CASE("epsilon from parameter count") {
  const double e = std::numbers::e;
  CHECK(epsilon_of_nparams(std::exp(e), ScalingRegime::SingleFunctionalFirst, 1, 1) ==
        doctest::Approx(1.0 / e).epsilon(1e-12));
  CHECK_THROWS_WITH(epsilon_of_nparams(2.0, ScalingRegime::SingleFunctionalFirst, 1, 1),
                    doctest::Contains("asymptotic regime not reached"));
  CHECK_THROWS(epsilon_of_nparams(10.0, ScalingRegime::Multi, 1, 1, 1));
  CHECK_THROWS(epsilon_of_nparams(1e6, ScalingRegime::Multi, 1, 1));
  for (double lg = 3; lg <= 12; lg += 0.5) {
    const double n = std::pow(10.0, lg);
    for (int du = 1; du <= 3; ++du)
      for (int dv = 1; dv <= 3; ++dv) {
        const double ff = epsilon_of_nparams(n, ScalingRegime::SingleFunctionFirst, du, dv);
        const double fcf = epsilon_of_nparams(n, ScalingRegime::SingleFunctionalFirst, du, dv);
        const double multi = epsilon_of_nparams(n, ScalingRegime::Multi, du, dv, du);
        CHECK(fcf <= ff);
        CHECK(multi > fcf);
      }
  }
  CHECK(epsilon_of_nparams(Magnitude::from_log10_log10(50), ScalingRegime::Multi, 1, 1, 1) < 0.05);
}

}  // TEST_SUITE
