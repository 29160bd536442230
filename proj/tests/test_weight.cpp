#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "wlab/weight.hpp"

using namespace wlab;

namespace {

// Richardson-free oracle: high resolution midpoint rule on a power piece.
// Deliberately independent of AnalyticModel::primitive.
double midpoint_power_integral(double a, double b, double c, double e, double A, int n) {
  double acc = 0.0, w = (b - a) / n;
  for (int i = 0; i < n; ++i) {
    double x = a + (i + 0.5) * w;
    acc += A * std::pow(std::abs(x - c), e);
  }
  return acc * w;
}

}  // namespace

TEST_CASE("analytic model integrates power pieces exactly") {
  AnalyticModel m;
  m.pieces.push_back({0.0, 1.0, 0.0, 1.0, 1.0});  // w = x on [0,1)

  // cell [0, 1/4): integral x dx = 1/32, average 1/8
  REQUIRE(m.integral(0.0, 0.25) == 1.0 / 32.0);
  // full piece: 1/2
  REQUIRE(m.integral(0.0, 1.0) == 0.5);
  // outside the piece the model is 1
  REQUIRE(m.integral(1.0, 3.0) == 2.0);
  // straddling
  REQUIRE(m.integral(0.5, 2.0) == (0.5 - 0.125) + 1.0);

  // fractional exponent checked against a blind midpoint oracle
  AnalyticModel frac;
  frac.pieces.push_back({0.0, 1.0, 0.0, -0.5, 2.0});
  double exact = frac.integral(0.25, 1.0);
  double approx = midpoint_power_integral(0.25, 1.0, 0.0, -0.5, 2.0, 200000);
  REQUIRE(std::abs(exact - approx) < 1e-8 * std::abs(exact));

  // singular cell still finite and correct: integral of x^{-1/2} on [0,h]
  REQUIRE(std::abs(frac.integral(0.0, 0.0625) - 2.0 * 2.0 * std::sqrt(0.0625)) < 1e-15);
}

TEST_CASE("analytic model crossing the center uses the signed antiderivative") {
  AnalyticModel m;
  m.pieces.push_back({-1.0, 1.0, 0.0, 2.0, 3.0});  // 3x^2
  REQUIRE(std::abs(m.integral(-0.5, 0.25) - (0.125 + 0.015625)) < 1e-15);
  double approx = midpoint_power_integral(-0.5, 0.25, 0.0, 2.0, 3.0, 100000);
  REQUIRE(std::abs(m.integral(-0.5, 0.25) - approx) < 1e-9);
}

TEST_CASE("model power transform tracks exponents and rejects non-integrable ones") {
  AnalyticModel m;
  m.pieces.push_back({0.0, 1.0, 0.0, 1.5, 4.0});
  auto d = m.power(-0.5);
  REQUIRE(d.has_value());
  REQUIRE(d->pieces[0].exponent == -0.75);
  REQUIRE(d->pieces[0].coeff == 0.5);

  // exponent 1.5 * -1 = -1.5 <= -1: not integrable
  REQUIRE(!m.power(-1.0).has_value());
}

TEST_CASE("weight rejects nonpositive cells") {
  GridSpec g = build_grid(0.0, 2, 3);
  std::vector<double> v(size_t(g.cells()), 1.0);
  v[5] = 0.0;
  REQUIRE_THROWS_AS(Weight(GridFunction(g, v)), std::invalid_argument);
  v[5] = -2.0;
  REQUIRE_THROWS_AS(Weight(GridFunction(g, v)), std::invalid_argument);
  v[5] = 1.0;
  REQUIRE_NOTHROW(Weight(GridFunction(g, v)));
}

TEST_CASE("power weight cells are exact analytic averages") {
  GridSpec g = build_grid(0.0, 0, 2);  // [0,1], h = 1/4
  Weight w = make_power_weight(g, 1.0);
  REQUIRE(w.data()[0] == 0.125);  // avg of x over [0, 1/4)
  REQUIRE(w.data()[1] == 0.375);
  REQUIRE(w.data()[2] == 0.625);
  REQUIRE(w.data()[3] == 0.875);
  REQUIRE(w.integral(g.root_interval()) == 0.5);

  // singular exponent: total mass of x^{-1/2} on [0,1] is 2, split exactly
  Weight s = make_power_weight(g, -0.5);
  double total = s.integral(g.root_interval());
  REQUIRE(std::abs(total - 2.0) < 1e-14);
  REQUIRE(s.data()[0] > s.data()[1]);  // mass concentrates at the singularity
}

TEST_CASE("step weight is exact and requires alignment") {
  GridSpec g = build_grid(-2.0, 2, 4);  // [-2,2], h = 1/4
  Weight w = make_step_weight(g, 9.0);
  for (int64_t i = 0; i < g.cells(); ++i) {
    double x = g.cell_center(i);
    REQUIRE(w.data()[i] == ((x > 0.0 && x < 1.0) ? 9.0 : 1.0));
  }

  // cells of width 2 cannot resolve the breakpoint at 1
  GridSpec off = build_grid(0.0, 2, 1);  // [0,4], h = 2
  REQUIRE_THROWS_AS(make_step_weight(off, 9.0), std::invalid_argument);
  REQUIRE_THROWS_AS(make_step_weight(g, 0.0), std::invalid_argument);
}

TEST_CASE("two-bump weight matches its defining formula") {
  GridSpec g = build_grid(-16.0, 5, 8);  // [-16,16], h = 1/8
  double delta = 0.25, N = 8.0, p = 3.0;
  Weight w = make_two_bump_weight(g, delta, N, p);

  double h = g.cell_width();
  double e0 = (p - 1.0) * (1.0 - delta), eN = delta - 1.0;
  for (int64_t i = 0; i < g.cells(); ++i) {
    double lo = g.cell_left(i), hi = g.cell_left(i + 1);
    double want;
    if (hi <= -1.0 || (lo >= 1.0 && hi <= N - 1.0) || lo >= N + 1.0)
      want = 1.0;  // flat region cells are exactly 1
    else if (lo == 0.0 || hi == 0.0)
      want = std::pow(h, e0) / (e0 + 1.0);  // power rule on the cell touching 0
    else if (lo == N || hi == N)
      want = std::pow(h, eN) / (eN + 1.0);  // midpoint rule is useless there
    else if (lo >= -1.0 && hi <= 1.0)
      want = midpoint_power_integral(lo, hi, 0.0, e0, 1.0, 20000) / h;
    else
      want = midpoint_power_integral(lo, hi, N, eN, 1.0, 20000) / h;
    if (want == 1.0)
      REQUIRE(w.data()[i] == 1.0);
    else
      REQUIRE(std::abs(w.data()[i] - want) < 1e-6 * want);
  }

  REQUIRE_THROWS_AS(make_two_bump_weight(g, 1.5, N, p), std::invalid_argument);
  REQUIRE_THROWS_AS(make_two_bump_weight(g, delta, 2.0, p), std::invalid_argument);
  // N = 15 leaves no room for the collar [N-1, N+1] inside [-16,16]... it fits;
  // N = 16 does not
  REQUIRE_THROWS_AS(make_two_bump_weight(g, delta, 16.0, p), std::invalid_argument);
}

TEST_CASE("default bump center leaves a unit collar") {
  GridSpec g = build_grid(-128.0, 8, 10);
  REQUIRE(default_bump_center(g) == 126.0);
  GridSpec s = build_grid(-8.0, 4, 6);
  REQUIRE(default_bump_center(s) == 6.0);
}

TEST_CASE("dual weight is the cellwise power transform") {
  GridSpec g = build_grid(-2.0, 2, 5);
  Weight w = make_step_weight(g, 9.0);
  Weight s = dual_weight(w, 2.0);
  for (int64_t i = 0; i < g.cells(); ++i)
    REQUIRE(s.data()[i] == 1.0 / w.data()[i]);
  REQUIRE(s.model() == nullptr);
  REQUIRE_THROWS_AS(dual_weight(w, 1.0), std::invalid_argument);

  Weight s3 = dual_weight(w, 3.0);
  for (int64_t i = 0; i < g.cells(); ++i)
    REQUIRE(s3.data()[i] == std::pow(w.data()[i], -0.5));
}

TEST_CASE("sigma caches reproduce direct computation in both modes") {
  GridSpec g = build_grid(0.0, 1, 6);  // [0,2]
  Weight w = make_power_weight(g, 0.75);

  auto cw = w.sigma_cells(2.5, SigmaMode::cellwise);
  for (int64_t i = 0; i < g.cells(); ++i)
    REQUIRE((*cw)[size_t(i)] == std::pow(w.data()[i], -1.0 / 1.5));

  // analytic: exact averages of x^{-0.5} over cells
  auto an = w.sigma_cells(2.5, SigmaMode::analytic);
  AnalyticModel dm;
  dm.pieces.push_back({0.0, 2.0, 0.0, -0.5, 1.0});
  double h = g.cell_width();
  for (int64_t i = 0; i < g.cells(); ++i) {
    double want = dm.integral(g.cell_left(i), g.cell_left(i + 1)) / h;
    REQUIRE(std::abs((*an)[size_t(i)] - want) < 1e-15 * want);
  }
  REQUIRE((*an)[0] != (*cw)[0]);  // the singular cell is where the modes differ

  // cache returns the same object on repeat lookups
  REQUIRE(w.sigma_cells(2.5, SigmaMode::analytic).get() == an.get());
  REQUIRE(w.sigma_tree(2.5, SigmaMode::cellwise)->total() ==
          w.sigma_tree(2.5, SigmaMode::cellwise)->total());

  // no model: analytic silently degrades to cellwise
  Weight plain(GridFunction(g, std::vector<double>(size_t(g.cells()), 3.0)));
  REQUIRE(*plain.sigma_cells(2.0, SigmaMode::analytic) ==
          *plain.sigma_cells(2.0, SigmaMode::cellwise));
}

TEST_CASE("log tree integrates log w") {
  GridSpec g = build_grid(-2.0, 2, 4);
  Weight w = make_step_weight(g, 9.0);
  const SumTree& t = w.log_tree();
  // log w = log 9 on [0,1], 0 elsewhere
  auto rng = g.cell_range({0.0, 1.0});
  double integral = t.range(rng.first, rng.second) * g.cell_width();
  REQUIRE(std::abs(integral - std::log(9.0)) < 1e-14);
  REQUIRE(std::abs(t.total() * g.cell_width() - std::log(9.0)) < 1e-14);
}

TEST_CASE("constant weight is exactly constant") {
  GridSpec g = build_grid(-4.0, 3, 7);
  Weight w = make_constant_weight(g, 7.25);
  for (int64_t i = 0; i < g.cells(); ++i) REQUIRE(w.data()[i] == 7.25);
  REQUIRE_THROWS_AS(make_constant_weight(g, 0.0), std::invalid_argument);
}

TEST_CASE("recipe dispatch") {
  GridSpec g = build_grid(-16.0, 5, 8);
  WeightRecipe r;
  r.kind = WeightRecipe::Kind::step;
  r.t = 4.0;
  Weight w = make_weight(r, g);
  REQUIRE(w.avg(Interval{0.0, 1.0}) == 4.0);

  r.kind = WeightRecipe::Kind::two_bump;
  r.delta = 0.5;
  r.N = 8.0;
  r.p = 2.0;
  Weight b = make_weight(r, g);
  REQUIRE(b.data()[0] == 1.0);
}
