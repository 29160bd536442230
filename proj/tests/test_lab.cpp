#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "wlab/lab.hpp"

using namespace wlab;

namespace {

GridFunction random_function(const GridSpec& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(size_t(g.cells()));
  for (auto& x : v) x = u(rng);
  return GridFunction(g, std::move(v));
}

}  // namespace

TEST_CASE("weighted norm on flat data") {
  GridSpec g = build_grid(0.0, 0, 5);
  GridFunction one = GridFunction::constant(g, 1.0);
  Weight w = make_constant_weight(g, 1.0);

  // ||1||_{L^p(dx)} on a unit root is exactly 1 for every p
  REQUIRE(weighted_norm(one, w, 1.0) == 1.0);
  REQUIRE(weighted_norm(one, w, 2.0) == 1.0);
  REQUIRE(weighted_norm(one, w, 3.5) == 1.0);

  REQUIRE_THROWS_AS(weighted_norm(one, w, 0.5), std::invalid_argument);
  GridSpec g2 = build_grid(0.0, 0, 6);
  REQUIRE_THROWS_AS(weighted_norm(GridFunction::constant(g2, 1.0), w, 2.0),
                    std::invalid_argument);
}

TEST_CASE("weighted norm scaling and step weights") {
  GridSpec g = build_grid(-2.0, 2, 8);
  std::mt19937_64 rng(7);
  GridFunction f = random_function(g, rng);
  Weight w = make_step_weight(g, 9.0);

  // |c| f scales the norm by |c|; exact when c is a power of two and p = 2
  GridFunction f2 = GridFunction::from_cells(g, [&](int64_t i) { return 2.0 * f[i]; });
  REQUIRE(weighted_norm(f2, w, 2.0) == 2.0 * weighted_norm(f, w, 2.0));
  GridFunction f3 = GridFunction::from_cells(g, [&](int64_t i) { return -3.0 * f[i]; });
  double n3 = weighted_norm(f3, w, 2.7);
  REQUIRE(n3 == Catch::Approx(3.0 * weighted_norm(f, w, 2.7)).epsilon(1e-13));

  // w -> 4w scales both norms by 4^{1/p}, so ratios cancel exactly at p = 2
  Weight w4(GridFunction::from_cells(g, [&](int64_t i) { return 4.0 * w.data()[i]; }));
  REQUIRE(weighted_norm(f, w4, 2.0) == 2.0 * weighted_norm(f, w, 2.0));

  // indicator of [0,1] against the step weight: norm is t^{1/p}
  GridFunction chi = buckley_function(g, 1.0);
  double p = 2.5;
  REQUIRE(weighted_norm(chi, w, p) == std::pow(9.0, 1.0 / p));
}

TEST_CASE("refinement preserves integrals and re-averages models") {
  GridSpec g = build_grid(-2.0, 2, 6);
  std::mt19937_64 rng(11);
  GridFunction f = random_function(g, rng);
  GridFunction f2 = refine(f);
  REQUIRE(f2.grid().level() == g.level() + 1);
  REQUIRE(f2.grid().cell_width() == 0.5 * g.cell_width());
  REQUIRE(f2[10] == f[5]);
  REQUIRE(f2[11] == f[5]);
  REQUIRE(f2.integrate() == Catch::Approx(f.integrate()).margin(1e-14));

  // a modeled weight re-averages: the refined cells follow the closed form,
  // not the duplicated coarse averages
  Weight w = make_power_weight(g, 0.5);
  Weight fine = refine(w);
  REQUIRE(fine.model());
  double h = fine.grid().cell_width();
  int64_t i0 = fine.grid().index_of(1.0);
  double expect = (std::pow(1.0 + h, 1.5) - 1.0) / (1.5 * h);
  REQUIRE(fine.data()[i0] == Catch::Approx(expect).epsilon(1e-13));
  // and total mass is preserved
  REQUIRE(fine.data().integrate() == Catch::Approx(w.data().integrate()).epsilon(1e-13));

  // an unmodeled weight falls back to duplication
  Weight plain(GridFunction::from_cells(g, [&](int64_t i) { return 1.0 + f[i] * f[i]; }));
  Weight plain2 = refine(plain);
  REQUIRE_FALSE(plain2.model());
  REQUIRE(plain2.data()[7] == plain.data()[3]);
}

TEST_CASE("buckley family cells match the closed form") {
  GridSpec g = build_grid(-2.0, 2, 8);
  double h = g.cell_width();
  double delta = 0.3;
  GridFunction f = buckley_function(g, delta);

  // zero off [0,1]
  REQUIRE(f[g.index_of(0.0) - 1] == 0.0);
  REQUIRE(f[g.index_of(1.0)] == 0.0);
  // cell k of [0,1] averages x^{delta-1}
  int64_t base = g.index_of(0.0);
  for (int64_t k : {int64_t{0}, int64_t{3}, int64_t{40}}) {
    double a = k * h;
    double cell = (std::pow(a + h, delta) - std::pow(a, delta)) / (delta * h);
    REQUIRE(f[base + k] == cell);
  }
  // total integral telescopes to 1/delta
  REQUIRE(f.integrate() == Catch::Approx(1.0 / delta).epsilon(1e-12));

  // delta = 1 is the plain indicator
  GridFunction chi = buckley_function(g, 1.0);
  REQUIRE(chi[base] == 1.0);
  REQUIRE(chi[g.index_of(1.0) - 1] == 1.0);
  REQUIRE(chi.integrate() == 1.0);

  REQUIRE_THROWS_AS(buckley_function(g, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(buckley_function(g, 1.5), std::invalid_argument);
}

TEST_CASE("haar atoms are mean-zero and L2-normalized") {
  GridSpec g = build_grid(-2.0, 2, 6);
  Weight lebesgue = make_constant_weight(g, 1.0);
  for (DyadicInterval q : {DyadicInterval{0, 0}, DyadicInterval{2, 3}, DyadicInterval{5, 17}}) {
    GridFunction a = haar_atom(g, q);
    REQUIRE(a.integrate() == 0.0);
    REQUIRE(weighted_norm(a, lebesgue, 2.0) == Catch::Approx(1.0).epsilon(1e-14));
  }
  // orthogonality of siblings
  GridFunction a = haar_atom(g, {3, 2}), b = haar_atom(g, {3, 3});
  GridFunction prod = GridFunction::from_cells(g, [&](int64_t i) { return a[i] * b[i]; });
  REQUIRE(prod.integrate() == 0.0);

  REQUIRE_THROWS_AS(haar_atom(g, DyadicInterval{6, 0}), std::invalid_argument);
  REQUIRE_THROWS_AS(haar_atom(g, DyadicInterval{2, 4}), std::invalid_argument);
}

TEST_CASE("random sign functions honor blocks and seeds") {
  GridSpec g = build_grid(0.0, 3, 5);
  std::mt19937_64 a(42), b(42), c(43);
  GridFunction fa = random_sign_function(g, a, 2);
  GridFunction fb = random_sign_function(g, b, 2);
  GridFunction fc = random_sign_function(g, c, 2);
  bool all_signs = true, blocks = true, same = true, differ = false;
  for (int64_t i = 0; i < g.cells(); ++i) {
    all_signs = all_signs && (fa[i] == 1.0 || fa[i] == -1.0);
    same = same && fa[i] == fb[i];
    differ = differ || fa[i] != fc[i];
    if (i % 2 == 0) blocks = blocks && fa[i] == fa[i + 1];
  }
  REQUIRE(all_signs);
  REQUIRE(blocks);
  REQUIRE(same);
  REQUIRE(differ);
  REQUIRE_THROWS_AS(random_sign_function(g, a, 3), std::invalid_argument);
}

TEST_CASE("family parsing and corpus construction") {
  GridSpec g = build_grid(0.0, 3, 6);

  FamilySpec fs = parse_family("buckley");
  Corpus cb = make_corpus(fs, g);
  REQUIRE(cb.members.size() == 5);
  REQUIRE(cb.names[0] == "buckley:1");
  REQUIRE(cb.names[1] == "buckley:0.4");

  Corpus ch = make_corpus(parse_family("haar"), g);
  REQUIRE(ch.members.size() == 31);  // depths 0..4
  REQUIRE(ch.names.front() == "haar:0.0");
  REQUIRE(ch.names.back() == "haar:4.15");

  FamilySpec fr = parse_family("random:99");
  REQUIRE(fr.seed == 99);
  Corpus cr = make_corpus(fr, g);
  REQUIRE(cr.members.size() == 16);
  REQUIRE(cr.names[3] == "random:99:3");

  REQUIRE_THROWS_AS(parse_family("fourier"), std::invalid_argument);
}

TEST_CASE("operator parsing round-trips") {
  REQUIRE(parse_operator("hilbert").kind == OperatorSpec::Kind::hilbert);
  REQUIRE(parse_operator("sd").kind == OperatorSpec::Kind::dyadic_square);
  REQUIRE(parse_operator("max").kind == OperatorSpec::Kind::maximal);
  REQUIRE(parse_operator("petermichl").kind == OperatorSpec::Kind::petermichl);
  REQUIRE(parse_operator("identity").kind == OperatorSpec::Kind::identity);
  REQUIRE(parse_operator("zero").kind == OperatorSpec::Kind::zero);
  OperatorSpec mq = parse_operator("mq:2.5");
  REQUIRE(mq.kind == OperatorSpec::Kind::vec_maximal);
  REQUIRE(mq.q == 2.5);
  REQUIRE(operator_name(mq) == "mq:2.5");
  REQUIRE(operator_name(parse_operator("hilbert")) == "hilbert");
  REQUIRE_THROWS_AS(parse_operator("max:3"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_operator("riesz"), std::invalid_argument);
}

TEST_CASE("operator application dispatches correctly") {
  GridSpec g = build_grid(-2.0, 2, 7);
  std::mt19937_64 rng(5);
  GridFunction f = random_function(g, rng);

  GridFunction id = apply_operator(parse_operator("identity"), f);
  GridFunction z = apply_operator(parse_operator("zero"), f);
  GridFunction sq = apply_operator(parse_operator("sd"), f);
  GridFunction direct = dyadic_square(f);
  bool id_ok = true, z_ok = true, sq_ok = true;
  for (int64_t i = 0; i < g.cells(); ++i) {
    id_ok = id_ok && id[i] == f[i];
    z_ok = z_ok && z[i] == 0.0;
    sq_ok = sq_ok && sq[i] == direct[i];
  }
  REQUIRE(id_ok);
  REQUIRE(z_ok);
  REQUIRE(sq_ok);

  // a one-part sequence through the vector maximal agrees with the scalar one
  GridFunction vm = apply_operator(parse_operator("mq:2"), std::vector<GridFunction>{f});
  GridFunction m = maximal(f, MaxMode::uncentered);
  for (int64_t i = 0; i < g.cells(); ++i)
    REQUIRE(vm[i] == Catch::Approx(m[i]).epsilon(1e-14));

  REQUIRE_THROWS_AS(apply_operator(parse_operator("max"), std::vector<GridFunction>{f, f}),
                    std::invalid_argument);
}

TEST_CASE("input magnitudes") {
  GridSpec g = build_grid(0.0, 1, 4);
  GridFunction f = GridFunction::from_cells(g, [](int64_t i) { return (i % 2) ? -1.5 : 0.5; });
  GridFunction one = input_magnitude({f}, 2.0);
  REQUIRE(one[1] == 1.5);
  REQUIRE(one[2] == 0.5);
  GridFunction two = input_magnitude({f, f}, 2.0);
  REQUIRE(two[1] == Catch::Approx(1.5 * std::sqrt(2.0)).epsilon(1e-14));
  REQUIRE_THROWS_AS(input_magnitude({}, 2.0), std::invalid_argument);
}

TEST_CASE("grouping for the vector maximal") {
  GridSpec g = build_grid(0.0, 2, 5);
  Corpus c = make_corpus(parse_family("random:1"), g);  // 16 members
  OperatorSpec mq = parse_operator("mq:2");
  mq.width = 4;
  auto groups = group_inputs(mq, c);
  REQUIRE(groups.size() == 4);
  REQUIRE(groups[0].parts.size() == 4);
  REQUIRE(groups[0].name == "random:1:0+random:1:1+random:1:2+random:1:3");
  // scalar operators take members one at a time
  auto singles = group_inputs(parse_operator("max"), c);
  REQUIRE(singles.size() == 16);
  REQUIRE(singles[7].name == "random:1:7");
}

TEST_CASE("slope fits recover exact power laws") {
  SlopeFit line = fit_slope({{1.0, 1.0}, {2.0, 2.0}, {8.0, 8.0}});
  REQUIRE(line.slope == 1.0);
  REQUIRE(line.intercept == 0.0);
  REQUIRE(line.residual_max == 0.0);

  SlopeFit inv = fit_slope({{1.0, 3.0}, {2.0, 1.5}, {4.0, 0.75}, {10.0, 0.3}});
  REQUIRE(inv.slope == Catch::Approx(-1.0).epsilon(1e-12));
  REQUIRE(inv.intercept == Catch::Approx(std::log(3.0)).epsilon(1e-12));

  // tiny multiplicative noise moves the slope by at most its magnitude
  SlopeFit noisy = fit_slope(
      {{1.0, 1.0 * (1 + 1e-6)}, {2.0, 2.0 / (1 + 1e-6)}, {4.0, 4.0 * (1 - 1e-6)}});
  REQUIRE(std::abs(noisy.slope - 1.0) < 1e-5);

  REQUIRE_THROWS_AS(fit_slope({{1.0, 1.0}}), std::invalid_argument);
  REQUIRE_THROWS_AS(fit_slope({{1.0, 1.0}, {2.0, -1.0}}), std::invalid_argument);
  REQUIRE_THROWS_AS(fit_slope({{2.0, 1.0}, {2.0, 3.0}}), std::invalid_argument);
}

TEST_CASE("operator norm lower bounds") {
  GridSpec g = build_grid(-2.0, 2, 7);
  Weight w = make_power_weight(g, 0.5);
  Corpus c = make_corpus(parse_family("random:3"), g);

  // the identity has ratio exactly 1 on every member
  NormLowerResult id = operator_norm_lower(parse_operator("identity"), w, 2.0, c);
  REQUIRE(id.value == 1.0);
  REQUIRE(id.skipped == 0);
  REQUIRE(id.rows.size() == 16);

  // Mf >= |f| everywhere, so the maximal ratio is >= 1
  NormLowerResult mx = operator_norm_lower(parse_operator("max"), w, 3.0, c);
  REQUIRE(mx.value >= 1.0);
  REQUIRE_FALSE(mx.argmax.empty());

  // zero members are skipped, all-zero corpora rejected
  Corpus withzero = c;
  withzero.add(GridFunction::constant(g, 0.0), "null");
  NormLowerResult sk = operator_norm_lower(parse_operator("max"), w, 3.0, withzero);
  REQUIRE(sk.skipped == 1);
  REQUIRE(sk.value == mx.value);

  Corpus zeros;
  zeros.add(GridFunction::constant(g, 0.0), "null");
  REQUIRE_THROWS_AS(operator_norm_lower(parse_operator("max"), w, 3.0, zeros),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(operator_norm_lower(parse_operator("max"), w, 3.0, Corpus{}),
                    std::invalid_argument);

  // worker count cannot change any reported number
  NormLowerResult par = operator_norm_lower(parse_operator("max"), w, 3.0, c, 4);
  REQUIRE(par.value == mx.value);
  for (size_t i = 0; i < mx.rows.size(); ++i) {
    REQUIRE(par.rows[i].tnorm == mx.rows[i].tnorm);
    REQUIRE(par.rows[i].fnorm == mx.rows[i].fnorm);
  }
}

TEST_CASE("oscillation condition basics") {
  GridSpec g = build_grid(-2.0, 2, 6);
  FamilySpec fs = parse_family("random:5");
  fs.count = 4;
  Corpus c = make_corpus(fs, g);

  // the zero operator has zero oscillation everywhere
  Cond31Report z = check_condition_31(parse_operator("zero"), 2.0, 1.0, c);
  REQUIRE(z.sup == 0.0);
  REQUIRE(z.rel_change == 0.0);

  // doubling the input leaves the normalized sup unchanged (exactly: all
  // quantities scale by exact powers of two)
  Corpus doubled;
  for (size_t i = 0; i < c.members.size(); ++i)
    doubled.add(GridFunction::from_cells(g, [&](int64_t j) { return 2.0 * c.members[i][j]; }),
                c.names[i]);
  Cond31Report one = check_condition_31(parse_operator("sd"), 2.0, 1.0, c);
  Cond31Report two = check_condition_31(parse_operator("sd"), 2.0, 1.0, doubled);
  REQUIRE(one.sup > 0.0);
  REQUIRE(one.sup == two.sup);
  REQUIRE(one.witness == two.witness);

  // atoms supported on a single node give zero averages on far dilations
  Corpus atoms;
  atoms.add(haar_atom(g, {2, 0}), "haar:2.0");
  Cond31Report a = check_condition_31(parse_operator("sd"), 2.0, 1.0, atoms);
  REQUIRE(a.skipped > 0);

  REQUIRE_THROWS_AS(check_condition_31(parse_operator("sd"), 0.0, 1.0, c),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(check_condition_31(parse_operator("sd"), 2.0, 1.0, Corpus{}),
                    std::invalid_argument);
}

TEST_CASE("oscillation condition is refinement-stable on block corpora") {
  GridSpec g = build_grid(-2.0, 2, 7);
  FamilySpec fs = parse_family("random:8");
  fs.count = 6;
  fs.block = 2;
  Corpus c = make_corpus(fs, g);

  // the square function commutes with cell duplication exactly
  Cond31Report sd = check_condition_31(parse_operator("sd"), 2.0, 1.0, c, 0.125, 2);
  REQUIRE(sd.sup > 0.0);
  REQUIRE(sd.sup_refined == sd.sup);
  REQUIRE(sd.rel_change == 0.0);

  // the dyadic shift sees no new detail either: sign blocks of two cells
  // have no mass at the depths the refined tree adds
  Cond31Report pm = check_condition_31(parse_operator("petermichl"), 1.0, 3.0, c, 0.125, 2);
  REQUIRE(pm.sup > 0.0);
  REQUIRE(pm.sup_refined == pm.sup);
  REQUIRE(pm.rel_change == 0.0);
}

TEST_CASE("key-bound exponents per operator") {
  MixedExponents h = key_bound_exponents(parse_operator("hilbert"), 3.0, 6.0);
  REQUIRE(h.alpha == 0.5);
  REQUIRE(h.beta == 0.5);
  REQUIRE(h.p == 3.0);
  REQUIRE(h.r == 6.0);

  MixedExponents s = key_bound_exponents(parse_operator("sd"), 4.0, 8.0);
  REQUIRE(s.alpha == Catch::Approx(1.0 / 3.0));
  REQUIRE(s.beta == Catch::Approx(1.0 / 6.0));

  MixedExponents m = key_bound_exponents(parse_operator("mq:2"), 4.0, 8.0);
  REQUIRE(m.beta == Catch::Approx(1.0 / 6.0));

  MixedExponents b = key_bound_exponents(parse_operator("max"), 4.0, 4.0);
  REQUIRE(b.alpha == Catch::Approx(1.0 / 3.0));
  REQUIRE(b.beta == 0.0);

  REQUIRE_THROWS_AS(key_bound_exponents(parse_operator("hilbert"), 1.9, 6.0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(key_bound_exponents(parse_operator("sd"), 2.9, 8.0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(key_bound_exponents(parse_operator("mq:2"), 3.0, 8.0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(key_bound_exponents(parse_operator("petermichl"), 3.0, 2.5),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(key_bound_exponents(parse_operator("identity"), 3.0, 6.0),
                    std::invalid_argument);

  // generic averaging degree
  MixedExponents a = key_bound_exponents(3.0, 4.0, 8.0);
  REQUIRE(a.beta == Catch::Approx(1.0 / 3.0 - 1.0 / 3.0).margin(1e-15));
  REQUIRE_THROWS_AS(key_bound_exponents(0.5, 4.0, 8.0), std::invalid_argument);
  REQUIRE_THROWS_AS(key_bound_exponents(3.0, 3.5, 8.0), std::invalid_argument);
}

TEST_CASE("key-bound sweep structure") {
  KeyBoundOptions opt;
  opt.grid = build_grid(-2.0, 2, 9);
  opt.params = {0.4, 0.2};
  BoundReport rep = check_key_bound(parse_operator("sd"), 3.0, 6.0, opt);
  REQUIRE(rep.rows.size() == 2);
  for (const auto& row : rep.rows) {
    REQUIRE(row.ratio > 0.0);
    REQUIRE(row.mixed >= 1.0);
    REQUIRE(row.ap >= 1.0);
    REQUIRE(row.lacey >= 1.0);
    REQUIRE(row.constant == row.ratio / row.mixed);
    REQUIRE_FALSE(row.argmax.empty());
    REQUIRE_FALSE(row.unreliable);  // h = 1/128 resolves delta = 0.2
  }
  REQUIRE(rep.constant == std::max(rep.rows[0].constant, rep.rows[1].constant));
  REQUIRE_FALSE(rep.max_setters.empty());

  // rows judged against the observed max always pass; a frozen tiny constant
  // fails them
  for (const auto& row : rep.rows) REQUIRE(row.pass);
  KeyBoundOptions frozen = opt;
  frozen.frozen_constant = 1e-9;
  BoundReport bad = check_key_bound(parse_operator("sd"), 3.0, 6.0, frozen);
  REQUIRE_FALSE(bad.rows[0].pass);
  REQUIRE_FALSE(bad.pass);

  // worker count cannot change a single byte of the report
  KeyBoundOptions par = opt;
  par.workers = 4;
  BoundReport rep4 = check_key_bound(parse_operator("sd"), 3.0, 6.0, par);
  for (size_t i = 0; i < rep.rows.size(); ++i) {
    REQUIRE(rep4.rows[i].ratio == rep.rows[i].ratio);
    REQUIRE(rep4.rows[i].mixed == rep.rows[i].mixed);
    REQUIRE(rep4.rows[i].constant == rep.rows[i].constant);
  }
  REQUIRE(rep4.trend.slope == rep.trend.slope);

  KeyBoundOptions few = opt;
  few.params = {0.4};
  REQUIRE_THROWS_AS(check_key_bound(parse_operator("sd"), 3.0, 6.0, few),
                    std::invalid_argument);
}

TEST_CASE("sharpness experiment wiring") {
  SharpnessOptions opt;
  opt.grid = build_grid(-8.0, 4, 11);
  std::vector<double> deltas = {0.4, 0.2};

  SharpnessResult hs = exp_sharpness(parse_operator("hilbert"), 3.0, 6.0, 0.5, deltas, opt);
  REQUIRE(hs.alpha == 0.5);
  REQUIRE(hs.beta == 0.5);
  REQUIRE(hs.rows.size() == 2);
  for (const auto& row : hs.rows) {
    REQUIRE(row.ratio > 1.0);
    REQUIRE(row.mixed >= 1.0);
    REQUIRE_FALSE(row.unreliable);  // h = 1/128 <= 0.2/8
  }
  // the ratio grows as delta shrinks
  REQUIRE(hs.ratio_fit.slope < 0.0);

  // the square function splits 1/2 = alpha + beta
  SharpnessResult ss = exp_sharpness(parse_operator("sd"), 4.0, 8.0, 0.25, deltas, opt);
  REQUIRE(ss.beta == 0.25);

  // an undersized alpha weakens the mixed term: its slope is strictly
  // shallower, and the constant's drift shifts by exactly that difference
  SharpnessResult gap = exp_sharpness(parse_operator("hilbert"), 3.0, 6.0, 0.25, deltas, opt);
  REQUIRE(gap.mixed_fit.slope > hs.mixed_fit.slope + 0.2);
  REQUIRE(gap.constant_fit.slope - hs.constant_fit.slope ==
          Catch::Approx(hs.mixed_fit.slope - gap.mixed_fit.slope).margin(1e-9));

  REQUIRE_THROWS_AS(exp_sharpness(parse_operator("max"), 3.0, 6.0, 0.5, deltas, opt),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(exp_sharpness(parse_operator("hilbert"), 3.0, 2.0, 0.5, deltas, opt),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(exp_sharpness(parse_operator("hilbert"), 3.0, 6.0, 0.5, {0.4}, opt),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(exp_sharpness(parse_operator("hilbert"), 3.0, 6.0, 0.5, {0.4, 1.2}, opt),
                    std::invalid_argument);
  // beta < 0 violates the exponent constraints
  REQUIRE_THROWS_AS(exp_sharpness(parse_operator("sd"), 4.0, 8.0, 0.9, deltas, opt),
                    std::invalid_argument);
}

TEST_CASE("step experiment wiring") {
  StepOptions opt;
  opt.grid = build_grid(-8.0, 4, 9);

  // a unit step is no weight at all: every characteristic is exactly 1
  StepResult unit = exp_step(4.0, 8.0, {1.0, 2.0}, opt);
  REQUIRE(unit.rows[0].ap == 1.0);
  REQUIRE(unit.rows[0].mixed == 1.0);
  REQUIRE(unit.rows[0].lacey == 1.0);

  StepResult res = exp_step(4.0, 8.0, {9.0, 81.0}, opt);
  REQUIRE(res.rows.size() == 2);
  for (const auto& row : res.rows) {
    REQUIRE(row.ap > 1.0);
    REQUIRE(row.mixed > 1.0);
    REQUIRE(row.fw_bound_ok);
    REQUIRE(row.fw_sigma_bound_ok);
  }
  // A_p witness hugs the step edge from the left
  REQUIRE(res.rows[0].ap_witness.left <= 1.0);
  REQUIRE(res.rows[0].ap_witness.right >= 1.0);
  // A_p roughly linear in t already over one decade
  REQUIRE(res.ap_fit.slope > 0.7);
  REQUIRE(res.ap_fit.slope < 1.05);
  REQUIRE(res.decreasing);

  REQUIRE_THROWS_AS(exp_step(2.0, 8.0, {9.0, 81.0}, opt), std::invalid_argument);
  REQUIRE_THROWS_AS(exp_step(4.0, 3.0, {9.0, 81.0}, opt), std::invalid_argument);
  REQUIRE_THROWS_AS(exp_step(4.0, 8.0, {9.0}, opt), std::invalid_argument);
  REQUIRE_THROWS_AS(exp_step(4.0, 8.0, {9.0, -1.0}, opt), std::invalid_argument);
}

TEST_CASE("bump experiment wiring") {
  BumpOptions opt;
  opt.grid = build_grid(-128.0, 8, 12);
  opt.N = 64.0;

  BumpResult res = exp_bump(4.0, 8.0, {0.5, 0.25}, opt);
  REQUIRE(res.rows.size() == 2);
  for (const auto& row : res.rows) {
    REQUIRE(row.ap > 1.0);
    REQUIRE(row.fw >= 1.0);
    REQUIRE(row.ap_witness_at_origin);
    REQUIRE(row.fw_witness_at_bump);
    REQUIRE(row.mixed_over_lacey == row.mixed / row.lacey);
  }
  REQUIRE(res.witnesses_ok);

  REQUIRE_THROWS_AS(exp_bump(2.0, 8.0, {0.5, 0.25}, opt), std::invalid_argument);
  REQUIRE_THROWS_AS(exp_bump(4.0, 3.0, {0.5, 0.25}, opt), std::invalid_argument);
  REQUIRE_THROWS_AS(exp_bump(4.0, 8.0, {0.5}, opt), std::invalid_argument);
}

TEST_CASE("scope parsing") {
  REQUIRE(parse_scope("dyadic") == ScanScope::dyadic);
  REQUIRE(parse_scope("windowed") == ScanScope::windowed);
  REQUIRE(parse_scope("all") == ScanScope::all);
  REQUIRE(scope_name(ScanScope::windowed) == "windowed");
  REQUIRE_THROWS_AS(parse_scope("global"), std::invalid_argument);
}
