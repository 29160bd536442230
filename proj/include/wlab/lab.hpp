#pragma once

// Experiment layer: weighted L^p norms, test-function corpora, operator
// selectors, operator-norm lower bounds, the local-oscillation condition
// check, key-bound ratio sweeps, and the sharpness / step / bump experiments
// with log-log slope fits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wlab/characteristics.hpp"
#include "wlab/operators.hpp"
#include "wlab/oscillation.hpp"
#include "wlab/parallel.hpp"
#include "wlab/weight.hpp"

namespace wlab {

// ---------------------------------------------------------------------------
// Weighted norms and grid refinement
// ---------------------------------------------------------------------------

inline double weighted_norm(const GridFunction& f, const Weight& w, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("norm exponent must satisfy p >= 1");
  if (!(f.grid() == w.grid()))
    throw std::invalid_argument("function and weight live on different grids");
  const GridSpec& g = f.grid();
  const auto& wv = w.data().values();
  Neumaier acc;
  for (int64_t i = 0; i < g.cells(); ++i)
    acc.add(std::pow(std::abs(f[i]), p) * wv[size_t(i)]);
  return std::pow(acc.value() * g.cell_width(), 1.0 / p);
}

// same piecewise-constant function, one level deeper
inline GridFunction refine(const GridFunction& f) {
  const GridSpec& g = f.grid();
  GridSpec fine = build_grid(g.origin(), g.span_log2(), g.level() + 1);
  return GridFunction::from_cells(fine, [&](int64_t i) { return f[i >> 1]; });
}

// a weight with a closed-form model re-averages exactly on the finer cells;
// otherwise the cells are duplicated like any grid function
inline Weight refine(const Weight& w) {
  const GridSpec& g = w.grid();
  GridSpec fine = build_grid(g.origin(), g.span_log2(), g.level() + 1);
  if (w.model()) return detail::weight_from_model(fine, *w.model());
  const GridFunction& base = w.data();
  return Weight(GridFunction::from_cells(fine, [&](int64_t i) { return base[i >> 1]; }));
}

// ---------------------------------------------------------------------------
// Test-function corpora
// ---------------------------------------------------------------------------

struct Corpus {
  std::vector<GridFunction> members;
  std::vector<std::string> names;

  void add(GridFunction f, std::string name) {
    members.push_back(std::move(f));
    names.push_back(std::move(name));
  }
};

namespace detail {

inline std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace detail

// exact cell averages of x^{delta-1} chi_{[0,1]}; delta = 1 is the indicator
inline GridFunction buckley_function(const GridSpec& g, double delta) {
  if (!(delta > 0.0 && delta <= 1.0))
    throw std::invalid_argument("power-family exponent must lie in (0, 1]");
  int64_t lo = g.index_of(0.0), hi = g.index_of(1.0);
  double h = g.cell_width();
  return GridFunction::from_cells(g, [&](int64_t i) {
    if (i < lo || i >= hi) return 0.0;
    double a = double(i - lo) * h;
    return (std::pow(a + h, delta) - std::pow(a, delta)) / (delta * h);
  });
}

// L^2-normalized Haar function of a tree interval above the finest level
inline GridFunction haar_atom(const GridSpec& g, DyadicInterval q) {
  if (q.depth < 0 || q.depth >= g.level())
    throw std::invalid_argument("haar atom needs an interval above the finest level");
  if (q.index < 0 || q.index >= (int64_t{1} << q.depth))
    throw std::invalid_argument("interval lies outside the tree");
  int64_t nc = g.cells() >> q.depth, start = q.index * nc;
  double v = 1.0 / std::sqrt(g.interval_of(q).length());
  return GridFunction::from_cells(g, [&](int64_t i) {
    if (i < start || i >= start + nc) return 0.0;
    return (i - start < nc / 2) ? v : -v;
  });
}

// random +-1 signs, constant on blocks of `block` cells
inline GridFunction random_sign_function(const GridSpec& g, std::mt19937_64& rng,
                                         int64_t block = 1) {
  if (block < 1 || g.cells() % block != 0)
    throw std::invalid_argument("sign block must divide the cell count");
  std::vector<double> signs(size_t(g.cells() / block));
  for (auto& s : signs) s = (rng() & 1) ? 1.0 : -1.0;
  return GridFunction::from_cells(g, [&](int64_t i) { return signs[size_t(i / block)]; });
}

struct FamilySpec {
  enum class Kind { buckley, haar, random_signs };
  Kind kind = Kind::buckley;
  std::uint64_t seed = 1;                              // random family
  int count = 16;                                      // random family size
  int64_t block = 1;                                   // cells per sign block
  std::vector<double> deltas = {0.4, 0.2, 0.1, 0.05};  // buckley family
  int haar_max_depth = 4;
};

inline FamilySpec parse_family(const std::string& text) {
  FamilySpec fs;
  if (text == "buckley") {
    fs.kind = FamilySpec::Kind::buckley;
  } else if (text == "haar") {
    fs.kind = FamilySpec::Kind::haar;
  } else if (text.rfind("random:", 0) == 0) {
    fs.kind = FamilySpec::Kind::random_signs;
    fs.seed = std::stoull(text.substr(7));
  } else {
    throw std::invalid_argument("unknown test-function family: " + text);
  }
  return fs;
}

inline Corpus make_corpus(const FamilySpec& fs, const GridSpec& g) {
  Corpus c;
  switch (fs.kind) {
    case FamilySpec::Kind::buckley: {
      c.add(buckley_function(g, 1.0), "buckley:1");
      for (double d : fs.deltas)
        c.add(buckley_function(g, d), "buckley:" + detail::short_num(d));
      return c;
    }
    case FamilySpec::Kind::haar: {
      int top = std::min(fs.haar_max_depth, g.level() - 1);
      for (int d = 0; d <= top; ++d)
        for (int64_t k = 0; k < (int64_t{1} << d); ++k)
          c.add(haar_atom(g, {d, k}),
                "haar:" + std::to_string(d) + "." + std::to_string(k));
      return c;
    }
    case FamilySpec::Kind::random_signs: {
      std::mt19937_64 rng(fs.seed);
      for (int i = 0; i < fs.count; ++i)
        c.add(random_sign_function(g, rng, fs.block),
              "random:" + std::to_string(fs.seed) + ":" + std::to_string(i));
      return c;
    }
  }
  throw std::invalid_argument("unknown test-function family");
}

// ---------------------------------------------------------------------------
// Operator selectors
// ---------------------------------------------------------------------------

struct OperatorSpec {
  enum class Kind { hilbert, dyadic_square, maximal, petermichl, vec_maximal, identity, zero };
  Kind kind = Kind::hilbert;
  double q = 2.0;  // ell^q exponent for the vector maximal
  int width = 4;   // corpus members grouped per vector input
};

inline OperatorSpec parse_operator(const std::string& text) {
  OperatorSpec op;
  std::string head = text, arg;
  if (auto c = text.find(':'); c != std::string::npos) {
    head = text.substr(0, c);
    arg = text.substr(c + 1);
  }
  if (head == "hilbert") op.kind = OperatorSpec::Kind::hilbert;
  else if (head == "sd") op.kind = OperatorSpec::Kind::dyadic_square;
  else if (head == "max") op.kind = OperatorSpec::Kind::maximal;
  else if (head == "petermichl") op.kind = OperatorSpec::Kind::petermichl;
  else if (head == "mq") op.kind = OperatorSpec::Kind::vec_maximal;
  else if (head == "identity") op.kind = OperatorSpec::Kind::identity;
  else if (head == "zero") op.kind = OperatorSpec::Kind::zero;
  else throw std::invalid_argument("unknown operator selector: " + text);
  if (!arg.empty()) {
    if (op.kind != OperatorSpec::Kind::vec_maximal)
      throw std::invalid_argument("only the vector maximal takes a parameter");
    op.q = std::stod(arg);
  }
  return op;
}

inline std::string operator_name(const OperatorSpec& op) {
  switch (op.kind) {
    case OperatorSpec::Kind::hilbert: return "hilbert";
    case OperatorSpec::Kind::dyadic_square: return "sd";
    case OperatorSpec::Kind::maximal: return "max";
    case OperatorSpec::Kind::petermichl: return "petermichl";
    case OperatorSpec::Kind::vec_maximal: return "mq:" + detail::short_num(op.q);
    case OperatorSpec::Kind::identity: return "identity";
    case OperatorSpec::Kind::zero: return "zero";
  }
  return "?";
}

// one input to an operator: a single function, or a finite sequence for the
// vector maximal
struct VectorInput {
  std::vector<GridFunction> parts;
  std::string name;
};

// |f| for a single function, (sum |f_i|^q)^{1/q} for a sequence
inline GridFunction input_magnitude(const std::vector<GridFunction>& parts, double q) {
  if (parts.empty()) throw std::invalid_argument("operator input needs at least one component");
  const GridSpec& g = parts.front().grid();
  if (parts.size() == 1)
    return GridFunction::from_cells(g, [&](int64_t i) { return std::abs(parts[0][i]); });
  std::vector<double> acc(size_t(g.cells()), 0.0);
  for (const auto& f : parts) {
    if (!(f.grid() == g))
      throw std::invalid_argument("input components live on different grids");
    for (int64_t i = 0; i < g.cells(); ++i) acc[size_t(i)] += std::pow(std::abs(f[i]), q);
  }
  for (auto& x : acc) x = std::pow(x, 1.0 / q);
  return GridFunction(g, std::move(acc));
}

inline GridFunction apply_operator(const OperatorSpec& op, const std::vector<GridFunction>& parts) {
  if (parts.empty()) throw std::invalid_argument("operator input needs at least one component");
  if (op.kind == OperatorSpec::Kind::vec_maximal)
    return vec_maximal(parts, op.q, MaxMode::uncentered);
  if (parts.size() != 1)
    throw std::invalid_argument("scalar operator applied to a sequence input");
  const GridFunction& f = parts.front();
  switch (op.kind) {
    case OperatorSpec::Kind::hilbert: return singular_maximal(f, KernelSpec::hilbert());
    case OperatorSpec::Kind::dyadic_square: return dyadic_square(f);
    case OperatorSpec::Kind::maximal: return maximal(f, MaxMode::uncentered);
    case OperatorSpec::Kind::petermichl: return haar_shift(petermichl_spec(), f);
    case OperatorSpec::Kind::identity: return f;
    case OperatorSpec::Kind::zero: return GridFunction::constant(f.grid(), 0.0);
    default: break;
  }
  throw std::invalid_argument("unknown operator selector");
}

inline GridFunction apply_operator(const OperatorSpec& op, const GridFunction& f) {
  return apply_operator(op, std::vector<GridFunction>{f});
}

// corpus members become inputs; the vector maximal consumes them in groups
// of `width`, every other operator one at a time
inline std::vector<VectorInput> group_inputs(const OperatorSpec& op, const Corpus& corpus) {
  size_t w = 1;
  if (op.kind == OperatorSpec::Kind::vec_maximal && op.width > 1) w = size_t(op.width);
  std::vector<VectorInput> out;
  for (size_t i = 0; i < corpus.members.size(); i += w) {
    VectorInput vi;
    for (size_t j = i; j < corpus.members.size() && j < i + w; ++j) {
      vi.parts.push_back(corpus.members[j]);
      if (!vi.name.empty()) vi.name += '+';
      vi.name += corpus.names[j];
    }
    out.push_back(std::move(vi));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Log-log slope fits
// ---------------------------------------------------------------------------

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_max = 0.0;
  std::vector<std::pair<double, double>> points;  // (log x, log y)
};

inline SlopeFit fit_slope(const std::vector<std::pair<double, double>>& xy) {
  if (xy.size() < 2) throw std::invalid_argument("slope fit needs at least two points");
  SlopeFit out;
  for (const auto& [x, y] : xy) {
    if (!(x > 0.0) || !(y > 0.0))
      throw std::invalid_argument("slope fit needs positive coordinates");
    out.points.emplace_back(std::log(x), std::log(y));
  }
  double n = double(out.points.size()), sx = 0.0, sy = 0.0;
  for (const auto& [lx, ly] : out.points) { sx += lx; sy += ly; }
  double mx = sx / n, my = sy / n, sxx = 0.0, sxy = 0.0;
  for (const auto& [lx, ly] : out.points) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("slope fit needs distinct x values");
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  for (const auto& [lx, ly] : out.points)
    out.residual_max = std::max(out.residual_max,
                                std::abs(ly - (out.slope * lx + out.intercept)));
  return out;
}

// ---------------------------------------------------------------------------
// Operator-norm lower bounds
// ---------------------------------------------------------------------------

struct NormLowerRow {
  std::string name;
  double tnorm = 0.0;
  double fnorm = 0.0;
  double ratio = 0.0;
};

// max over the family of ||Tf|| / ||f||; a lower bound for the operator
// norm, never the norm itself
struct NormLowerResult {
  double value = 0.0;
  std::string argmax;
  int64_t skipped = 0;  // zero-norm members
  std::vector<NormLowerRow> rows;
};

inline NormLowerResult operator_norm_lower(const OperatorSpec& op, const Weight& w, double p,
                                           const Corpus& corpus, unsigned workers = 1) {
  auto inputs = group_inputs(op, corpus);
  if (inputs.empty()) throw std::invalid_argument("test-function family is empty");
  struct Slot { double tn = 0.0, fn = 0.0; };
  std::vector<Slot> slots(inputs.size());
  parallel_for(int64_t(inputs.size()), workers, [&](int64_t i) {
    const auto& in = inputs[size_t(i)];
    slots[size_t(i)].fn = weighted_norm(input_magnitude(in.parts, op.q), w, p);
    if (slots[size_t(i)].fn == 0.0) return;
    slots[size_t(i)].tn = weighted_norm(apply_operator(op, in.parts), w, p);
  });
  NormLowerResult res;
  for (size_t i = 0; i < inputs.size(); ++i) {
    if (slots[i].fn == 0.0) {
      ++res.skipped;
      continue;
    }
    NormLowerRow row{inputs[i].name, slots[i].tn, slots[i].fn, slots[i].tn / slots[i].fn};
    if (row.ratio > res.value) {
      res.value = row.ratio;
      res.argmax = row.name;
    }
    res.rows.push_back(std::move(row));
  }
  if (res.rows.empty())
    throw std::invalid_argument("every member of the test-function family has zero norm");
  return res;
}

// ---------------------------------------------------------------------------
// Local-oscillation condition
// ---------------------------------------------------------------------------

namespace detail {

struct CondSup {
  double sup = 0.0;
  DyadicInterval witness{0, 0};
  int64_t skipped = 0;
};

inline CondSup condition_sup_one(const OperatorSpec& op, double nu, double gamma,
                                 const std::vector<GridFunction>& parts, double lambda) {
  const GridSpec& g = parts.front().grid();
  GridFunction t = apply_operator(op, parts);
  GridFunction u = GridFunction::from_cells(
      g, [&](int64_t i) { return std::pow(std::abs(t[i]), nu); });
  GridFunction m = input_magnitude(parts, op.q);
  CondSup cs;
  for (int d = 0; d <= g.level(); ++d) {
    for (int64_t k = 0; k < (int64_t{1} << d); ++k) {
      DyadicInterval q{d, k};
      double den = m.average(dilate(g, q, gamma));
      if (den == 0.0) {
        ++cs.skipped;
        continue;
      }
      double val = local_oscillation(u, q, lambda) / std::pow(den, nu);
      if (val > cs.sup) {
        cs.sup = val;
        cs.witness = q;
      }
    }
  }
  return cs;
}

}  // namespace detail

// sup over corpus x tree intervals of omega_lambda(|Tf|^nu; Q) / (avg over
// the gamma-dilation of |f|)^nu, with the same sup recomputed after one grid
// refinement of every input
struct Cond31Report {
  double sup = 0.0;
  std::string argmax;
  DyadicInterval witness{0, 0};
  int64_t skipped = 0;
  double sup_refined = 0.0;
  int64_t skipped_refined = 0;
  double rel_change = 0.0;
};

inline Cond31Report check_condition_31(const OperatorSpec& op, double nu, double gamma,
                                       const Corpus& corpus, double lambda = 0.125,
                                       unsigned workers = 1) {
  if (!(nu > 0.0)) throw std::invalid_argument("condition exponent must be positive");
  auto inputs = group_inputs(op, corpus);
  if (inputs.empty()) throw std::invalid_argument("corpus is empty");
  std::vector<detail::CondSup> base(inputs.size()), fine(inputs.size());
  parallel_for(int64_t(inputs.size()), workers, [&](int64_t i) {
    base[size_t(i)] = detail::condition_sup_one(op, nu, gamma, inputs[size_t(i)].parts, lambda);
    std::vector<GridFunction> rp;
    rp.reserve(inputs[size_t(i)].parts.size());
    for (const auto& f : inputs[size_t(i)].parts) rp.push_back(refine(f));
    fine[size_t(i)] = detail::condition_sup_one(op, nu, gamma, rp, lambda);
  });
  Cond31Report rep;
  for (size_t i = 0; i < inputs.size(); ++i) {
    rep.skipped += base[i].skipped;
    rep.skipped_refined += fine[i].skipped;
    if (base[i].sup > rep.sup) {
      rep.sup = base[i].sup;
      rep.argmax = inputs[i].name;
      rep.witness = base[i].witness;
    }
    rep.sup_refined = std::max(rep.sup_refined, fine[i].sup);
  }
  if (rep.sup > 0.0) rep.rel_change = std::abs(rep.sup_refined - rep.sup) / rep.sup;
  else rep.rel_change = rep.sup_refined > 0.0 ? 1.0 : 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Key-bound sweeps
// ---------------------------------------------------------------------------

// mixed exponents fixed by the operator: alpha = 1/(p-1) on A_p and
// beta = 1/nu - 1/(p-1) on A_r, where nu is the operator's smoothing degree.
// The plain maximal function carries Buckley's bound A_p^{1/(p-1)} alone.
inline MixedExponents key_bound_exponents(const OperatorSpec& op, double p, double r) {
  MixedExponents e;
  e.p = p;
  e.r = r;
  e.second = MixedExponents::Second::a_r;
  double nu = 0.0;
  switch (op.kind) {
    case OperatorSpec::Kind::hilbert:
    case OperatorSpec::Kind::petermichl:
      if (!(p >= 2.0 && p <= r))
        throw std::invalid_argument("singular-integral key bound requires 2 <= p <= r");
      nu = 1.0;
      break;
    case OperatorSpec::Kind::dyadic_square:
      if (!(p >= 3.0 && p <= r))
        throw std::invalid_argument("square-function key bound requires 3 <= p <= r");
      nu = 2.0;
      break;
    case OperatorSpec::Kind::vec_maximal:
      if (!(p > op.q + 1.0 && p <= r))
        throw std::invalid_argument("vector-maximal key bound requires q + 1 < p <= r");
      nu = op.q;
      break;
    case OperatorSpec::Kind::maximal:
      if (!(p > 1.0 && p <= r))
        throw std::invalid_argument("maximal-function bound requires 1 < p <= r");
      e.alpha = 1.0 / (p - 1.0);
      e.beta = 0.0;
      return e;
    default:
      throw std::invalid_argument("no key bound for this operator selector");
  }
  e.alpha = 1.0 / (p - 1.0);
  e.beta = 1.0 / nu - 1.0 / (p - 1.0);
  return e;
}

// general averaging-operator exponents for a given smoothing degree
inline MixedExponents key_bound_exponents(double nu, double p, double r) {
  if (!(nu >= 1.0)) throw std::invalid_argument("smoothing degree must be >= 1");
  if (!(p >= nu + 1.0 && p <= r))
    throw std::invalid_argument("averaging-operator key bound requires nu + 1 <= p <= r");
  MixedExponents e;
  e.p = p;
  e.r = r;
  e.alpha = 1.0 / (p - 1.0);
  e.beta = 1.0 / nu - 1.0 / (p - 1.0);
  e.second = MixedExponents::Second::a_r;
  return e;
}

struct RatioRecord {
  double param = 0.0;
  double tnorm = 0.0;  // ||Tf|| at the argmax input
  double fnorm = 0.0;
  double ratio = 0.0;  // tnorm / fnorm
  double mixed = 0.0;
  Interval mixed_witness{0.0, 0.0};
  double ap = 0.0;
  Interval ap_witness{0.0, 0.0};
  double lacey = 0.0;
  double constant = 0.0;  // ratio / mixed
  ScanScope scope = ScanScope::dyadic;
  std::string argmax;
  int64_t skipped = 0;
  bool unreliable = false;  // sweep parameter unresolved by the cell width
  bool pass = false;        // ratio <= constant policy * mixed
};

inline constexpr double kFlatSlopeTol = 0.05;

struct BoundReport {
  std::vector<RatioRecord> rows;
  double constant = 0.0;  // max observed ratio / mixed, the fitted constant
  std::vector<std::string> max_setters;
  SlopeFit trend;      // constant vs sweep parameter
  bool flat = false;   // |trend.slope| <= kFlatSlopeTol
  bool pass = false;   // flat and every row passes
};

struct KeyBoundOptions {
  GridSpec grid = build_grid(-32.0, 6, 15);
  ScanScope scope = ScanScope::dyadic;
  enum class Sweep { power, step };
  Sweep sweep = Sweep::power;
  std::vector<double> params = {0.2, 0.1, 0.05, 0.025};
  // when > 0, rows are judged against this frozen constant instead of the
  // max observed in this run (refinement reruns)
  double frozen_constant = 0.0;
  unsigned workers = 1;
};

namespace detail {

// matched test inputs for one sweep row
inline Corpus key_bound_corpus(const GridSpec& g, KeyBoundOptions::Sweep sweep, double s) {
  Corpus c;
  if (sweep == KeyBoundOptions::Sweep::power) {
    c.add(buckley_function(g, s), "buckley:" + short_num(s));
    c.add(buckley_function(g, 1.0), "buckley:1");
  } else {
    c.add(buckley_function(g, 1.0), "buckley:1");
    // indicator just right of the step edge, one 2^-3 sliver
    int64_t lo = g.index_of(1.0), hi = g.index_of(1.125);
    c.add(GridFunction::from_cells(
              g, [&](int64_t i) { return (i >= lo && i < hi) ? 1.0 : 0.0; }),
          "edge:1.125");
  }
  // one Haar atom on the tree interval of length 1 at the origin
  int d = g.span_log2();
  int64_t k = g.index_of(0.0) >> (g.level() - d);
  c.add(haar_atom(g, {d, k}), "haar:" + std::to_string(d) + "." + std::to_string(k));
  return c;
}

}  // namespace detail

inline BoundReport check_key_bound(const OperatorSpec& op, double p, double r,
                                   const KeyBoundOptions& opt = {}) {
  MixedExponents e = key_bound_exponents(op, p, r);
  if (opt.params.size() < 2)
    throw std::invalid_argument("sweep needs at least two parameter values");
  const GridSpec& g = opt.grid;
  std::vector<RatioRecord> rows(opt.params.size());
  parallel_for(int64_t(opt.params.size()), opt.workers, [&](int64_t idx) {
    double s = opt.params[size_t(idx)];
    RatioRecord& row = rows[size_t(idx)];
    row.param = s;
    row.scope = opt.scope;
    Weight w = (opt.sweep == KeyBoundOptions::Sweep::power)
                   ? make_power_weight(g, (p - 1.0) * (1.0 - s))
                   : make_step_weight(g, s);
    Corpus corpus = detail::key_bound_corpus(g, opt.sweep, s);
    for (const auto& in : group_inputs(op, corpus)) {
      double fn = weighted_norm(input_magnitude(in.parts, op.q), w, p);
      if (fn == 0.0) {
        ++row.skipped;
        continue;
      }
      double tn = weighted_norm(apply_operator(op, in.parts), w, p);
      if (tn / fn > row.ratio) {
        row.ratio = tn / fn;
        row.tnorm = tn;
        row.fnorm = fn;
        row.argmax = in.name;
      }
    }
    ScanResult mixed = mixed_norm(w, e, opt.scope);
    ScanResult ap = ap_norm(w, p, opt.scope);
    row.mixed = mixed.value;
    row.mixed_witness = mixed.witness;
    row.ap = ap.value;
    row.ap_witness = ap.witness;
    row.lacey = lacey_rhs(w, p, opt.scope);
    row.constant = row.ratio / row.mixed;
    if (opt.sweep == KeyBoundOptions::Sweep::power)
      row.unreliable = g.cell_width() > s / 8.0;
  });
  BoundReport rep;
  rep.rows = std::move(rows);
  for (const auto& row : rep.rows) rep.constant = std::max(rep.constant, row.constant);
  double judge = opt.frozen_constant > 0.0 ? opt.frozen_constant : rep.constant;
  bool all_pass = true;
  std::vector<std::pair<double, double>> pts;
  for (auto& row : rep.rows) {
    if (row.constant == rep.constant) rep.max_setters.push_back(row.argmax);
    row.pass = row.ratio <= judge * row.mixed * (1.0 + 1e-12);
    all_pass = all_pass && row.pass;
    pts.emplace_back(row.param, row.constant);
  }
  rep.trend = fit_slope(pts);
  rep.flat = std::abs(rep.trend.slope) <= kFlatSlopeTol;
  rep.pass = rep.flat && all_pass;
  return rep;
}

// Buckley's bound for the plain maximal function: the key bound with second
// exponent zero
inline BoundReport buckley_check(double p, const KeyBoundOptions& opt = {}) {
  OperatorSpec m;
  m.kind = OperatorSpec::Kind::maximal;
  return check_key_bound(m, p, p, opt);
}

// ---------------------------------------------------------------------------
// Sharpness experiment: matched power-weight / power-function sweep
// ---------------------------------------------------------------------------

struct SharpnessRow {
  double delta = 0.0;
  double tnorm = 0.0;
  double fnorm = 0.0;
  double ratio = 0.0;
  double mixed = 0.0;
  Interval mixed_witness{0.0, 0.0};
  double constant = 0.0;  // ratio / mixed
  bool unreliable = false;
};

struct SharpnessResult {
  double alpha = 0.0, beta = 0.0;
  std::vector<SharpnessRow> rows;
  SlopeFit ratio_fit;     // expected near -1
  SlopeFit mixed_fit;     // expected near -alpha * (p-1)
  SlopeFit constant_fit;  // flat when alpha is large enough
};

struct SharpnessOptions {
  GridSpec grid = build_grid(-32.0, 6, 15);
  ScanScope scope = ScanScope::dyadic;
  unsigned workers = 1;
};

inline SharpnessResult exp_sharpness(const OperatorSpec& op, double p, double r, double alpha,
                                     const std::vector<double>& deltas,
                                     const SharpnessOptions& opt = {}) {
  if (op.kind != OperatorSpec::Kind::hilbert && op.kind != OperatorSpec::Kind::dyadic_square)
    throw std::invalid_argument(
        "sharpness experiment runs the singular maximal or the square function");
  if (!(r > p)) throw std::invalid_argument("sharpness experiment requires r > p");
  if (deltas.size() < 2) throw std::invalid_argument("sweep needs at least two deltas");
  for (double d : deltas)
    if (!(d > 0.0 && d < 1.0))
      throw std::invalid_argument("sweep deltas must lie in (0, 1)");
  SharpnessResult res;
  res.alpha = alpha;
  res.beta = (op.kind == OperatorSpec::Kind::dyadic_square ? 0.5 : 1.0) - alpha;
  MixedExponents e;
  e.p = p;
  e.r = r;
  e.alpha = alpha;
  e.beta = res.beta;
  e.second = MixedExponents::Second::a_r;
  e.validate();
  const GridSpec& g = opt.grid;
  res.rows.resize(deltas.size());
  parallel_for(int64_t(deltas.size()), opt.workers, [&](int64_t i) {
    double d = deltas[size_t(i)];
    SharpnessRow& row = res.rows[size_t(i)];
    row.delta = d;
    Weight w = make_power_weight(g, (p - 1.0) * (1.0 - d));
    GridFunction f = buckley_function(g, d);
    row.fnorm = weighted_norm(f, w, p);
    row.tnorm = weighted_norm(apply_operator(op, f), w, p);
    row.ratio = row.tnorm / row.fnorm;
    ScanResult mixed = mixed_norm(w, e, opt.scope);
    row.mixed = mixed.value;
    row.mixed_witness = mixed.witness;
    row.constant = row.ratio / row.mixed;
    row.unreliable = g.cell_width() > d / 8.0;
  });
  std::vector<std::pair<double, double>> pr, pm, pc;
  for (const auto& row : res.rows) {
    pr.emplace_back(row.delta, row.ratio);
    pm.emplace_back(row.delta, row.mixed);
    pc.emplace_back(row.delta, row.constant);
  }
  res.ratio_fit = fit_slope(pr);
  res.mixed_fit = fit_slope(pm);
  res.constant_fit = fit_slope(pc);
  return res;
}

// ---------------------------------------------------------------------------
// Step-weight experiment
// ---------------------------------------------------------------------------

struct StepRow {
  double t = 0.0;
  double ap = 0.0;
  Interval ap_witness{0.0, 0.0};
  double mixed = 0.0;
  Interval mixed_witness{0.0, 0.0};
  double fw_w = 0.0;
  double fw_sigma = 0.0;
  double lacey = 0.0;
  double lacey_over_mixed = 0.0;
  bool fw_bound_ok = true;        // t >= 3: FW(w) <= 4 log t
  bool fw_sigma_bound_ok = true;  // t >= 3^{p-1}: FW(sigma) <= 4/(p-1) log t
};

struct StepResult {
  std::vector<StepRow> rows;
  SlopeFit ap_fit;     // expected near 1
  SlopeFit mixed_fit;  // expected near 1
  SlopeFit ratio_fit;  // lacey/mixed, expected <= -1/p'
  bool decreasing = false;
  bool ok = false;
};

// Default span [-8,8] keeps the uncentered-maximal log tail short, so the
// Lacey-to-mixed decay is visible already across t = 10^1..10^4.
struct StepOptions {
  GridSpec grid = build_grid(-8.0, 4, 12);
  ScanScope scope = ScanScope::dyadic;
  unsigned workers = 1;
};

inline StepResult exp_step(double p, double r, const std::vector<double>& ts,
                           const StepOptions& opt = {}) {
  if (!(p > 2.0)) throw std::invalid_argument("step experiment requires p > 2");
  if (!(r > p)) throw std::invalid_argument("step experiment requires r > p");
  if (ts.size() < 2) throw std::invalid_argument("sweep needs at least two step heights");
  for (double t : ts)
    if (!(t > 0.0)) throw std::invalid_argument("step height must be positive");
  MixedExponents e;
  e.p = p;
  e.r = r;
  e.alpha = 1.0 / (p - 1.0);
  e.beta = 1.0 - e.alpha;
  e.second = MixedExponents::Second::a_r;
  const GridSpec& g = opt.grid;
  StepResult res;
  res.rows.resize(ts.size());
  parallel_for(int64_t(ts.size()), opt.workers, [&](int64_t i) {
    double t = ts[size_t(i)];
    StepRow& row = res.rows[size_t(i)];
    row.t = t;
    Weight w = make_step_weight(g, t);
    ScanResult ap = ap_norm(w, p, opt.scope);
    ScanResult mixed = mixed_norm(w, e, opt.scope);
    TestingBoundParts parts = lacey_rhs_parts(w, p, opt.scope);
    row.ap = ap.value;
    row.ap_witness = ap.witness;
    row.mixed = mixed.value;
    row.mixed_witness = mixed.witness;
    row.fw_w = parts.fw_w;
    row.fw_sigma = parts.fw_sigma;
    row.lacey = parts.value;
    row.lacey_over_mixed = parts.value / mixed.value;
    if (t >= 3.0) row.fw_bound_ok = row.fw_w <= 4.0 * std::log(t);
    if (t >= std::pow(3.0, p - 1.0))
      row.fw_sigma_bound_ok = row.fw_sigma <= 4.0 / (p - 1.0) * std::log(t);
  });
  std::vector<std::pair<double, double>> pa, pm, pq;
  res.decreasing = true;
  bool bounds = true;
  for (size_t i = 0; i < res.rows.size(); ++i) {
    const auto& row = res.rows[i];
    pa.emplace_back(row.t, row.ap);
    pm.emplace_back(row.t, row.mixed);
    pq.emplace_back(row.t, row.lacey_over_mixed);
    if (i > 0 && !(row.lacey_over_mixed < res.rows[i - 1].lacey_over_mixed))
      res.decreasing = false;
    bounds = bounds && row.fw_bound_ok && row.fw_sigma_bound_ok;
  }
  res.ap_fit = fit_slope(pa);
  res.mixed_fit = fit_slope(pm);
  res.ratio_fit = fit_slope(pq);
  // Linear growth is judged with slack 0.15: the A_r factor inside the mixed
  // constant reaches its t-linear regime slowly, so the fit over one decade
  // sweep sits near 0.86 even though the t -> infinity slope is 1.
  res.ok = bounds && res.decreasing && std::abs(res.ap_fit.slope - 1.0) <= 0.15 &&
           std::abs(res.mixed_fit.slope - 1.0) <= 0.15 && res.ratio_fit.slope <= -0.5;
  return res;
}

// ---------------------------------------------------------------------------
// Two-bump experiment
// ---------------------------------------------------------------------------

struct BumpRow {
  double delta = 0.0;
  double ap = 0.0;
  Interval ap_witness{0.0, 0.0};
  bool ap_witness_at_origin = false;
  double fw = 0.0;
  Interval fw_witness{0.0, 0.0};
  bool fw_witness_at_bump = false;
  double mixed = 0.0;
  double lacey = 0.0;
  double mixed_over_lacey = 0.0;
  bool unreliable = false;
};

struct BumpResult {
  double N = 0.0;
  std::vector<BumpRow> rows;
  SlopeFit mixed_fit;  // expected near -1
  SlopeFit lacey_fit;  // continuum claim <= -2/p'
  SlopeFit ratio_fit;  // mixed/lacey, continuum claim slope 1/2 in delta
  bool witnesses_ok = false;
  bool decreasing = false;
  bool ok = false;
};

struct BumpOptions {
  GridSpec grid = build_grid(-128.0, 8, 17);
  double N = 64.0;
  ScanScope scope = ScanScope::dyadic;
  unsigned workers = 1;
};

inline BumpResult exp_bump(double p, double r, const std::vector<double>& deltas,
                           const BumpOptions& opt = {}) {
  if (!(p > 2.0)) throw std::invalid_argument("bump experiment requires p > 2");
  if (!(r > p)) throw std::invalid_argument("bump experiment requires r > p");
  if (deltas.size() < 2) throw std::invalid_argument("sweep needs at least two deltas");
  MixedExponents e;
  e.p = p;
  e.r = r;
  e.alpha = 1.0 / (p - 1.0);
  e.beta = 1.0 - e.alpha;
  e.second = MixedExponents::Second::a_r;
  const GridSpec& g = opt.grid;
  BumpResult res;
  res.N = opt.N;
  res.rows.resize(deltas.size());
  parallel_for(int64_t(deltas.size()), opt.workers, [&](int64_t i) {
    double d = deltas[size_t(i)];
    BumpRow& row = res.rows[size_t(i)];
    row.delta = d;
    Weight w = make_two_bump_weight(g, d, opt.N, p);
    ScanResult ap = ap_norm(w, p, opt.scope);
    ScanResult fw = fw_norm(w, opt.scope);
    row.ap = ap.value;
    row.ap_witness = ap.witness;
    row.ap_witness_at_origin = ap.witness.left <= 0.0 && ap.witness.right >= 0.0;
    row.fw = fw.value;
    row.fw_witness = fw.witness;
    row.fw_witness_at_bump = fw.witness.left <= opt.N && fw.witness.right >= opt.N;
    row.mixed = mixed_norm(w, e, opt.scope).value;
    row.lacey = lacey_rhs(w, p, opt.scope);
    row.mixed_over_lacey = row.mixed / row.lacey;
    row.unreliable = g.cell_width() > d / 8.0;
  });
  std::vector<std::pair<double, double>> pm, pl, pq;
  res.witnesses_ok = true;
  res.decreasing = true;
  for (size_t i = 0; i < res.rows.size(); ++i) {
    const auto& row = res.rows[i];
    pm.emplace_back(row.delta, row.mixed);
    pl.emplace_back(row.delta, row.lacey);
    pq.emplace_back(row.delta, row.mixed_over_lacey);
    res.witnesses_ok = res.witnesses_ok && row.ap_witness_at_origin && row.fw_witness_at_bump;
    if (i > 0 && !(row.mixed_over_lacey < res.rows[i - 1].mixed_over_lacey))
      res.decreasing = false;
  }
  res.mixed_fit = fit_slope(pm);
  res.lacey_fit = fit_slope(pl);
  res.ratio_fit = fit_slope(pq);
  res.ok = res.witnesses_ok && res.decreasing && res.ratio_fit.slope >= 0.3;
  return res;
}

inline ScanScope parse_scope(const std::string& text) {
  if (text == "dyadic") return ScanScope::dyadic;
  if (text == "windowed") return ScanScope::windowed;
  if (text == "all") return ScanScope::all;
  throw std::invalid_argument("unknown scan scope: " + text);
}

inline std::string scope_name(ScanScope scope) {
  switch (scope) {
    case ScanScope::dyadic: return "dyadic";
    case ScanScope::windowed: return "windowed";
    default: return "all";
  }
}

// One experiment run as loaded from a config file. Fields that a given
// experiment does not use are simply ignored by it.
struct ExperimentConfig {
  std::string experiment = "sharpness";  // sharpness|step|bump|keybound|buckley|cond31
  std::string op = "hilbert";
  double p = 3.0;
  double r = 6.0;
  double alpha = 0.0;  // 0 means: use the exponent the key bound dictates
  std::string scope = "dyadic";
  double origin = 0.0;  // grid override; active only when level > 0
  int span_log2 = 0;
  int level = 0;
  std::vector<double> deltas;  // power sweep / sharpness / bump parameters
  std::vector<double> ts;      // step sweep parameters
  std::string sweep = "power";
  double nu = 2.0;      // condition check smoothing degree
  double gamma = 1.0;   // condition check dilation factor
  double lambda = 0.125;
  std::string family = "random:1";
  int corpus_count = 16;
  std::int64_t block = 1;
  double bump_center = 0.0;  // 0 means: pick the default center for the grid
  double frozen_constant = 0.0;
  unsigned workers = 1;
  std::string out;

  bool has_grid() const { return level > 0; }
  GridSpec grid() const { return build_grid(origin, span_log2, level); }
};

}  // namespace wlab
