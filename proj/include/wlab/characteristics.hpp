#pragma once

// Weight characteristics: local values on an interval, grid-wide suprema over
// three scan scopes, mixed products, and the two-sided testing-condition
// bound built from maximal-function averages.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wlab/dyadic.hpp"
#include "wlab/operators.hpp"
#include "wlab/weight.hpp"

namespace wlab {

enum class ScanScope { dyadic, windowed, all };

struct ScanResult {
  double value = 0.0;
  Interval witness{0.0, 0.0};
  ScanScope scope = ScanScope::dyadic;
};

struct MixedExponents {
  double p = 2.0;
  double r = 2.0;       // second-factor exponent when the factor is A_r
  double alpha = 1.0;   // exponent on A_p
  double beta = 0.0;    // exponent on the second factor
  enum class Second { a_r, ainf_exp, ainf_fw } second = Second::a_r;

  void validate() const {
    if (!(p > 1.0)) throw std::invalid_argument("first exponent requires p > 1");
    if (!(alpha >= 0.0) || !(beta >= 0.0) || !(alpha + beta <= 2.0))
      throw std::invalid_argument("mixed exponents must be nonnegative with sum <= 2");
    if (second == Second::a_r && !(r >= p))
      throw std::invalid_argument("second factor A_r requires r >= p");
  }
};

namespace detail {

// cell range of a grid-aligned positive-length interval inside the root
inline std::pair<int64_t, int64_t> aligned_range(const GridSpec& g, const Interval& I) {
  int64_t a = g.index_of(I.left), b = g.index_of(I.right);
  if (!(a < b)) throw std::invalid_argument("interval must have positive length");
  return {a, b};
}

}  // namespace detail

// A_p(w; I) = (avg_I w) * (avg_I sigma)^(p-1)
inline double ap_local(const Weight& w, const Interval& I, double p,
                       SigmaMode mode = SigmaMode::analytic) {
  auto [a, b] = detail::aligned_range(w.grid(), I);
  double n = double(b - a);
  double mw = w.data().tree().range(a, b) / n;
  double ms = w.sigma_tree(p, mode)->range(a, b) / n;
  return mw * std::pow(ms, p - 1.0);
}

inline double ap_local(const Weight& w, DyadicInterval q, double p,
                       SigmaMode mode = SigmaMode::analytic) {
  return ap_local(w, w.grid().interval_of(q), p, mode);
}

// exponential A_infty: (avg_I w) * exp(avg_I log(1/w))
inline double ainf_exp_local(const Weight& w, const Interval& I) {
  auto [a, b] = detail::aligned_range(w.grid(), I);
  double n = double(b - a);
  double mw = w.data().tree().range(a, b) / n;
  double mlog = w.log_tree().range(a, b) / n;
  return mw * std::exp(-mlog);
}

// Fujii-Wilson A_infty: (1/w(I)) * integral_I M(w chi_I), the maximal
// function restricted to subintervals of I
inline double fujii_wilson_local(const Weight& w, const Interval& I) {
  auto [a, b] = detail::aligned_range(w.grid(), I);
  int64_t n = b - a;
  std::vector<double> X(static_cast<size_t>(n) + 1), Y(static_cast<size_t>(n) + 1);
  X[0] = 0.0;
  Y[0] = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    X[size_t(i + 1)] = double(i + 1);
    Y[size_t(i + 1)] = Y[size_t(i)] + w.data()[a + i];
  }
  std::vector<double> M = maxeng::range_maximal(X, Y);
  double num = 0.0;
  for (double v : M) num += v;
  return num / w.data().tree().range(a, b);
}

namespace detail {

// deterministic argmax: larger value wins; ties prefer the smaller left
// endpoint, then the shorter interval
struct ScanBest {
  double value = -1.0;
  int64_t a = 0, b = 0;
  bool any = false;

  void offer(double v, int64_t lo, int64_t hi) {
    if (!any || v > value ||
        (v == value && (lo < a || (lo == a && hi - lo < b - a)))) {
      value = v;
      a = lo;
      b = hi;
      any = true;
    }
  }
};

template <class Eval>
ScanResult scan_sup(const GridSpec& g, ScanScope scope, Eval&& eval) {
  ScanBest best;
  int64_t n = g.cells();
  if (scope == ScanScope::dyadic) {
    for (int d = 0; d <= g.level(); ++d) {
      int64_t len = n >> d;
      for (int64_t j = 0; j < (int64_t{1} << d); ++j)
        best.offer(eval(j * len, (j + 1) * len), j * len, (j + 1) * len);
    }
  } else if (scope == ScanScope::windowed) {
    for (int j = g.level(); j >= 0; --j) {
      int64_t len = int64_t{1} << (g.level() - j);
      for (int64_t a = 0; a + len <= n; ++a) best.offer(eval(a, a + len), a, a + len);
    }
  } else {
    for (int64_t a = 0; a < n; ++a)
      for (int64_t b = a + 1; b <= n; ++b) best.offer(eval(a, b), a, b);
  }
  return {best.value, {g.cell_left(best.a), g.cell_left(best.b)}, scope};
}

}  // namespace detail

inline ScanResult ap_norm(const Weight& w, double p, ScanScope scope,
                          SigmaMode mode = SigmaMode::analytic) {
  if (!(p > 1.0)) throw std::invalid_argument("characteristic requires p > 1");
  const SumTree& wt = w.data().tree();
  auto st = w.sigma_tree(p, mode);
  return detail::scan_sup(w.grid(), scope, [&](int64_t a, int64_t b) {
    double n = double(b - a);
    return (wt.range(a, b) / n) * std::pow(st->range(a, b) / n, p - 1.0);
  });
}

inline ScanResult ainf_exp_norm(const Weight& w, ScanScope scope) {
  const SumTree& wt = w.data().tree();
  const SumTree& lt = w.log_tree();
  return detail::scan_sup(w.grid(), scope, [&](int64_t a, int64_t b) {
    double n = double(b - a);
    return (wt.range(a, b) / n) * std::exp(-lt.range(a, b) / n);
  });
}

namespace detail {

// per-node Fujii-Wilson values from one divide-and-conquer pass
inline std::vector<double> fw_node_table(const Weight& w) {
  const GridSpec& g = w.grid();
  int64_t n = g.cells();
  std::vector<double> X = index_coords(n);
  std::vector<double> Y(static_cast<size_t>(n) + 1, 0.0);
  for (int64_t i = 0; i < n; ++i) Y[size_t(i + 1)] = Y[size_t(i)] + w.data()[i];
  maxeng::NodeMaximalSums r = maxeng::dyadic_range_maximal(X, Y, g.level());
  const SumTree& wt = w.data().tree();
  std::vector<double> fw(r.node_sum.size(), 0.0);
  for (int d = 0; d <= g.level(); ++d) {
    int64_t len = n >> d;
    for (int64_t j = 0; j < (int64_t{1} << d); ++j)
      fw[size_t((int64_t{1} << d) + j)] =
          r.node_sum[size_t((int64_t{1} << d) + j)] / wt.range(j * len, (j + 1) * len);
  }
  return fw;
}

template <class Visit>  // Visit(nodeValue, a, b)
void visit_fw_nodes(const Weight& w, Visit&& visit) {
  const GridSpec& g = w.grid();
  std::vector<double> fw = fw_node_table(w);
  int64_t n = g.cells();
  for (int d = 0; d <= g.level(); ++d) {
    int64_t len = n >> d;
    for (int64_t j = 0; j < (int64_t{1} << d); ++j)
      visit(fw[size_t((int64_t{1} << d) + j)], j * len, (j + 1) * len);
  }
}

}  // namespace detail

// sup of the Fujii-Wilson functional. The dyadic scope runs off one shared
// divide-and-conquer pass; the other scopes evaluate each candidate interval
// separately and are intended for small grids.
inline ScanResult fw_norm(const Weight& w, ScanScope scope) {
  const GridSpec& g = w.grid();
  if (scope == ScanScope::dyadic) {
    detail::ScanBest best;
    detail::visit_fw_nodes(w, [&](double v, int64_t a, int64_t b) { best.offer(v, a, b); });
    return {best.value, {g.cell_left(best.a), g.cell_left(best.b)}, scope};
  }
  return detail::scan_sup(g, scope, [&](int64_t a, int64_t b) {
    return fujii_wilson_local(w, {g.cell_left(a), g.cell_left(b)});
  });
}

// joint supremum of A_p^alpha * (second factor)^beta over one interval family
inline ScanResult mixed_norm(const Weight& w, const MixedExponents& e, ScanScope scope,
                             SigmaMode mode = SigmaMode::analytic) {
  e.validate();
  const GridSpec& g = w.grid();
  const SumTree& wt = w.data().tree();
  auto sp = w.sigma_tree(e.p, mode);

  auto ap_at = [&](int64_t a, int64_t b) {
    double n = double(b - a);
    return (wt.range(a, b) / n) * std::pow(sp->range(a, b) / n, e.p - 1.0);
  };

  if (e.second == MixedExponents::Second::a_r) {
    auto sr = w.sigma_tree(e.r, mode);
    return detail::scan_sup(g, scope, [&](int64_t a, int64_t b) {
      double n = double(b - a);
      double ar = (wt.range(a, b) / n) * std::pow(sr->range(a, b) / n, e.r - 1.0);
      return std::pow(ap_at(a, b), e.alpha) * std::pow(ar, e.beta);
    });
  }
  if (e.second == MixedExponents::Second::ainf_exp) {
    const SumTree& lt = w.log_tree();
    return detail::scan_sup(g, scope, [&](int64_t a, int64_t b) {
      double n = double(b - a);
      double ai = (wt.range(a, b) / n) * std::exp(-lt.range(a, b) / n);
      return std::pow(ap_at(a, b), e.alpha) * std::pow(ai, e.beta);
    });
  }
  // Fujii-Wilson second factor
  if (scope == ScanScope::dyadic) {
    detail::ScanBest best;
    detail::visit_fw_nodes(w, [&](double v, int64_t a, int64_t b) {
      best.offer(std::pow(ap_at(a, b), e.alpha) * std::pow(v, e.beta), a, b);
    });
    return {best.value, {g.cell_left(best.a), g.cell_left(best.b)}, scope};
  }
  return detail::scan_sup(g, scope, [&](int64_t a, int64_t b) {
    double fw = fujii_wilson_local(w, {g.cell_left(a), g.cell_left(b)});
    return std::pow(ap_at(a, b), e.alpha) * std::pow(fw, e.beta);
  });
}

struct TestingBoundParts {
  double ap = 0.0;        // ||w||_{A_p} at the requested scope
  double fw_w = 0.0;      // Fujii-Wilson norm of w (dyadic scope)
  double fw_sigma = 0.0;  // Fujii-Wilson norm of sigma (dyadic scope)
  double value = 0.0;     // ||w||^{1/p} * max(fw_w^{1/p'}, fw_sigma^{1/p})
};

// two-sided testing bound: ||w||_{A_p}^{1/p} max(FW(w)^{1/p'}, FW(sigma)^{1/p})
inline TestingBoundParts lacey_rhs_parts(const Weight& w, double p, ScanScope ap_scope,
                                         SigmaMode mode = SigmaMode::analytic) {
  if (!(p > 1.0)) throw std::invalid_argument("testing bound requires p > 1");
  TestingBoundParts parts;
  parts.ap = ap_norm(w, p, ap_scope, mode).value;
  parts.fw_w = fw_norm(w, ScanScope::dyadic).value;
  Weight sigma(GridFunction(w.grid(), *w.sigma_cells(p, mode)));
  parts.fw_sigma = fw_norm(sigma, ScanScope::dyadic).value;
  double pp = p / (p - 1.0);
  parts.value = std::pow(parts.ap, 1.0 / p) *
                std::max(std::pow(parts.fw_w, 1.0 / pp), std::pow(parts.fw_sigma, 1.0 / p));
  return parts;
}

inline double lacey_rhs(const Weight& w, double p, ScanScope ap_scope,
                        SigmaMode mode = SigmaMode::analytic) {
  return lacey_rhs_parts(w, p, ap_scope, mode).value;
}

}  // namespace wlab
