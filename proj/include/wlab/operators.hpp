#pragma once

// Discrete operators: maximal functions (uncentered, centered, dyadic, all
// optionally taken with respect to a weight measure), truncated and maximally
// truncated convolution singular integrals, Haar shifts, the dyadic square
// function, vector-valued maximal combinations, and sparse averaging.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wlab/dyadic.hpp"
#include "wlab/oscillation.hpp"
#include "wlab/weight.hpp"

namespace wlab {

// ---------------------------------------------------------------------------
// Chord-slope maximal engine.
//
// Given breakpoints (X_0,Y_0)..(X_n,Y_n) with X strictly increasing, cell i
// gets M_i = max over a <= i < b of (Y_b - Y_a)/(X_b - X_a). With X the cell
// index and Y a prefix sum of w this is the uncentered maximal function of w;
// with X a prefix of the measure it becomes the measure-weighted maximal.
//
// Divide and conquer: intervals inside a child are handled recursively;
// intervals crossing the midpoint reduce to tangents from a breakpoint on one
// side to the convex hull of breakpoints on the other. Chord slope along a
// hull is quasiconcave (a superlevel set is the part of the hull above a line
// through the anchor, which is contiguous by convexity), and strictly rises
// before its peak, so a binary search on consecutive-slope comparisons finds
// the best vertex.
// ---------------------------------------------------------------------------

namespace maxeng {

inline void build_upper_hull(const double* X, const double* Y, int64_t lo, int64_t hi,
                             std::vector<int64_t>& out) {
  out.clear();
  for (int64_t t = lo; t <= hi; ++t) {
    while (out.size() >= 2) {
      int64_t a = out[out.size() - 2], b = out.back();
      double cr = (X[b] - X[a]) * (Y[t] - Y[a]) - (Y[b] - Y[a]) * (X[t] - X[a]);
      if (cr >= 0.0) out.pop_back(); else break;
    }
    out.push_back(t);
  }
}

inline void build_lower_hull(const double* X, const double* Y, int64_t lo, int64_t hi,
                             std::vector<int64_t>& out) {
  out.clear();
  for (int64_t t = lo; t <= hi; ++t) {
    while (out.size() >= 2) {
      int64_t a = out[out.size() - 2], b = out.back();
      double cr = (X[b] - X[a]) * (Y[t] - Y[a]) - (Y[b] - Y[a]) * (X[t] - X[a]);
      if (cr <= 0.0) out.pop_back(); else break;
    }
    out.push_back(t);
  }
}

// best chord slope from anchor a (left of the hull) to an upper hull
inline double best_to_upper(const double* X, const double* Y, int64_t a,
                            const std::vector<int64_t>& hull) {
  size_t lo = 0, hi = hull.size() - 1;
  while (lo < hi) {
    size_t mid = (lo + hi) / 2;
    int64_t v = hull[mid], w = hull[mid + 1];
    if ((Y[w] - Y[a]) * (X[v] - X[a]) > (Y[v] - Y[a]) * (X[w] - X[a]))
      lo = mid + 1;
    else
      hi = mid;
  }
  int64_t v = hull[lo];
  return (Y[v] - Y[a]) / (X[v] - X[a]);
}

// best chord slope from anchor b (right of the hull) to a lower hull; here
// the slope strictly falls after its peak, so the search walks from the right
inline double best_from_lower(const double* X, const double* Y, int64_t b,
                              const std::vector<int64_t>& hull) {
  size_t lo = 0, hi = hull.size() - 1;
  while (lo < hi) {
    size_t mid = (lo + hi + 1) / 2;
    int64_t v = hull[mid], u = hull[mid - 1];
    if ((Y[b] - Y[u]) * (X[b] - X[v]) > (Y[b] - Y[v]) * (X[b] - X[u]))
      hi = mid - 1;
    else
      lo = mid;
  }
  int64_t v = hull[lo];
  return (Y[b] - Y[v]) / (X[b] - X[v]);
}

// raise M over [lo, hi) by intervals crossing mid
inline void crossing_update(const double* X, const double* Y, int64_t lo, int64_t mid,
                            int64_t hi, double* M, std::vector<int64_t>& hullbuf) {
  build_upper_hull(X, Y, mid + 1, hi, hullbuf);
  double run = -std::numeric_limits<double>::infinity();
  for (int64_t i = lo; i < mid; ++i) {
    run = std::max(run, best_to_upper(X, Y, i, hullbuf));
    if (run > M[i]) M[i] = run;
  }
  build_lower_hull(X, Y, lo, mid - 1, hullbuf);
  run = -std::numeric_limits<double>::infinity();
  for (int64_t i = hi - 1; i >= mid; --i) {
    run = std::max(run, best_from_lower(X, Y, i + 1, hullbuf));
    if (run > M[i]) M[i] = run;
  }
}

inline void range_maximal_rec(const double* X, const double* Y, int64_t lo, int64_t hi,
                              double* M, std::vector<int64_t>& hullbuf) {
  if (hi - lo == 1) {
    M[lo] = (Y[lo + 1] - Y[lo]) / (X[lo + 1] - X[lo]);
    return;
  }
  int64_t mid = lo + (hi - lo) / 2;
  range_maximal_rec(X, Y, lo, mid, M, hullbuf);
  range_maximal_rec(X, Y, mid, hi, M, hullbuf);
  crossing_update(X, Y, lo, mid, hi, M, hullbuf);
}

// per-cell maximal over all subintervals of [0, n)
inline std::vector<double> range_maximal(const std::vector<double>& X,
                                         const std::vector<double>& Y) {
  int64_t n = static_cast<int64_t>(X.size()) - 1;
  if (n < 1 || Y.size() != X.size())
    throw std::invalid_argument("breakpoint arrays need n+1 matching entries");
  std::vector<double> M(static_cast<size_t>(n));
  std::vector<int64_t> hullbuf;
  range_maximal_rec(X.data(), Y.data(), 0, n, M.data(), hullbuf);
  return M;
}

struct NodeMaximalSums {
  std::vector<double> cells;     // root-restricted maximal per cell
  std::vector<double> node_sum;  // heap id (1<<d)+j -> sum of M_node over its cells
};

// runs the recursion along the dyadic tree, recording for every node the sum
// of the node-restricted maximal over its cells (the Fujii-Wilson numerator)
inline NodeMaximalSums dyadic_range_maximal(const std::vector<double>& X,
                                            const std::vector<double>& Y, int level) {
  int64_t n = int64_t{1} << level;
  if (static_cast<int64_t>(X.size()) != n + 1 || Y.size() != X.size())
    throw std::invalid_argument("breakpoint arrays do not match the tree size");
  NodeMaximalSums r;
  r.cells.assign(static_cast<size_t>(n), 0.0);
  r.node_sum.assign(static_cast<size_t>(2) << level, 0.0);
  std::vector<int64_t> hullbuf;
  std::function<void(int, int64_t)> rec = [&](int depth, int64_t j) {
    int64_t lo = j << (level - depth), hi = (j + 1) << (level - depth);
    if (hi - lo == 1) {
      r.cells[size_t(lo)] = (Y[size_t(lo + 1)] - Y[size_t(lo)]) /
                            (X[size_t(lo + 1)] - X[size_t(lo)]);
    } else {
      rec(depth + 1, 2 * j);
      rec(depth + 1, 2 * j + 1);
      crossing_update(X.data(), Y.data(), lo, lo + (hi - lo) / 2, hi, r.cells.data(),
                      hullbuf);
    }
    double s = 0.0;
    for (int64_t i = lo; i < hi; ++i) s += r.cells[size_t(i)];
    r.node_sum[size_t((int64_t{1} << depth) + j)] = s;
  };
  rec(0, 0);
  return r;
}

}  // namespace maxeng

// ---------------------------------------------------------------------------
// Maximal operators
// ---------------------------------------------------------------------------

enum class MaxMode { uncentered, centered, dyadic };

namespace detail {

inline std::vector<double> prefix_of(const std::vector<double>& cells) {
  std::vector<double> p(cells.size() + 1, 0.0);
  for (size_t i = 0; i < cells.size(); ++i) p[i + 1] = p[i] + cells[i];
  return p;
}

inline std::vector<double> index_coords(int64_t n) {
  std::vector<double> x(static_cast<size_t>(n) + 1);
  for (int64_t i = 0; i <= n; ++i) x[size_t(i)] = double(i);
  return x;
}

}  // namespace detail

// Hardy-Littlewood style maximal function of f, optionally with respect to a
// weight measure: sup over admissible cell ranges J containing the cell of
// (1/mu(J)) * integral_J |f| dmu
inline GridFunction maximal(const GridFunction& f, MaxMode mode,
                            const Weight* measure = nullptr) {
  const GridSpec& g = f.grid();
  if (measure && !(measure->grid() == g))
    throw std::invalid_argument("measure lives on a different grid");
  int64_t n = g.cells();
  std::vector<double> num(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i)
    num[size_t(i)] = std::abs(f[i]) * (measure ? measure->data()[i] : 1.0);
  std::vector<double> den;
  if (measure) {
    den.resize(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) den[size_t(i)] = measure->data()[i];
  }

  if (mode == MaxMode::uncentered) {
    std::vector<double> X = measure ? detail::prefix_of(den) : detail::index_coords(n);
    std::vector<double> Y = detail::prefix_of(num);
    return GridFunction(g, maxeng::range_maximal(X, Y));
  }

  if (mode == MaxMode::dyadic) {
    // node averages flow down the tree carrying the running ancestor max
    std::vector<double> avg_num = num, avg_den = den;
    std::vector<std::vector<double>> ratio(static_cast<size_t>(g.level()) + 1);
    ratio[size_t(g.level())].resize(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i)
      ratio[size_t(g.level())][size_t(i)] =
          measure ? num[size_t(i)] / den[size_t(i)] : num[size_t(i)];
    for (int d = g.level() - 1; d >= 0; --d) {
      size_t m = size_t(1) << d;
      std::vector<double> nn(m), nd;
      if (measure) nd.resize(m);
      ratio[size_t(d)].resize(m);
      for (size_t j = 0; j < m; ++j) {
        nn[j] = avg_num[2 * j] + avg_num[2 * j + 1];
        if (measure) {
          nd[j] = avg_den[2 * j] + avg_den[2 * j + 1];
          ratio[size_t(d)][j] = nn[j] / nd[j];
        } else {
          ratio[size_t(d)][j] = nn[j] / double(int64_t{1} << (g.level() - d));
        }
      }
      avg_num = std::move(nn);
      if (measure) avg_den = std::move(nd);
    }
    std::vector<double> best = {ratio[0][0]};
    for (int d = 1; d <= g.level(); ++d) {
      std::vector<double> nxt(ratio[size_t(d)].size());
      for (size_t j = 0; j < nxt.size(); ++j)
        nxt[j] = std::max(best[j / 2], ratio[size_t(d)][j]);
      best = std::move(nxt);
    }
    return GridFunction(g, std::move(best));
  }

  // centered: J = [a, b) with a + b in {2i, 2i+1, 2i+2}, quadratic cost
  std::vector<double> pn = detail::prefix_of(num);
  std::vector<double> pd = measure ? detail::prefix_of(den) : std::vector<double>();
  std::vector<double> out(static_cast<size_t>(n), 0.0);
  for (int64_t i = 0; i < n; ++i) {
    double best = 0.0;
    for (int64_t len = 1; len <= n; ++len) {
      for (int64_t s = 2 * i; s <= 2 * i + 2; ++s) {
        if ((s - len) % 2 != 0) continue;
        int64_t a = (s - len) / 2, b = a + len;
        if (a < 0 || b > n || a > i || b <= i) continue;
        double numer = pn[size_t(b)] - pn[size_t(a)];
        double denom = measure ? pd[size_t(b)] - pd[size_t(a)] : double(len);
        best = std::max(best, numer / denom);
      }
    }
    out[size_t(i)] = best;
  }
  return GridFunction(g, std::move(out));
}

// ---------------------------------------------------------------------------
// Convolution kernels and truncated singular integrals
// ---------------------------------------------------------------------------

// Odd kernel on the line, given either in closed form (Hilbert) or as a
// piecewise linear table on the positive axis. Outside the tabulated range
// the kernel continues as a constant multiple of 1/u matched at the edge.
class KernelSpec {
 public:
  static KernelSpec hilbert() {
    KernelSpec k;
    k.hilbert_ = true;
    return k;
  }

  // xs: strictly increasing positive abscissas; ks: values there. If the
  // table covers negative abscissas it must be odd to 1e-9 and only the
  // positive half is kept. bound_c is the constant in |K(u)| <= c/|u|.
  static KernelSpec tabulated(std::vector<double> xs, std::vector<double> ks,
                              double bound_c) {
    if (xs.size() != ks.size() || xs.size() < 2)
      throw std::invalid_argument("kernel table needs matching arrays of size >= 2");
    bool has_negative = std::any_of(xs.begin(), xs.end(), [](double x) { return x < 0.0; });
    if (has_negative) {
      // verify oddness, then keep the positive half
      std::vector<std::pair<double, double>> pts;
      for (size_t i = 0; i < xs.size(); ++i) pts.push_back({xs[i], ks[i]});
      std::sort(pts.begin(), pts.end());
      std::vector<double> px, pk;
      for (auto& [x, v] : pts) {
        if (x == 0.0) {
          if (std::abs(v) > 1e-9)
            throw std::invalid_argument("odd kernel must vanish at the origin sample");
          continue;
        }
        if (x > 0.0) { px.push_back(x); pk.push_back(v); }
      }
      for (auto& [x, v] : pts) {
        if (x >= 0.0) continue;
        auto it = std::lower_bound(px.begin(), px.end(), -x);
        if (it == px.end() || *it != -x)
          throw std::invalid_argument("kernel samples are not symmetric about zero");
        double mirror = pk[size_t(it - px.begin())];
        if (std::abs(v + mirror) > 1e-9)
          throw std::invalid_argument("kernel table violates oddness");
      }
      xs = std::move(px);
      ks = std::move(pk);
    }
    KernelSpec k;
    k.xs_ = std::move(xs);
    k.ks_ = std::move(ks);
    k.c_ = bound_c;
    for (size_t i = 0; i < k.xs_.size(); ++i) {
      if (!(k.xs_[i] > 0.0) || (i > 0 && !(k.xs_[i] > k.xs_[i - 1])))
        throw std::invalid_argument("kernel abscissas must be positive and increasing");
      if (std::abs(k.ks_[i]) * k.xs_[i] > bound_c * (1.0 + 1e-12))
        throw std::invalid_argument("kernel sample violates the size bound c/|u|");
    }
    // antiderivative at the knots, plus hint radii where the sign can change
    k.anti_.assign(k.xs_.size(), 0.0);
    for (size_t i = 1; i < k.xs_.size(); ++i)
      k.anti_[i] = k.anti_[i - 1] +
                   0.5 * (k.ks_[i] + k.ks_[i - 1]) * (k.xs_[i] - k.xs_[i - 1]);
    for (size_t i = 0; i < k.xs_.size(); ++i) k.hints_.push_back(k.xs_[i]);
    for (size_t i = 1; i < k.xs_.size(); ++i)
      if ((k.ks_[i - 1] < 0.0) != (k.ks_[i] < 0.0) && k.ks_[i] != k.ks_[i - 1]) {
        double t = k.ks_[i - 1] / (k.ks_[i - 1] - k.ks_[i]);
        k.hints_.push_back(k.xs_[i - 1] + t * (k.xs_[i] - k.xs_[i - 1]));
      }
    std::sort(k.hints_.begin(), k.hints_.end());
    return k;
  }

  // construction by name: only the one-dimensional kernel is available
  static KernelSpec named(const std::string& name) {
    if (name == "hilbert") return hilbert();
    if (name == "riesz" || name == "beurling")
      throw std::invalid_argument("kernel '" + name +
                                  "' needs dimension >= 2; this laboratory is one-dimensional");
    throw std::invalid_argument("unknown kernel '" + name + "'");
  }

  bool is_hilbert() const { return hilbert_; }

  double value(double u) const {
    if (u == 0.0) throw std::invalid_argument("kernel is singular at zero");
    double s = u < 0.0 ? -1.0 : 1.0, a = std::abs(u);
    if (hilbert_) return s / a;
    if (a <= xs_.front()) return s * ks_.front() * xs_.front() / a;
    if (a >= xs_.back()) return s * ks_.back() * xs_.back() / a;
    size_t j = size_t(std::upper_bound(xs_.begin(), xs_.end(), a) - xs_.begin()) - 1;
    double t = (a - xs_[j]) / (xs_[j + 1] - xs_[j]);
    return s * (ks_[j] + t * (ks_[j + 1] - ks_[j]));
  }

  // integral of K over [a, b] on the positive axis, exact per segment
  double integral(double a, double b) const {
    if (!(a > 0.0) || !(b >= a)) throw std::invalid_argument("kernel integral needs 0 < a <= b");
    if (hilbert_) return std::log(b / a);
    double acc = 0.0, lo = a;
    if (lo < xs_.front()) {
      double hi = std::min(b, xs_.front());
      acc += ks_.front() * xs_.front() * std::log(hi / lo);  // 1/u continuation
      lo = hi;
    }
    while (lo < b && lo < xs_.back()) {
      size_t j = size_t(std::upper_bound(xs_.begin(), xs_.end(), lo) - xs_.begin());
      if (j == 0) j = 1;
      double seg_hi = std::min(b, xs_[j]);
      double x0 = xs_[j - 1], k0 = ks_[j - 1];
      double slope = (ks_[j] - k0) / (xs_[j] - x0);
      auto F = [&](double u) { return k0 * (u - x0) + 0.5 * slope * (u - x0) * (u - x0); };
      acc += F(seg_hi) - F(lo);
      lo = seg_hi;
    }
    if (lo < b) acc += ks_.back() * xs_.back() * std::log(b / lo);
    return acc;
  }

  const std::vector<double>& radius_hints() const { return hints_; }

 private:
  bool hilbert_ = false;
  std::vector<double> xs_, ks_, anti_, hints_;
  double c_ = 1.0;
};

namespace detail {

inline double cell_or_zero(const GridFunction& f, int64_t i) {
  return (i >= 0 && i < f.size()) ? f[i] : 0.0;
}

// integral over eps < |x - y| < delta of f(y) K(x-y) dy for x the center of
// cell i. Split at the radii where f(x-u) or f(x+u) jumps, i.e. (k+1/2)h;
// within a segment the integrand is f-constant and the kernel integrates in
// closed form. Oddness makes the two sides combine through a difference.
inline double truncated_at(const GridFunction& f, int64_t i, double eps, double delta,
                           const KernelSpec& K) {
  const GridSpec& g = f.grid();
  double h = g.cell_width();
  double acc = 0.0;
  int64_t k = static_cast<int64_t>(std::floor(eps / h + 0.5));
  if (k < 0) k = 0;
  while ((k - 0.5) * h > eps && k > 0) --k;           // guard against float drift
  while ((k + 0.5) * h <= eps) ++k;
  for (; (k - 0.5) * h < delta; ++k) {
    double lo = std::max(eps, (k - 0.5) * h);
    double hi = std::min(delta, (k + 0.5) * h);
    if (!(lo < hi)) continue;
    if (k == 0) continue;  // both sides inside the own cell cancel by oddness
    double diff = cell_or_zero(f, i - k) - cell_or_zero(f, i + k);
    if (diff != 0.0) acc += diff * K.integral(lo, hi);
    if (i - k < 0 && i + k >= g.cells()) break;
  }
  return acc;
}

}  // namespace detail

// T_{eps,delta} f at every cell center
inline GridFunction singular_truncated(const GridFunction& f, const KernelSpec& K,
                                       double eps, double delta) {
  if (!(eps > 0.0) || !(delta > eps))
    throw std::invalid_argument("truncation radii need 0 < eps < delta");
  const GridSpec& g = f.grid();
  std::vector<double> out(static_cast<size_t>(g.cells()));
  for (int64_t i = 0; i < g.cells(); ++i)
    out[size_t(i)] = detail::truncated_at(f, i, eps, delta, K);
  return GridFunction(g, std::move(out));
}

// T^* f = sup over 0 < eps < delta of |T_{eps,delta} f|. For piecewise
// constant f and a kernel of one sign per segment, each truncation integral
// is monotone between consecutive candidate radii, so the sup is attained on
// the candidate set: the cell-edge radii (k+1/2)h, plus for tabulated kernels
// the knots and sign-change radii. Cumulative sums G over candidates give
// sup |G_b - G_a| = max G - min G (G at the smallest radius is zero since a
// symmetric annulus inside one cell cancels by oddness).
inline GridFunction singular_maximal(const GridFunction& f, const KernelSpec& K) {
  const GridSpec& g = f.grid();
  int64_t n = g.cells();
  std::vector<double> out(static_cast<size_t>(n));

  if (K.is_hilbert()) {
    // lut[k] = log(k + 1/2); the annulus between radii (k+1/2)h and (k+3/2)h
    // meets exactly the cells at offset +-(k+1), and h cancels in the logs
    std::vector<double> lut(static_cast<size_t>(n) + 1);
    for (int64_t k = 0; k <= n; ++k) lut[size_t(k)] = std::log(double(k) + 0.5);
    const auto& v = f.values();
    for (int64_t i = 0; i < n; ++i) {
      double G = 0.0, mx = 0.0, mn = 0.0;
      int64_t reach = std::max(i, n - 1 - i);
      for (int64_t k = 0; k < reach; ++k) {
        double left = (i - k - 1 >= 0) ? v[size_t(i - k - 1)] : 0.0;
        double right = (i + k + 1 < n) ? v[size_t(i + k + 1)] : 0.0;
        if (left != right) {
          G += (lut[size_t(k + 1)] - lut[size_t(k)]) * (left - right);
          if (G > mx) mx = G;
          if (G < mn) mn = G;
        }
      }
      out[size_t(i)] = mx - mn;
    }
    return GridFunction(g, std::move(out));
  }

  double h = g.cell_width();
  std::vector<double> base;  // shared candidate radii
  for (int64_t k = 0; k <= n; ++k) base.push_back((double(k) + 0.5) * h);
  for (double r : K.radius_hints())
    if (r > 0.0 && r < (double(n) + 0.5) * h) base.push_back(r);
  std::sort(base.begin(), base.end());
  base.erase(std::unique(base.begin(), base.end()), base.end());

  for (int64_t i = 0; i < n; ++i) {
    double G = 0.0, mx = 0.0, mn = 0.0;
    for (size_t t = 0; t + 1 < base.size(); ++t) {
      G += detail::truncated_at(f, i, base[t], base[t + 1], K);
      if (G > mx) mx = G;
      if (G < mn) mn = G;
    }
    out[size_t(i)] = mx - mn;
  }
  return GridFunction(g, std::move(out));
}

// ---------------------------------------------------------------------------
// Haar shifts
// ---------------------------------------------------------------------------

// a generalized Haar function on an interval: one value per dyadic child
struct HaarPair {
  double on_left = 0.0, on_right = 0.0;
};

struct HaarTriple {
  DyadicInterval in{0, 0}, out{0, 0};
  HaarPair h_in, h_out;
};

// S f = sum over Q of sum over triples (1/|Q|) <f, h_in> h_out, with h_in
// supported on a depth m subinterval of Q and h_out on a depth k one
struct HaarShiftSpec {
  int m = 0, k = 0;
  bool cancellative = true;  // mean zero enforced for every Haar pair
  std::function<std::vector<HaarTriple>(const GridSpec&, DyadicInterval)> rule;
};

// Petermichl dyadic shift (m=0, k=1): coefficient from the Haar function of
// Q itself, output the difference of the children Haar functions
inline HaarShiftSpec petermichl_spec() {
  HaarShiftSpec s;
  s.m = 0;
  s.k = 1;
  s.rule = [](const GridSpec&, DyadicInterval q) {
    return std::vector<HaarTriple>{
        {q, child(q, 0), {1.0, -1.0}, {1.0, -1.0}},
        {q, child(q, 1), {1.0, -1.0}, {-1.0, 1.0}},
    };
  };
  return s;
}

// m = k = 0 shift reproducing the martingale expansion: S f = f - avg(f)
inline HaarShiftSpec martingale_spec() {
  HaarShiftSpec s;
  s.rule = [](const GridSpec&, DyadicInterval q) {
    return std::vector<HaarTriple>{{q, q, {1.0, -1.0}, {1.0, -1.0}}};
  };
  return s;
}

namespace detail {

inline int shift_depth_cap(const GridSpec& g, const HaarShiftSpec& spec) {
  int cap = g.level() - std::max(spec.m, spec.k) - 1;
  if (spec.m < 0 || spec.k < 0) throw std::invalid_argument("shift complexity must be >= 0");
  return cap;
}

inline void validate_triple(const GridSpec& g, const HaarShiftSpec& spec, DyadicInterval q,
                            const HaarTriple& t) {
  if (t.in.depth != q.depth + spec.m || t.out.depth != q.depth + spec.k)
    throw std::invalid_argument("haar triple depths disagree with the shift complexity");
  auto inside = [&](DyadicInterval sub) {
    return (sub.index >> (sub.depth - q.depth)) == q.index;
  };
  if (!inside(t.in) || !inside(t.out))
    throw std::invalid_argument("haar triple intervals are not inside their cube");
  double ni = std::max(std::abs(t.h_in.on_left), std::abs(t.h_in.on_right));
  double no = std::max(std::abs(t.h_out.on_left), std::abs(t.h_out.on_right));
  if (ni * no > 1.0 + 1e-12)
    throw std::invalid_argument("haar pair exceeds the unit normalization");
  if (spec.cancellative) {
    if (std::abs(t.h_in.on_left + t.h_in.on_right) > 1e-12 ||
        std::abs(t.h_out.on_left + t.h_out.on_right) > 1e-12)
      throw std::invalid_argument("cancellative shift requires mean-zero haar pairs");
  }
  g.interval_of(t.in);
  g.interval_of(t.out);
}

// paint all contributions at one Q depth into a difference array
inline void paint_depth(const GridFunction& f, const HaarShiftSpec& spec, int depth,
                        std::vector<double>& diff) {
  const GridSpec& g = f.grid();
  double rootlen_inv = 1.0 / g.node_length({depth, 0});
  for (int64_t j = 0; j < (int64_t{1} << depth); ++j) {
    DyadicInterval q{depth, j};
    for (const HaarTriple& t : spec.rule(g, q)) {
      validate_triple(g, spec, q, t);
      DyadicInterval inl = child(t.in, 0), inr = child(t.in, 1);
      double inner = t.h_in.on_left * f.integrate(inl) + t.h_in.on_right * f.integrate(inr);
      double c = inner * rootlen_inv;
      if (c == 0.0) continue;
      DyadicInterval outl = child(t.out, 0), outr = child(t.out, 1);
      int64_t l0 = g.first_leaf(outl), l1 = l0 + g.leaf_count(outl);
      int64_t r0 = g.first_leaf(outr), r1 = r0 + g.leaf_count(outr);
      diff[size_t(l0)] += c * t.h_out.on_left;
      diff[size_t(l1)] -= c * t.h_out.on_left;
      diff[size_t(r0)] += c * t.h_out.on_right;
      diff[size_t(r1)] -= c * t.h_out.on_right;
    }
  }
}

}  // namespace detail

inline GridFunction haar_shift(const HaarShiftSpec& spec, const GridFunction& f) {
  const GridSpec& g = f.grid();
  int cap = detail::shift_depth_cap(g, spec);
  std::vector<double> diff(static_cast<size_t>(g.cells()) + 1, 0.0);
  for (int d = 0; d <= cap; ++d) detail::paint_depth(f, spec, d, diff);
  std::vector<double> out(static_cast<size_t>(g.cells()));
  double run = 0.0;
  for (int64_t i = 0; i < g.cells(); ++i) {
    run += diff[size_t(i)];
    out[size_t(i)] = run;
  }
  return GridFunction(g, std::move(out));
}

// sup over D of |partial sums over depths 0..D|, the truncation running from
// coarse scales to fine ones
inline GridFunction haar_shift_maximal(const HaarShiftSpec& spec, const GridFunction& f) {
  const GridSpec& g = f.grid();
  int cap = detail::shift_depth_cap(g, spec);
  std::vector<double> cum(static_cast<size_t>(g.cells()), 0.0);
  std::vector<double> best(static_cast<size_t>(g.cells()), 0.0);
  for (int d = 0; d <= cap; ++d) {
    std::vector<double> diff(static_cast<size_t>(g.cells()) + 1, 0.0);
    detail::paint_depth(f, spec, d, diff);
    double run = 0.0;
    for (int64_t i = 0; i < g.cells(); ++i) {
      run += diff[size_t(i)];
      cum[size_t(i)] += run;
      best[size_t(i)] = std::max(best[size_t(i)], std::abs(cum[size_t(i)]));
    }
  }
  return GridFunction(g, std::move(best));
}

// ---------------------------------------------------------------------------
// Dyadic square function, vector maximal, sparse averaging
// ---------------------------------------------------------------------------

// S_d f(x)^2 = sum over dyadic Q containing x, Q below the root, of
// (avg_Q f - avg_parent(Q) f)^2
inline GridFunction dyadic_square(const GridFunction& f) {
  const GridSpec& g = f.grid();
  int L = g.level();
  std::vector<std::vector<double>> avg(static_cast<size_t>(L) + 1);
  avg[size_t(L)].assign(f.values().begin(), f.values().end());
  for (int d = L - 1; d >= 0; --d) {
    size_t m = size_t(1) << d;
    avg[size_t(d)].resize(m);
    for (size_t j = 0; j < m; ++j)
      avg[size_t(d)][j] = 0.5 * (avg[size_t(d + 1)][2 * j] + avg[size_t(d + 1)][2 * j + 1]);
  }
  std::vector<double> acc = {0.0};
  for (int d = 1; d <= L; ++d) {
    std::vector<double> nxt(size_t(1) << d);
    for (size_t j = 0; j < nxt.size(); ++j) {
      double jump = avg[size_t(d)][j] - avg[size_t(d - 1)][j / 2];
      nxt[j] = acc[j / 2] + jump * jump;
    }
    acc = std::move(nxt);
  }
  for (auto& x : acc) x = std::sqrt(x);
  return GridFunction(g, std::move(acc));
}

// ell^q combination of componentwise maximal functions
inline GridFunction vec_maximal(const std::vector<GridFunction>& fs, double q, MaxMode mode,
                                const Weight* measure = nullptr) {
  if (fs.empty()) throw std::invalid_argument("vector maximal needs at least one component");
  if (!(q > 1.0)) throw std::invalid_argument("vector exponent must satisfy q > 1");
  const GridSpec& g = fs.front().grid();
  std::vector<double> acc(static_cast<size_t>(g.cells()), 0.0);
  for (const auto& f : fs) {
    if (!(f.grid() == g)) throw std::invalid_argument("vector components live on different grids");
    GridFunction m = maximal(f, mode, measure);
    for (int64_t i = 0; i < g.cells(); ++i) acc[size_t(i)] += std::pow(m[i], q);
  }
  for (auto& x : acc) x = std::pow(x, 1.0 / q);
  return GridFunction(g, std::move(acc));
}

// A_{S,gamma,nu} f = (sum over cubes of the family of (avg_{gamma Q} |f|)^nu chi_Q)^{1/nu}
inline GridFunction sparse_averaging(const SparseFamily& fam, const GridFunction& f,
                                     double gamma, double nu) {
  if (!(gamma >= 1.0)) throw std::invalid_argument("dilation factor must be >= 1");
  if (!(nu >= 1.0)) throw std::invalid_argument("sparse exponent must be >= 1");
  const GridSpec& g = fam.grid;
  if (!(f.grid() == g)) throw std::invalid_argument("function lives on a different grid");
  GridFunction absf = GridFunction::from_cells(g, [&](int64_t i) { return std::abs(f[i]); });
  std::vector<double> acc(static_cast<size_t>(g.cells()), 0.0);
  auto add_level = [&](const std::vector<DyadicInterval>& level) {
    for (const auto& q : level) {
      DilatedInterval dq = dilate(g, q, gamma);
      double a = absf.integrate(dq.box) / dq.measure;
      double val = std::pow(a, nu);
      int64_t lo = g.first_leaf(q), hi = lo + g.leaf_count(q);
      for (int64_t i = lo; i < hi; ++i) acc[size_t(i)] += val;
    }
  };
  for (const auto& level : fam.levels) add_level(level);
  for (auto& x : acc) x = std::pow(x, 1.0 / nu);
  return GridFunction(g, std::move(acc));
}

}  // namespace wlab
