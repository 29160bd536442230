#pragma once

// Dyadic grids, intervals, piecewise-constant functions, exact integration,
// rearrangements, medians. Substrate for everything else in the library.
//
// Exactness model: the cell width h is a power of two, the origin is an
// integer multiple of h, and indices stay far below 2^53, so every breakpoint
// and every product value*h is an exact IEEE-754 double. The only rounding
// anywhere is in accumulating cell sums, which always uses one fixed binary
// tree order (SumTree), making results independent of evaluation order and
// thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wlab {

using std::int64_t;

inline double pow2(int e) { return std::ldexp(1.0, e); }

struct Interval {
  double left = 0.0;
  double right = 0.0;
  double length() const { return right - left; }
  bool empty() const { return !(left < right); }
};

// Concentric enlargement gamma*Q: box is snapped outward to the breakpoint
// lattice (and may stick out of the root); measure keeps the un-clipped
// gamma*len(Q), which is the normalizer for averages over gamma*Q under zero
// extension.
struct DilatedInterval {
  Interval box;
  double measure = 0.0;
};

struct DyadicInterval {
  int depth = 0;
  int64_t index = 0;
  friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;
};

inline DyadicInterval parent(DyadicInterval q) {
  if (q.depth <= 0) throw std::invalid_argument("root interval has no parent");
  return {q.depth - 1, q.index >> 1};
}

// side 0 = left child, 1 = right child. Depth validity is the caller's
// business (checked against GridSpec::level where it matters).
inline DyadicInterval child(DyadicInterval q, int side) {
  return {q.depth + 1, 2 * q.index + side};
}

class GridSpec {
 public:
  static constexpr int kMaxLevel = 26;
  static constexpr int kMaxSpan = 40;
  static constexpr int64_t kMaxOriginCells = int64_t{1} << 45;

  GridSpec(double origin, int span_log2, int level)
      : origin_(origin), span_log2_(span_log2), level_(level) {
    if (level < 0 || level > kMaxLevel)
      throw std::invalid_argument("grid level out of range [0, 26]");
    if (span_log2 < -kMaxSpan || span_log2 > kMaxSpan)
      throw std::invalid_argument("grid span_log2 out of range");
    if (!std::isfinite(origin))
      throw std::invalid_argument("grid origin must be finite");
    // Origin must sit on the cell lattice so that all breakpoints are exact.
    double q = origin / cell_width();
    if (q != std::floor(q) || std::abs(q) > double(kMaxOriginCells))
      throw std::invalid_argument("grid origin is not a dyadic multiple of the cell width");
  }

  double origin() const { return origin_; }
  int span_log2() const { return span_log2_; }
  int level() const { return level_; }
  int64_t cells() const { return int64_t{1} << level_; }
  double cell_width() const { return pow2(span_log2_ - level_); }
  double root_length() const { return pow2(span_log2_); }
  double right() const { return origin_ + root_length(); }
  Interval root_interval() const { return {origin_, right()}; }
  DyadicInterval root() const { return {0, 0}; }

  bool contains(DyadicInterval q) const {
    return q.depth >= 0 && q.depth <= level_ && q.index >= 0 &&
           q.index < (int64_t{1} << q.depth);
  }

  double node_length(DyadicInterval q) const { return pow2(span_log2_ - q.depth); }

  Interval interval_of(DyadicInterval q) const {
    require(q);
    double len = node_length(q);
    return {origin_ + double(q.index) * len, origin_ + double(q.index + 1) * len};
  }

  // Finest-cell index range [first, first + count) covered by a node.
  int64_t first_leaf(DyadicInterval q) const { return q.index << (level_ - q.depth); }
  int64_t leaf_count(DyadicInterval q) const { return int64_t{1} << (level_ - q.depth); }

  double cell_left(int64_t i) const { return origin_ + double(i) * cell_width(); }
  double cell_center(int64_t i) const { return origin_ + (double(i) + 0.5) * cell_width(); }
  Interval cell(int64_t i) const { return {cell_left(i), cell_left(i + 1)}; }

  // Largest k with origin + k*h <= x. The float division gives the candidate,
  // exact lattice comparisons fix any rounding in it.
  int64_t floor_lattice(double x) const {
    double h = cell_width();
    auto at = [&](int64_t k) { return origin_ + double(k) * h; };
    int64_t k = int64_t(std::floor((x - origin_) / h));
    while (at(k + 1) <= x) ++k;
    while (at(k) > x) --k;
    return k;
  }
  int64_t ceil_lattice(double x) const {
    int64_t k = floor_lattice(x);
    return (origin_ + double(k) * cell_width() == x) ? k : k + 1;
  }

  // x must be a breakpoint inside [origin, right]; exact by construction.
  int64_t index_of(double x) const {
    double q = (x - origin_) / cell_width();
    int64_t k = std::llround(q);
    if (double(k) != q || k < 0 || k > cells())
      throw std::invalid_argument("endpoint is not grid-aligned");
    return k;
  }

  // Clip I to the root and return the covered cell range [i0, i1).
  // Endpoints inside the root must be grid-aligned.
  std::pair<int64_t, int64_t> cell_range(const Interval& I) const {
    if (I.empty()) return {0, 0};
    double lo = std::max(I.left, origin_);
    double hi = std::min(I.right, right());
    if (!(lo < hi)) return {0, 0};
    return {index_of(lo), index_of(hi)};
  }

  // Number of lattice cells in I (including parts outside the root, where
  // functions are zero). I's endpoints must lie on the extended lattice.
  int64_t lattice_cells(const Interval& I) const {
    double q = I.length() / cell_width();
    int64_t n = std::llround(q);
    if (double(n) != q)
      throw std::invalid_argument("interval is not grid-aligned");
    return n;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  void require(DyadicInterval q) const {
    if (!contains(q)) throw std::invalid_argument("dyadic interval outside grid tree");
  }

  double origin_;
  int span_log2_;
  int level_;
};

inline GridSpec build_grid(double origin, int span_log2, int level) {
  return GridSpec(origin, span_log2, level);
}

inline DilatedInterval dilate(const GridSpec& g, DyadicInterval q, double gamma) {
  if (!(gamma >= 1.0)) throw std::invalid_argument("dilation factor must be >= 1");
  Interval Q = g.interval_of(q);
  double c = 0.5 * (Q.left + Q.right);
  double half = 0.5 * gamma * Q.length();
  double h = g.cell_width();
  int64_t klo = g.floor_lattice(c - half);
  int64_t khi = g.ceil_lattice(c + half);
  return {{g.origin() + double(klo) * h, g.origin() + double(khi) * h},
          gamma * Q.length()};
}

// Fixed-shape binary summation tree over a sequence. range(i, j) adds the
// same O(log n) node values in the same order no matter how the query is
// reached, which pins down every integral bit-for-bit.
class SumTree {
 public:
  SumTree() = default;
  explicit SumTree(const std::vector<double>& v) : n_(int64_t(v.size())) {
    t_.assign(size_t(2 * std::max<int64_t>(n_, 1)), 0.0);
    std::copy(v.begin(), v.end(), t_.begin() + n_);
    for (int64_t j = n_ - 1; j >= 1; --j) t_[size_t(j)] = t_[size_t(2 * j)] + t_[size_t(2 * j + 1)];
  }
  int64_t size() const { return n_; }
  double total() const { return n_ ? t_[1] : 0.0; }
  double range(int64_t i, int64_t j) const {  // sum over [i, j)
    i = std::max<int64_t>(i, 0);
    j = std::min<int64_t>(j, n_);
    double accl = 0.0, accr = 0.0;
    for (i += n_, j += n_; i < j; i >>= 1, j >>= 1) {
      if (i & 1) accl += t_[size_t(i++)];
      if (j & 1) accr = t_[size_t(--j)] + accr;
    }
    return accl + accr;
  }

 private:
  int64_t n_ = 0;
  std::vector<double> t_;
};

// Compensated accumulator for one-off full-vector reductions where a tree
// cache would be wasted. Deterministic for a fixed visiting order.
class Neumaier {
 public:
  void add(double x) {
    double t = s_ + x;
    c_ += (std::abs(s_) >= std::abs(x)) ? (s_ - t) + x : (x - t) + s_;
    s_ = t;
  }
  double value() const { return s_ + c_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

// Piecewise-constant function on the finest cells, zero outside the root.
// Immutable after construction; copies share the payload, and the summation
// tree is built once on first use.
class GridFunction {
 public:
  GridFunction(const GridSpec& g, std::vector<double> vals)
      : p_(std::make_shared<Payload>(g, std::move(vals))) {
    if (int64_t(p_->v.size()) != g.cells())
      throw std::invalid_argument("value count does not match grid cell count");
  }

  static GridFunction constant(const GridSpec& g, double c) {
    return GridFunction(g, std::vector<double>(size_t(g.cells()), c));
  }

  template <class F>
  static GridFunction from_cells(const GridSpec& g, F&& fn) {
    std::vector<double> v(static_cast<size_t>(g.cells()));
    for (int64_t i = 0; i < g.cells(); ++i) v[size_t(i)] = fn(i);
    return GridFunction(g, std::move(v));
  }

  const GridSpec& grid() const { return p_->grid; }
  const std::vector<double>& values() const { return p_->v; }
  double operator[](int64_t i) const { return p_->v[size_t(i)]; }
  int64_t size() const { return int64_t(p_->v.size()); }

  double integrate() const { return tree().total() * grid().cell_width(); }
  double integrate(const Interval& I) const {
    auto [i0, i1] = grid().cell_range(I);
    if (i0 >= i1) return 0.0;
    return tree().range(i0, i1) * grid().cell_width();
  }
  double integrate(DyadicInterval q) const {
    int64_t a = grid().first_leaf(q);
    return tree().range(a, a + grid().leaf_count(q)) * grid().cell_width();
  }
  double average(const Interval& I) const { return integrate(I) / I.length(); }
  double average(DyadicInterval q) const {
    return integrate(q) / grid().node_length(q);
  }
  double average(const DilatedInterval& d) const {
    return integrate(d.box) / d.measure;
  }

  const SumTree& tree() const {
    std::call_once(p_->once, [&] { p_->tree = std::make_unique<SumTree>(p_->v); });
    return *p_->tree;
  }

 private:
  struct Payload {
    Payload(const GridSpec& g_, std::vector<double> v_) : grid(g_), v(std::move(v_)) {}
    GridSpec grid;
    std::vector<double> v;
    mutable std::once_flag once;
    mutable std::unique_ptr<SumTree> tree;
  };
  std::shared_ptr<Payload> p_;
};

namespace detail {

// Cell |values| of f over I, descending, plus the total lattice cell count
// (cells of I outside the root carry value 0 and are not materialized).
inline std::pair<std::vector<double>, int64_t> abs_cells_desc(const GridFunction& f,
                                                              const Interval& I) {
  if (I.empty()) throw std::invalid_argument("empty interval");
  int64_t total = f.grid().lattice_cells(I);
  auto [i0, i1] = f.grid().cell_range(I);
  std::vector<double> vals;
  vals.reserve(size_t(i1 - i0));
  for (int64_t i = i0; i < i1; ++i) vals.push_back(std::abs(f[i]));
  std::sort(vals.begin(), vals.end(), std::greater<>());
  return {std::move(vals), total};
}

// Largest integer k with k*h <= t; the products are exact so no epsilon.
inline int64_t floor_quotient(double t, double h) {
  int64_t k = int64_t(std::floor(t / h));
  while (double(k + 1) * h <= t) ++k;
  while (double(k) * h > t) --k;
  return k;
}

}  // namespace detail

// (|f| restricted to I)^*(t) = inf{a >= 0 : |{x in I : |f(x)| > a}| <= t}.
// Level-set measures are multiples of the cell width h, so the infimum is the
// (floor(t/h)+1)-th largest cell value (0 past the end).
inline double rearrangement_value(const GridFunction& f, const Interval& I, double t) {
  auto [vals, total] = detail::abs_cells_desc(f, I);
  double h = f.grid().cell_width();
  if (!(t > 0.0) || t > double(total) * h)
    throw std::invalid_argument("rearrangement argument outside (0, |I|]");
  int64_t k = detail::floor_quotient(t, h);
  return k < int64_t(vals.size()) ? vals[size_t(k)] : 0.0;
}

// Minimal m with |{f > m}| <= |I|/2 and |{f < m}| <= |I|/2 (lower median).
// With n equal cells this is the ascending order statistic at floor((n-1)/2).
inline double median(const GridFunction& f, const Interval& I) {
  if (I.empty()) throw std::invalid_argument("median over an empty interval");
  int64_t total = f.grid().lattice_cells(I);
  auto [i0, i1] = f.grid().cell_range(I);
  std::vector<double> vals;
  vals.reserve(size_t(total));
  for (int64_t i = i0; i < i1; ++i) vals.push_back(f[i]);
  vals.resize(size_t(total), 0.0);  // zero extension outside the root
  int64_t k = (total - 1) / 2;
  std::nth_element(vals.begin(), vals.begin() + k, vals.end());
  return vals[size_t(k)];
}

inline double median(const GridFunction& f, DyadicInterval q) {
  return median(f, f.grid().interval_of(q));
}

}  // namespace wlab
