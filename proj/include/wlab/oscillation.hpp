#pragma once

// Local oscillation, the dyadic sharp maximal function, a median-based
// decomposition into a sparse family, and the pointwise domination check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wlab/dyadic.hpp"

namespace wlab {

namespace detail {

// cell values of f over I, zero-extended outside the root, ascending
inline std::vector<double> sorted_cells(const GridFunction& f, const Interval& I) {
  const GridSpec& g = f.grid();
  int64_t total = g.lattice_cells(I);
  auto rng = g.cell_range(I);
  std::vector<double> v;
  v.reserve(static_cast<size_t>(total));
  for (int64_t i = rng.first; i < rng.second; ++i) v.push_back(f[i]);
  v.resize(static_cast<size_t>(total), 0.0);
  std::sort(v.begin(), v.end());
  return v;
}

// floor(lambda * n) cells may stick out; the infimum over centers is half the
// width of the narrowest window of n - K consecutive sorted values
inline double oscillation_of_sorted(const std::vector<double>& v, double lambda) {
  int64_t n = static_cast<int64_t>(v.size());
  int64_t K = static_cast<int64_t>(std::floor(lambda * double(n)));
  if (K >= n) return 0.0;
  int64_t q = n - K;
  double best = v[size_t(q - 1)] - v[0];
  for (int64_t i = 1; i + q <= n; ++i)
    best = std::min(best, v[size_t(i + q - 1)] - v[size_t(i)]);
  return best / 2.0;
}

}  // namespace detail

// omega_lambda(f; I) = inf_c (|f - c| chi_I)^*(lambda |I|)
inline double local_oscillation(const GridFunction& f, const Interval& I, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("oscillation fraction must lie in (0,1)");
  if (!(I.length() > 0.0)) throw std::invalid_argument("oscillation needs |I| > 0");
  return detail::oscillation_of_sorted(detail::sorted_cells(f, I), lambda);
}

inline double local_oscillation(const GridFunction& f, DyadicInterval q, double lambda) {
  return local_oscillation(f, f.grid().interval_of(q), lambda);
}

// M^{#,d}_{lambda;Q0} f: per cell of Q0, the sup of omega_lambda over the
// dyadic ancestors inside Q0. Cells outside Q0 are zero. Sorted cell
// multisets are merged up the tree, then ancestor maxima flow back down.
inline GridFunction local_sharp_maximal(const GridFunction& f, DyadicInterval q0,
                                        double lambda) {
  const GridSpec& g = f.grid();
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("oscillation fraction must lie in (0,1)");
  g.interval_of(q0);
  int64_t base = g.first_leaf(q0);
  int64_t span = g.leaf_count(q0);
  int depths = g.level() - q0.depth;  // levels below q0

  // upward pass: osc[d][j] for nodes at depth q0.depth + d within q0
  std::vector<std::vector<double>> osc(static_cast<size_t>(depths) + 1);
  std::vector<std::vector<double>> sorted;  // current depth, one per node
  sorted.reserve(static_cast<size_t>(span));
  for (int64_t i = 0; i < span; ++i) sorted.push_back({f[base + i]});
  osc[size_t(depths)].resize(static_cast<size_t>(span));
  for (int64_t i = 0; i < span; ++i)
    osc[size_t(depths)][size_t(i)] = detail::oscillation_of_sorted(sorted[size_t(i)], lambda);
  for (int d = depths - 1; d >= 0; --d) {
    std::vector<std::vector<double>> up(sorted.size() / 2);
    osc[size_t(d)].resize(up.size());
    for (size_t j = 0; j < up.size(); ++j) {
      const auto& a = sorted[2 * j];
      const auto& b = sorted[2 * j + 1];
      up[j].resize(a.size() + b.size());
      std::merge(a.begin(), a.end(), b.begin(), b.end(), up[j].begin());
      osc[size_t(d)][j] = detail::oscillation_of_sorted(up[j], lambda);
    }
    sorted = std::move(up);
  }

  // downward pass: running ancestor max
  std::vector<double> best = {osc[0][0]};
  for (int d = 1; d <= depths; ++d) {
    std::vector<double> nxt(osc[size_t(d)].size());
    for (size_t j = 0; j < nxt.size(); ++j)
      nxt[j] = std::max(best[j / 2], osc[size_t(d)][j]);
    best = std::move(nxt);
  }

  std::vector<double> out(static_cast<size_t>(g.cells()), 0.0);
  for (int64_t i = 0; i < span; ++i) out[size_t(base + i)] = best[size_t(i)];
  return GridFunction(g, std::move(out));
}

struct SparseFamily {
  GridSpec grid;
  DyadicInterval q0{0, 0};
  double base_median = 0.0;
  std::vector<std::vector<DyadicInterval>> levels;  // levels[k] = generation k+1
};

struct FamilyReport {
  bool ok = true;
  std::string violation;  // names the first failed property, empty on success
  DyadicInterval witness{0, 0};
};

inline FamilyReport verify_family(const SparseFamily& fam) {
  const GridSpec& g = fam.grid;
  g.interval_of(fam.q0);
  int64_t root_lo = g.first_leaf(fam.q0);
  int64_t root_hi = root_lo + g.leaf_count(fam.q0);

  auto fail = [](const std::string& what, DyadicInterval w) {
    return FamilyReport{false, what, w};
  };

  std::vector<char> cur(static_cast<size_t>(g.cells()), 0);
  std::vector<char> eset(static_cast<size_t>(g.cells()), 0);
  for (int64_t i = root_lo; i < root_hi; ++i) cur[size_t(i)] = 1;
  std::vector<std::pair<int64_t, int64_t>> cur_cubes = {{root_lo, root_hi}};
  std::vector<DyadicInterval> cur_ids = {fam.q0};

  for (const auto& level : fam.levels) {
    if (level.empty()) return fail("empty generation recorded", fam.q0);
    std::vector<char> next(static_cast<size_t>(g.cells()), 0);
    for (const auto& q : level) {
      if (q.depth < fam.q0.depth || q.depth > g.level())
        return fail("cube depth outside the tree", q);
      g.interval_of(q);
      int64_t lo = g.first_leaf(q), hi = lo + g.leaf_count(q);
      for (int64_t i = lo; i < hi; ++i) {
        if (!cur[size_t(i)]) return fail("cube not nested in the previous generation", q);
        if (next[size_t(i)]) return fail("cubes of one generation overlap", q);
        next[size_t(i)] = 1;
      }
    }
    // each previous-generation cube keeps at least half its cells
    for (size_t c = 0; c < cur_cubes.size(); ++c) {
      int64_t covered = 0;
      for (int64_t i = cur_cubes[c].first; i < cur_cubes[c].second; ++i)
        covered += next[size_t(i)];
      if (2 * covered > cur_cubes[c].second - cur_cubes[c].first)
        return fail("next generation covers more than half of a cube", cur_ids[c]);
    }
    // E sets (cube minus the next generation) stay disjoint across all levels
    for (size_t c = 0; c < cur_cubes.size(); ++c)
      for (int64_t i = cur_cubes[c].first; i < cur_cubes[c].second; ++i)
        if (!next[size_t(i)]) {
          if (eset[size_t(i)]) return fail("difference sets overlap across levels", cur_ids[c]);
          eset[size_t(i)] = 1;
        }
    cur = std::move(next);
    cur_cubes.clear();
    cur_ids.clear();
    for (const auto& q : level) {
      int64_t lo = g.first_leaf(q);
      cur_cubes.push_back({lo, lo + g.leaf_count(q)});
      cur_ids.push_back(q);
    }
  }
  return FamilyReport{};
}

// Median decomposition. For each selected cube Q take the lower median m_Q,
// the quantile tau(Q) = (|f - m_Q| chi_Q)^*(|Q|/4), and select the maximal
// dyadic R inside Q on which the set {|f - m_Q| > tau(Q)} has strict cell
// majority. A single cell inside that set qualifies, so the selected cubes
// cover it, and the parent of a selected cube never holds the majority,
// which is the geometry the domination argument needs. The quantile keeps
// each generation inside half of its parent cube.
inline SparseFamily decompose(const GridFunction& f, DyadicInterval q0) {
  const GridSpec& g = f.grid();
  g.interval_of(q0);
  SparseFamily fam{g, q0, median(f, q0), {}};

  std::function<void(const std::vector<int64_t>&, int64_t, int64_t, int64_t, DyadicInterval,
                     std::vector<DyadicInterval>&)>
      select = [&](const std::vector<int64_t>& prefix, int64_t base, int64_t lo, int64_t hi,
                   DyadicInterval node, std::vector<DyadicInterval>& out) {
        int64_t cnt = prefix[size_t(hi - base)] - prefix[size_t(lo - base)];
        if (cnt == 0) return;
        if (2 * cnt > hi - lo) {
          out.push_back(node);
          return;
        }
        if (node.depth == g.level()) return;
        int64_t mid = lo + (hi - lo) / 2;
        select(prefix, base, lo, mid, child(node, 0), out);
        select(prefix, base, mid, hi, child(node, 1), out);
      };

  std::vector<DyadicInterval> current = {q0};
  while (!current.empty()) {
    std::vector<DyadicInterval> next;
    for (const auto& q : current) {
      int64_t lo = g.first_leaf(q);
      int64_t n = g.leaf_count(q);
      double m = median(f, q);
      std::vector<double> dev(static_cast<size_t>(n));
      for (int64_t i = 0; i < n; ++i) dev[size_t(i)] = std::abs(f[lo + i] - m);
      std::vector<double> top = dev;
      std::sort(top.begin(), top.end(), std::greater<double>());
      double tau = top[size_t(n / 4)];  // (K+1)-th largest with K = floor(n/4)
      std::vector<int64_t> prefix(static_cast<size_t>(n) + 1, 0);
      for (int64_t i = 0; i < n; ++i)
        prefix[size_t(i + 1)] = prefix[size_t(i)] + (dev[size_t(i)] > tau ? 1 : 0);
      select(prefix, lo, lo, lo + n, q, next);
    }
    if (next.empty()) break;
    fam.levels.push_back(next);
    current = std::move(next);
  }

  FamilyReport rep = verify_family(fam);
  if (!rep.ok)
    throw std::logic_error("decomposition produced an invalid family: " + rep.violation);
  return fam;
}

struct DominationReport {
  double max_excess = 0.0;  // max over cells of lhs - rhs, <= 0 when the bound holds
  double max_ratio = 0.0;   // max lhs / rhs over cells with rhs > 0
  int64_t cells = 0;
};

// |f - m_f(Q0)| <= 4 M^{#,d}_{1/4;Q0} f + 4 sum_{j,k} omega_{1/8}(f; parent(Q_j^k)) chi_{Q_j^k}
inline DominationReport check_pointwise_bound(const GridFunction& f, DyadicInterval q0,
                                              const SparseFamily& fam) {
  if (!(q0 == fam.q0))
    throw std::invalid_argument("family was not produced from this base cube");
  const GridSpec& g = fam.grid;
  GridFunction sharp = local_sharp_maximal(f, fam.q0, 0.25);
  std::vector<double> osc_sum(static_cast<size_t>(g.cells()), 0.0);
  for (const auto& level : fam.levels)
    for (const auto& q : level) {
      double w = local_oscillation(f, parent(q), 0.125);
      int64_t lo = g.first_leaf(q), hi = lo + g.leaf_count(q);
      for (int64_t i = lo; i < hi; ++i) osc_sum[size_t(i)] += w;
    }

  DominationReport rep;
  int64_t lo = g.first_leaf(fam.q0), hi = lo + g.leaf_count(fam.q0);
  rep.cells = hi - lo;
  bool any = false;
  for (int64_t i = lo; i < hi; ++i) {
    double lhs = std::abs(f[i] - fam.base_median);
    double rhs = 4.0 * sharp[i] + 4.0 * osc_sum[size_t(i)];
    double excess = lhs - rhs;
    if (!any || excess > rep.max_excess) rep.max_excess = excess;
    if (rhs > 0.0) rep.max_ratio = std::max(rep.max_ratio, lhs / rhs);
    any = true;
  }
  return rep;
}

}  // namespace wlab
