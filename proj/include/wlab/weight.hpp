#pragma once

// Weights: strictly positive grid functions with cached summation trees, the
// example zoo (constant, power, step, two-bump), and the dual weight.

#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wlab/dyadic.hpp"

namespace wlab {

// How sigma = w^{-1/(p-1)} is discretized when a characteristic needs it.
//
//  cellwise: sigma cells are the w cell values raised to -1/(p-1). This keeps
//    the per-interval duality A_{p'}(sigma;I) = A_p(w;I)^{1/(p-1)} an exact
//    algebraic identity on the grid.
//  analytic: when the weight carries a closed-form power-law model, sigma
//    cells are the exact cell averages of the continuum w^{-1/(p-1)}.
//    Near a power singularity the cellwise transform loses mass like h^delta
//    on the singular cell, which stalls refinement convergence of A_p; the
//    analytic averages remove that error entirely. Falls back to cellwise
//    when no model applies or the transformed exponent is not integrable.
enum class SigmaMode { cellwise, analytic };

struct PowerPiece {
  double lo = 0.0, hi = 0.0;  // support [lo, hi)
  double center = 0.0;        // value = coeff * |x - center|^exponent
  double exponent = 0.0;      // > -1 so averages stay finite
  double coeff = 1.0;
};

// Piecewise power-law description of a continuum weight; value 1 off the
// union of pieces. Closed under w -> w^q, which is what makes exact sigma
// cell averages possible.
struct AnalyticModel {
  std::vector<PowerPiece> pieces;

  static double primitive(double u, double e) {  // signed antiderivative of |u|^e
    return std::copysign(std::pow(std::abs(u), e + 1.0), u) / (e + 1.0);
  }

  double integral(double a, double b) const {
    if (!(a < b)) return 0.0;
    double covered = 0.0, acc = 0.0;
    for (const auto& pc : pieces) {
      double lo = std::max(a, pc.lo), hi = std::min(b, pc.hi);
      if (!(lo < hi)) continue;
      covered += hi - lo;
      if (pc.exponent == 0.0)
        acc += pc.coeff * (hi - lo);
      else
        acc += pc.coeff * (primitive(hi - pc.center, pc.exponent) -
                           primitive(lo - pc.center, pc.exponent));
    }
    return acc + ((b - a) - covered);  // default value 1 elsewhere
  }

  std::optional<AnalyticModel> power(double q) const {  // model of w^q
    AnalyticModel out;
    for (const auto& pc : pieces) {
      double e = pc.exponent * q;
      if (e <= -1.0) return std::nullopt;
      out.pieces.push_back({pc.lo, pc.hi, pc.center, e, std::pow(pc.coeff, q)});
    }
    return out;
  }
};

class Weight {
 public:
  explicit Weight(GridFunction data) : Weight(std::move(data), std::nullopt) {}

  Weight(GridFunction data, std::optional<AnalyticModel> model)
      : data_(std::move(data)), model_(std::move(model)),
        state_(std::make_shared<State>()) {
    for (int64_t i = 0; i < data_.size(); ++i)
      if (!(data_[i] > 0.0) || !std::isfinite(data_[i]))
        throw std::invalid_argument("weight cells must be strictly positive and finite");
  }

  const GridFunction& data() const { return data_; }
  const GridSpec& grid() const { return data_.grid(); }
  const AnalyticModel* model() const { return model_ ? &*model_ : nullptr; }

  double integral(const Interval& I) const { return data_.integrate(I); }
  double integral(DyadicInterval q) const { return data_.integrate(q); }
  double avg(const Interval& I) const { return data_.average(I); }
  double avg(DyadicInterval q) const { return data_.average(q); }

  // tree over log of cell values; integral of log w over I = range * h
  const SumTree& log_tree() const {
    std::call_once(state_->log_once, [&] {
      std::vector<double> lg(static_cast<size_t>(data_.size()));
      for (int64_t i = 0; i < data_.size(); ++i) lg[size_t(i)] = std::log(data_[i]);
      state_->logt = std::make_unique<SumTree>(lg);
    });
    return *state_->logt;
  }

  std::shared_ptr<const std::vector<double>> sigma_cells(double p, SigmaMode mode) const {
    return sigma_entry(p, mode).cells;
  }
  std::shared_ptr<const SumTree> sigma_tree(double p, SigmaMode mode) const {
    return sigma_entry(p, mode).tree;
  }

 private:
  struct SigmaEntry {
    double p = 0.0;
    SigmaMode mode = SigmaMode::cellwise;
    std::shared_ptr<const std::vector<double>> cells;
    std::shared_ptr<const SumTree> tree;
  };
  struct State {
    std::once_flag log_once;
    std::unique_ptr<SumTree> logt;
    std::mutex mu;
    std::vector<SigmaEntry> sigmas;
  };

  const SigmaEntry& sigma_entry(double p, SigmaMode mode) const {
    if (!(p > 1.0)) throw std::invalid_argument("dual exponent requires p > 1");
    // analytic is only distinct when a usable model exists
    std::optional<AnalyticModel> dual_model;
    if (mode == SigmaMode::analytic) {
      if (model_) dual_model = model_->power(-1.0 / (p - 1.0));
      if (!dual_model) mode = SigmaMode::cellwise;
    }
    std::lock_guard<std::mutex> lock(state_->mu);
    for (const auto& e : state_->sigmas)
      if (e.p == p && e.mode == mode) return e;
    auto cells = std::make_shared<std::vector<double>>(static_cast<size_t>(data_.size()));
    if (mode == SigmaMode::analytic) {
      const GridSpec& g = grid();
      double h = g.cell_width();
      for (int64_t i = 0; i < data_.size(); ++i)
        (*cells)[size_t(i)] = dual_model->integral(g.cell_left(i), g.cell_left(i + 1)) / h;
    } else {
      double q = -1.0 / (p - 1.0);
      for (int64_t i = 0; i < data_.size(); ++i)
        (*cells)[size_t(i)] = std::pow(data_[i], q);
    }
    state_->sigmas.push_back({p, mode, cells, std::make_shared<SumTree>(*cells)});
    return state_->sigmas.back();
  }

  GridFunction data_;
  std::optional<AnalyticModel> model_;
  std::shared_ptr<State> state_;
};

// sigma as a standalone weight, cellwise per the duality convention
inline Weight dual_weight(const Weight& w, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("dual weight requires p > 1");
  auto cells = w.sigma_cells(p, SigmaMode::cellwise);
  return Weight(GridFunction(w.grid(), *cells));
}

struct WeightRecipe {
  enum class Kind { constant, power, step, two_bump };
  Kind kind = Kind::constant;
  double c = 1.0;                            // constant
  double a = 0.0;                            // power exponent
  double t = 1.0;                            // step height on [0,1]
  double delta = 0.5, N = 0.0, p = 2.0;      // two-bump parameters
};

namespace detail {

inline Weight weight_from_model(const GridSpec& g, AnalyticModel model) {
  double h = g.cell_width();
  GridFunction f = GridFunction::from_cells(
      g, [&](int64_t i) { return model.integral(g.cell_left(i), g.cell_left(i + 1)) / h; });
  return Weight(std::move(f), std::move(model));
}

}  // namespace detail

inline Weight make_constant_weight(const GridSpec& g, double c) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw std::invalid_argument("constant weight must be positive");
  AnalyticModel m;
  m.pieces.push_back({g.origin(), g.right(), 0.0, 0.0, c});
  return Weight(GridFunction::constant(g, c), std::move(m));
}

// w(x) = |x|^a over the whole root
inline Weight make_power_weight(const GridSpec& g, double a) {
  if (!(a > -1.0))
    throw std::invalid_argument("power weight needs exponent > -1 for finite cell averages");
  AnalyticModel m;
  m.pieces.push_back({g.origin(), g.right(), 0.0, a, 1.0});
  return detail::weight_from_model(g, std::move(m));
}

// w = t on [0,1], 1 elsewhere; [0,1] must be grid-aligned inside the root
inline Weight make_step_weight(const GridSpec& g, double t) {
  if (!(t > 0.0) || !std::isfinite(t))
    throw std::invalid_argument("step height must be positive");
  g.index_of(0.0);
  g.index_of(1.0);
  AnalyticModel m;
  m.pieces.push_back({0.0, 1.0, 0.0, 0.0, t});
  return detail::weight_from_model(g, std::move(m));
}

// w = |x|^{(p-1)(1-delta)} on [-1,1], |x-N|^{delta-1} on [N-1,N+1], 1 elsewhere
inline Weight make_two_bump_weight(const GridSpec& g, double delta, double N, double p) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("two-bump delta must lie in (0,1)");
  if (!(N >= 4.0)) throw std::invalid_argument("two-bump center N must be >= 4");
  if (!(p > 1.0)) throw std::invalid_argument("two-bump exponent p must be > 1");
  for (double x : {-1.0, 1.0, N - 1.0, N, N + 1.0}) g.index_of(x);
  AnalyticModel m;
  m.pieces.push_back({-1.0, 1.0, 0.0, (p - 1.0) * (1.0 - delta), 1.0});
  m.pieces.push_back({N - 1.0, N + 1.0, N, delta - 1.0, 1.0});
  return detail::weight_from_model(g, std::move(m));
}

// largest grid-aligned integer center leaving a unit collar inside the root
inline double default_bump_center(const GridSpec& g) {
  double cand = std::floor(pow2(g.span_log2() - 1)) - 2.0;
  while (cand >= 4.0) {
    double q = (cand - g.origin()) / g.cell_width();
    if (q == std::floor(q) && cand + 1.0 <= g.right()) return cand;
    cand -= 1.0;
  }
  throw std::invalid_argument("grid too small to place a two-bump weight");
}

inline Weight make_weight(const WeightRecipe& r, const GridSpec& g) {
  switch (r.kind) {
    case WeightRecipe::Kind::constant: return make_constant_weight(g, r.c);
    case WeightRecipe::Kind::power: return make_power_weight(g, r.a);
    case WeightRecipe::Kind::step: return make_step_weight(g, r.t);
    case WeightRecipe::Kind::two_bump: return make_two_bump_weight(g, r.delta, r.N, r.p);
  }
  throw std::invalid_argument("unknown weight recipe");
}

}  // namespace wlab
