#pragma once

// Text formats. Numbers are written with %.17g so that files round-trip
// bit for bit; every writer emits '\n' line endings and nothing else.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wlab/dyadic.hpp"
#include "wlab/lab.hpp"
#include "wlab/operators.hpp"
#include "wlab/oscillation.hpp"

namespace wlab {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

// A witness interval as a single quoted CSV field "left,length".
inline std::string witness_field(const Interval& I) {
  return "\"" + fmt17(I.left) + "," + fmt17(I.length()) + "\"";
}

// ---------------------------------------------------------------------------
// CSV with a trailing comment block for fitted slopes.

class CsvWriter {
 public:
  void header(const std::vector<std::string>& cols) {
    if (cols_ != 0) throw std::logic_error("csv header written twice");
    if (cols.empty()) throw std::invalid_argument("csv header needs at least one column");
    cols_ = cols.size();
    append_joined(cols);
  }

  void row(const std::vector<std::string>& cells) {
    if (cols_ == 0) throw std::logic_error("csv row before header");
    if (cells.size() != cols_)
      throw std::invalid_argument("csv row has wrong number of cells");
    append_joined(cells);
  }

  // trailing summary lines, e.g. "#fit ratio slope=... intercept=..."
  void fit(const std::string& name, const SlopeFit& f) {
    text_ += "#fit " + name + " slope=" + fmt17(f.slope) +
             " intercept=" + fmt17(f.intercept) +
             " residual_max=" + fmt17(f.residual_max) + "\n";
  }

  void note(const std::string& line) { text_ += "#" + line + "\n"; }

  const std::string& text() const { return text_; }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text_;
    if (!out) throw std::runtime_error("write failed: " + path);
  }

 private:
  void append_joined(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }

  std::string text_;
  size_t cols_ = 0;
};

// ---------------------------------------------------------------------------
// Grid functions: a one-line header, then one cell value per line.

inline void save_function(const std::string& path, const GridFunction& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const GridSpec& g = f.grid();
  out << "grid " << fmt17(g.origin()) << ' ' << g.span_log2() << ' '
      << g.level() << '\n';
  for (std::int64_t i = 0; i < g.cells(); ++i) out << fmt17(f[i]) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline GridFunction load_function(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string tag;
  double origin = 0.0;
  int span = 0, level = 0;
  if (!(in >> tag >> origin >> span >> level) || tag != "grid")
    throw std::runtime_error("bad function file header: " + path);
  GridSpec g = build_grid(origin, span, level);
  std::vector<double> v;
  v.reserve(size_t(g.cells()));
  double x = 0.0;
  while (in >> x) v.push_back(x);
  if (std::int64_t(v.size()) != g.cells())
    throw std::runtime_error("function file has wrong cell count: " + path);
  return GridFunction(g, std::move(v));
}

// ---------------------------------------------------------------------------
// Sparse families: header with the grid, the root cube, and the base median,
// then one line "k depth index" per selected interval (k = generation).

inline void save_family(const std::string& path, const SparseFamily& fam) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const GridSpec& g = fam.grid;
  out << "family " << fmt17(g.origin()) << ' ' << g.span_log2() << ' '
      << g.level() << ' ' << fam.q0.depth << ' ' << fam.q0.index << ' '
      << fmt17(fam.base_median) << '\n';
  for (size_t k = 0; k < fam.levels.size(); ++k)
    for (const DyadicInterval& q : fam.levels[k])
      out << (k + 1) << ' ' << q.depth << ' ' << q.index << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline SparseFamily load_family(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string tag;
  double origin = 0.0, median = 0.0;
  int span = 0, level = 0, d0 = 0;
  std::int64_t i0 = 0;
  if (!(in >> tag >> origin >> span >> level >> d0 >> i0 >> median) ||
      tag != "family")
    throw std::runtime_error("bad family file header: " + path);
  SparseFamily fam{build_grid(origin, span, level), {d0, i0}, median, {}};
  size_t k = 0;
  int depth = 0;
  std::int64_t index = 0;
  while (in >> k >> depth >> index) {
    if (k == 0 || k > fam.levels.size() + 1)
      throw std::runtime_error("family file generations out of order: " + path);
    if (k == fam.levels.size() + 1) fam.levels.emplace_back();
    fam.levels[k - 1].push_back(DyadicInterval{depth, index});
  }
  return fam;
}

// ---------------------------------------------------------------------------
// Tabulated kernels: one "x value" pair per line, '#' lines are comments.
// The size bound c in |K(u)| <= c/|u| is taken as the largest |value|*x
// over the table.

inline KernelSpec load_kernel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<double> xs, ks;
  std::string line;
  while (std::getline(in, line)) {
    size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    std::istringstream ls(line);
    double x = 0.0, k = 0.0;
    if (!(ls >> x >> k))
      throw std::runtime_error("bad kernel table line: " + line);
    xs.push_back(x);
    ks.push_back(k);
  }
  if (xs.size() < 2)
    throw std::runtime_error("kernel table needs at least two samples: " + path);
  double c = 0.0;
  for (size_t i = 0; i < xs.size(); ++i)
    c = std::max(c, std::abs(ks[i]) * std::abs(xs[i]));
  return KernelSpec::tabulated(std::move(xs), std::move(ks), c);
}

// ---------------------------------------------------------------------------
// Weight recipe grammar: const:c | power:a | step:t | bump:delta,N,p

namespace detail {

inline std::vector<double> parse_numbers(const std::string& text, size_t want,
                                         const std::string& what) {
  std::vector<double> out;
  std::istringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    size_t used = 0;
    out.push_back(std::stod(piece, &used));
    if (used != piece.size()) throw std::invalid_argument("bad number in " + what + ": " + piece);
  }
  if (out.size() != want)
    throw std::invalid_argument(what + " expects " + std::to_string(want) + " parameters");
  return out;
}

}  // namespace detail

inline WeightRecipe parse_recipe(const std::string& text) {
  size_t colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("weight recipe needs a parameter: " + text);
  std::string head = text.substr(0, colon), arg = text.substr(colon + 1);
  WeightRecipe r;
  if (head == "const") {
    r.kind = WeightRecipe::Kind::constant;
    r.c = detail::parse_numbers(arg, 1, "const recipe")[0];
  } else if (head == "power") {
    r.kind = WeightRecipe::Kind::power;
    r.a = detail::parse_numbers(arg, 1, "power recipe")[0];
  } else if (head == "step") {
    r.kind = WeightRecipe::Kind::step;
    r.t = detail::parse_numbers(arg, 1, "step recipe")[0];
  } else if (head == "bump") {
    std::vector<double> v = detail::parse_numbers(arg, 3, "bump recipe");
    r.kind = WeightRecipe::Kind::two_bump;
    r.delta = v[0];
    r.N = v[1];
    r.p = v[2];
  } else {
    throw std::invalid_argument("unknown weight recipe: " + text);
  }
  return r;
}

inline std::string recipe_name(const WeightRecipe& r) {
  switch (r.kind) {
    case WeightRecipe::Kind::constant: return "const:" + detail::short_num(r.c);
    case WeightRecipe::Kind::power: return "power:" + detail::short_num(r.a);
    case WeightRecipe::Kind::step: return "step:" + detail::short_num(r.t);
    default:
      return "bump:" + detail::short_num(r.delta) + "," + detail::short_num(r.N) + "," +
             detail::short_num(r.p);
  }
}

// ---------------------------------------------------------------------------
// CSV layouts, one emitter per experiment. All data cells go through fmt17;
// the summary lines carry the fitted slopes and the report verdicts.

inline std::string flag(bool b) { return b ? "1" : "0"; }

inline CsvWriter csv_sharpness(const SharpnessResult& res, ScanScope scope) {
  CsvWriter csv;
  csv.header({"delta", "tf_norm", "f_norm", "ratio", "mixed", "mixed_witness", "constant",
              "unreliable", "scope"});
  for (const auto& row : res.rows)
    csv.row({fmt17(row.delta), fmt17(row.tnorm), fmt17(row.fnorm), fmt17(row.ratio),
             fmt17(row.mixed), witness_field(row.mixed_witness), fmt17(row.constant),
             flag(row.unreliable), scope_name(scope)});
  csv.fit("ratio", res.ratio_fit);
  csv.fit("mixed", res.mixed_fit);
  csv.fit("constant", res.constant_fit);
  csv.note("alpha=" + fmt17(res.alpha) + " beta=" + fmt17(res.beta));
  return csv;
}

inline CsvWriter csv_step(const StepResult& res, ScanScope scope) {
  CsvWriter csv;
  csv.header({"t", "ap", "ap_witness", "mixed", "mixed_witness", "fw_w", "fw_sigma", "lacey",
              "lacey_over_mixed", "fw_bound_ok", "fw_sigma_bound_ok", "scope"});
  for (const auto& row : res.rows)
    csv.row({fmt17(row.t), fmt17(row.ap), witness_field(row.ap_witness), fmt17(row.mixed),
             witness_field(row.mixed_witness), fmt17(row.fw_w), fmt17(row.fw_sigma),
             fmt17(row.lacey), fmt17(row.lacey_over_mixed), flag(row.fw_bound_ok),
             flag(row.fw_sigma_bound_ok), scope_name(scope)});
  csv.fit("ap", res.ap_fit);
  csv.fit("mixed", res.mixed_fit);
  csv.fit("lacey_over_mixed", res.ratio_fit);
  csv.note("decreasing=" + flag(res.decreasing) + " ok=" + flag(res.ok));
  return csv;
}

inline CsvWriter csv_bump(const BumpResult& res, ScanScope scope) {
  CsvWriter csv;
  csv.header({"delta", "ap", "ap_witness", "ap_witness_at_origin", "fw", "fw_witness",
              "fw_witness_at_bump", "mixed", "lacey", "mixed_over_lacey", "unreliable", "scope"});
  for (const auto& row : res.rows)
    csv.row({fmt17(row.delta), fmt17(row.ap), witness_field(row.ap_witness),
             flag(row.ap_witness_at_origin), fmt17(row.fw), witness_field(row.fw_witness),
             flag(row.fw_witness_at_bump), fmt17(row.mixed), fmt17(row.lacey),
             fmt17(row.mixed_over_lacey), flag(row.unreliable), scope_name(scope)});
  csv.fit("mixed", res.mixed_fit);
  csv.fit("lacey", res.lacey_fit);
  csv.fit("mixed_over_lacey", res.ratio_fit);
  csv.note("bump_center=" + fmt17(res.N) + " witnesses_ok=" + flag(res.witnesses_ok) +
           " decreasing=" + flag(res.decreasing) + " ok=" + flag(res.ok));
  return csv;
}

inline CsvWriter csv_bound(const BoundReport& rep, ScanScope scope) {
  CsvWriter csv;
  csv.header({"param", "tf_norm", "f_norm", "ratio", "mixed", "mixed_witness", "ap", "ap_witness",
              "lacey", "constant", "argmax", "skipped", "unreliable", "pass", "scope"});
  for (const auto& row : rep.rows)
    csv.row({fmt17(row.param), fmt17(row.tnorm), fmt17(row.fnorm), fmt17(row.ratio),
             fmt17(row.mixed), witness_field(row.mixed_witness), fmt17(row.ap),
             witness_field(row.ap_witness), fmt17(row.lacey), fmt17(row.constant), row.argmax,
             std::to_string(row.skipped), flag(row.unreliable), flag(row.pass),
             scope_name(scope)});
  csv.fit("constant", rep.trend);
  std::string setters;
  for (const auto& s : rep.max_setters) setters += (setters.empty() ? "" : " ") + s;
  csv.note("constant=" + fmt17(rep.constant) + " flat=" + flag(rep.flat) +
           " pass=" + flag(rep.pass) + " max_setters=" + setters);
  return csv;
}

inline CsvWriter csv_cond31(const Cond31Report& rep) {
  CsvWriter csv;
  csv.header({"sup", "argmax", "witness", "skipped", "sup_refined", "skipped_refined",
              "rel_change"});
  csv.row({fmt17(rep.sup), rep.argmax,
           std::to_string(rep.witness.depth) + "." + std::to_string(rep.witness.index),
           std::to_string(rep.skipped), fmt17(rep.sup_refined),
           std::to_string(rep.skipped_refined), fmt17(rep.rel_change)});
  return csv;
}

}  // namespace wlab
