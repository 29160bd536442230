// Prints the full characteristic table for each built-in weight shape: the
// A_p constant, the exponential A_infty proxy, the maximal-average constant,
// and a mixed product, each with its witness interval.

#include <cstdio>

#include "wlab/characteristics.hpp"
#include "wlab/io.hpp"
#include "wlab/weight.hpp"

using namespace wlab;

namespace {

void row(const char* label, const Weight& w, double p) {
  MixedExponents e;
  e.p = p;
  e.r = 2.0 * p;
  e.alpha = 0.5;
  e.beta = 0.5;
  ScanResult ap = ap_norm(w, p, ScanScope::dyadic);
  ScanResult fw = fw_norm(w, ScanScope::dyadic);
  ScanResult ax = ainf_exp_norm(w, ScanScope::dyadic);
  ScanResult mx = mixed_norm(w, e, ScanScope::dyadic);
  std::printf("%-12s A_%g %10.5g on [%g, %g)   exp-A_inf %9.5g   max-avg %9.5g   mixed %10.5g\n",
              label, p, ap.value, ap.witness.left, ap.witness.right, ax.value, fw.value,
              mx.value);
}

}  // namespace

int main() {
  GridSpec g = build_grid(-8.0, 4, 10);

  std::printf("grid [%g, %g), %lld cells\n\n", g.interval_of(g.root()).left,
              g.interval_of(g.root()).right, (long long)g.cells());

  row("const:2.5", make_weight(parse_recipe("const:2.5"), g), 2.0);
  row("step:9", make_weight(parse_recipe("step:9"), g), 2.0);
  row("power:1.5", make_weight(parse_recipe("power:1.5"), g), 3.0);
  row("bump:0.2,4,3", make_weight(parse_recipe("bump:0.2,4,3"), g), 3.0);

  // scope comparison: the windowed and unrestricted scans can only grow
  Weight w = make_weight(parse_recipe("power:1.5"), g);
  std::printf("\npower:1.5 A_3 by scope:");
  for (ScanScope s : {ScanScope::dyadic, ScanScope::windowed, ScanScope::all})
    std::printf("  %s %.6g", scope_name(s).c_str(), ap_norm(w, 3.0, s).value);
  std::printf("\n");
  return 0;
}
