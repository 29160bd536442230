// Lower-bounds the weighted operator norm of every built-in operator on one
// weight by scanning a test-function corpus, then compares each bound with
// the mixed characteristic the operator is expected to obey.

#include <cstdio>
#include <string>
#include <vector>

#include "wlab/characteristics.hpp"
#include "wlab/io.hpp"
#include "wlab/lab.hpp"

using namespace wlab;

int main(int argc, char** argv) {
  double p = argc > 1 ? std::stod(argv[1]) : 3.0;
  GridSpec g = build_grid(-16.0, 5, 12);
  Weight w = make_weight(parse_recipe("power:1.2"), g);

  FamilySpec fs = parse_family("random:21");
  fs.count = 24;
  Corpus corpus = make_corpus(fs, g);

  // smoothing degree nu fixes the second exponent of the mixed product
  struct Entry {
    const char* name;
    double nu;
  };
  std::vector<Entry> ops = {
      {"hilbert", 1.0}, {"petermichl", 1.0}, {"sd", 2.0}, {"mq:3", 3.0}, {"max", 0.0}};

  std::printf("weight power:1.2, p = %g, corpus %d members\n\n", p, fs.count);
  for (const Entry& entry : ops) {
    OperatorSpec op = parse_operator(entry.name);
    NormLowerResult res = operator_norm_lower(op, w, p, corpus);

    MixedExponents e;
    e.p = p;
    e.r = 2.0 * p;
    e.alpha = 1.0 / (p - 1.0);
    e.beta = entry.nu > 0.0 ? std::max(0.0, 1.0 / entry.nu - e.alpha) : 0.0;
    double mixed = mixed_norm(w, e, ScanScope::dyadic).value;
    std::printf("%-11s lower %10.6g at %-14s mixed constant %10.6g   ratio %6.3f\n",
                entry.name, res.value, res.argmax.c_str(), mixed, res.value / mixed);
  }
  return 0;
}
