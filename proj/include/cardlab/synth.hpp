#pragma once

#include <cstdint>
#include <vector>

#include "cardlab/random.hpp"
#include "cardlab/table.hpp"

namespace cardlab {

/// Two-column synthetic dataset with controlled skew, correlation and domain size.
struct SynthConfig {
  double skew = 1.0;         // 0 = uniform, larger = more skewed, in [0, 2]
  double correlation = 0.5;  // probability that column 2 copies column 1
  std::size_t domain_size = 1000;
  std::size_t rows = 100000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Support [lo, hi] of the (truncated) generating distribution.
struct Support {
  double lo = 0;
  double hi = 1;
};

/// Generalized Pareto (shape = skew, scale 1) truncated at its 99.9th
/// percentile; skew == 0 is the uniform special case on [0, 1).
Support generator_support(double skew);
double draw_generator_value(double skew, Rng& rng);

std::vector<double> gen_first_column(const SynthConfig& cfg, Rng& rng);
/// Per row: copy with probability c, else an independent draw from the
/// column-1 generator.
std::vector<double> derive_second_column(const std::vector<double>& col1, double skew, double c, Rng& rng);
/// Equi-width binning of `values` over `support` into [0, d).
std::vector<Value> bin_columns(const std::vector<double>& values, std::size_t d, Support support);

Table gen_synth(const SynthConfig& cfg);

}  // namespace cardlab
