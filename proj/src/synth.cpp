#include "cardlab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cardlab {

namespace {
constexpr double kTruncationQuantile = 0.999;

double genpareto_quantile(double shape, double u) { return (std::pow(1.0 - u, -shape) - 1.0) / shape; }
}  // namespace

void SynthConfig::validate() const {
  if (!(skew >= 0 && skew <= 2)) throw std::invalid_argument("synth: skew must be in [0,2]");
  if (!(correlation >= 0 && correlation <= 1)) throw std::invalid_argument("synth: correlation must be in [0,1]");
  if (domain_size < 2) throw std::invalid_argument("synth: domain_size must be >= 2");
  if (rows < 1) throw std::invalid_argument("synth: rows must be >= 1");
}

Support generator_support(double skew) {
  if (skew == 0) return {0.0, 1.0};
  return {0.0, genpareto_quantile(skew, kTruncationQuantile)};
}

double draw_generator_value(double skew, Rng& rng) {
  const double u = unit_uniform(rng);
  if (skew == 0) return u;
  // Inverse-CDF draw restricted to the lower 99.9% of the mass.
  return genpareto_quantile(skew, u * kTruncationQuantile);
}

std::vector<double> gen_first_column(const SynthConfig& cfg, Rng& rng) {
  std::vector<double> out(cfg.rows);
  for (auto& v : out) v = draw_generator_value(cfg.skew, rng);
  return out;
}

std::vector<double> derive_second_column(const std::vector<double>& col1, double skew, double c, Rng& rng) {
  if (col1.empty()) throw std::invalid_argument("derive_second_column: empty input");
  std::vector<double> out(col1.size());
  for (std::size_t i = 0; i < col1.size(); ++i) {
    // Always consume the coin so the stream layout does not depend on c.
    const bool copy = bernoulli(rng, c);
    const double fresh = draw_generator_value(skew, rng);
    out[i] = copy ? col1[i] : fresh;
  }
  return out;
}

std::vector<Value> bin_columns(const std::vector<double>& values, std::size_t d, Support support) {
  if (d < 2) throw std::invalid_argument("bin_columns: d must be >= 2");
  std::vector<Value> out(values.size(), 0.0);
  const double span = support.hi - support.lo;
  if (!(span > 0)) return out;
  const double top = static_cast<double>(d - 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double b = std::floor(static_cast<double>(d) * (values[i] - support.lo) / span);
    out[i] = std::clamp(b, 0.0, top);
  }
  return out;
}

Table gen_synth(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const auto col1 = gen_first_column(cfg, rng);
  const auto col2 = derive_second_column(col1, cfg.skew, cfg.correlation, rng);
  const auto support = generator_support(cfg.skew);
  return Table::numeric({"a1", "a2"}, {bin_columns(col1, cfg.domain_size, support), bin_columns(col2, cfg.domain_size, support)});
}

}  // namespace cardlab
