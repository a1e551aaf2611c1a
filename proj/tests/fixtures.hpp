#pragma once

// Shared synthetic datasets for the test suites.

#include <cmath>
#include <vector>

#include "liqlab/pipeline.hpp"
#include "liqlab/synth.hpp"

namespace fixtures {

using namespace liqlab;

/// Feature table of a generated tape.
inline std::vector<FeatureRow> synth_feature_rows(const SynthConfig& cfg, unsigned jobs = 1) {
  RunConfig rc;
  rc.timezone = cfg.timezone;
  rc.jobs = jobs;
  return build_features(generate(cfg, jobs), rc).rows;
}

inline SynthConfig planted_config(int days, double strength, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.days = days;
  cfg.signal_strength = strength;
  return cfg;
}

/// n rows of 2 features, label Up iff x0 + 0.5 x1 > 0.2, with a gap of
/// `margin` around the boundary.
inline Samples separable(std::size_t n, std::uint64_t seed, double margin = 0.05) {
  Rng rng(seed);
  Samples s;
  while (s.size() < n) {
    const double a = rng.normal(), b = rng.normal();
    const double z = a + 0.5 * b - 0.2;
    if (std::abs(z) < margin) continue;
    s.push(std::vector<double>{a, b}, z > 0 ? Direction::Up : Direction::Down);
  }
  return s;
}

/// Gaussian features with labels independent of them.
inline Samples noise(std::size_t n, std::size_t d, double p_up, std::uint64_t seed) {
  Rng rng(seed);
  Samples s;
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : row) v = rng.normal();
    s.push(row, rng.bernoulli(p_up) ? Direction::Up : Direction::Down);
  }
  return s;
}

}  // namespace fixtures
