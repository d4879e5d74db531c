#pragma once

// Synthetic fertility panels built from Hadwiger curves whose level and mode
// drift over time, with multiplicative noise.

#include "fertcast/data.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fertcast {

/// (a b / c) (c / x)^(3/2) exp(-b^2 (c / x + x / c - 2)).
double hadwiger(double age, double a, double b, double c);

struct SyntheticOptions {
  int first_year = 1950;
  int last_year = 2011;
  AgeGrid ages;
  double tfr_start = 2.6;
  double tfr_end = 1.7;
  double mode_start = 25.0;  // c at the first year
  double mode_end = 29.5;
  double shape = 3.6;        // b
  double level_noise = 0.03;   // sd of the TFR random-walk increments (relative)
  double mode_noise = 0.08;    // sd of the mode random-walk increments (years)
  double cell_noise = 0.03;    // sd of the multiplicative log-normal cell noise
  std::uint64_t seed = 1;
};

RatePanel synthetic_panel(const std::string& country, const SyntheticOptions& options);

/// `count` countries named SYN1..SYNn; country i uses seed + i and slightly
/// shifted level and mode paths.
std::vector<RatePanel> synthetic_corpus(int count, const SyntheticOptions& options);

}  // namespace fertcast
