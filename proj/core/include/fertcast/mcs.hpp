#pragma once

// Model confidence set: sequential equal-predictive-ability tests with
// moving-block bootstrap variance estimates.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace fertcast {

enum class McsStatistic {
  Range,  // T_R = max |t_{l,tau}|, eliminate argmax_l sup_tau t_{l,tau}
  Max,    // T_max = max t_{l.}, eliminate argmax_l t_{l.}
};

struct McsOptions {
  double alpha = 0.15;
  McsStatistic statistic = McsStatistic::Max;
  int bootstrap = 5000;
  int block_length = 0;  // 0 = automatic
  std::uint64_t seed = 20190501;
  int threads = 1;
};

struct McsElimination {
  int model = 0;
  double p_value = 0.0;
};

struct McsResult {
  std::vector<int> survivors;  // ascending model indices
  std::vector<McsElimination> eliminated;  // in elimination order
  McsStatistic statistic = McsStatistic::Max;
  double alpha = 0.0;
  int bootstrap = 0;
  int block_length = 1;
  std::uint64_t seed = 0;
  double final_p_value = 1.0;  // p-value of the accepted test (1 if degenerate)
};

/// `losses` is model x time. Bootstrap replicate b draws from its own
/// generator seeded by (seed, b), so results do not depend on `threads`.
McsResult mcs_select(const Eigen::MatrixXd& losses, const McsOptions& options = {});

/// Largest number of significant (|t| > 2) coefficients in AICc-selected
/// AR(p <= 10) fits to the pairwise loss differentials; at least 1.
int auto_block_length(const Eigen::MatrixXd& losses);

/// Moving-block bootstrap resample of 0..n-1 for replicate `replicate`.
std::vector<int> block_bootstrap_indices(int n, int block_length, std::uint64_t seed,
                                         std::uint64_t replicate);

}  // namespace fertcast
