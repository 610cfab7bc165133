#ifndef MPOC_PENALTY_PATH_HPP
#define MPOC_PENALTY_PATH_HPP

#include "mpoc/optimizer.hpp"
#include "mpoc/penalty.hpp"

namespace mpoc {

struct PenaltyPathOptions {
  std::vector<double> eps{1.0, 1e-2, 1e-4};
  int max_iter = 200;
  double tol = 1e-12;  // relative decrease below which the inner loop stops
};

struct PenaltyPathEntry {
  double eps = 0.0;
  double dist_u = 0.0, dist_w = 0.0, dist_g1 = 0.0, dist_g2 = 0.0;
  double distance() const { return dist_u + dist_w + dist_g1 + dist_g2; }
  double J_eps = 0.0;     // J_eps at the minimizer
  double J = 0.0;         // J at the minimizer
  double J_anchor = 0.0;  // J at the anchor
  double defect = 0.0;    // combined constraint defect at the minimizer
  int iterations = 0;
  bool stagnated = false;
  bool sandwich = false;  // J <= J_eps <= J_anchor
  PenaltyPoint minimizer;
};

struct PenaltyPathReport {
  std::vector<PenaltyPathEntry> entries;
  bool distances_monotone = false;  // nonincreasing within 10% slack
  bool sandwich = false;
};

// Minimizes J_eps for each eps over (divergence-free u with u.n = 0 on Γ2, w, g1, g2 in the
// control set), starting from the anchor, by damped Gauss-Newton with Armijo backtracking.
PenaltyPathReport penalty_path_experiment(const Problem& pb, const Targets& targets, const PenaltyPoint& anchor,
                                          const ControlPair& bounds, const PenaltyPathOptions& opts = {});

PenaltyPoint anchor_from(const OptimizationResult& r);

}  // namespace mpoc

#endif
