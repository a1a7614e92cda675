#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace rainfall::numerics {

struct NelderMeadOptions {
  /// Initial simplex: init + step·e_i for each coordinate i. Either one
  /// value for all coordinates or one per coordinate.
  std::vector<double> initial_step{0.1};
  double x_tol = 1e-9;      // simplex diameter (max-norm from best vertex)
  double f_tol = 1e-10;     // spread between best and worst vertex values
  int max_iterations = 5000;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct NelderMeadResult {
  std::vector<double> argmin;
  double value = 0.0;
  bool converged = false;
  bool timed_out = false;
  int iterations = 0;
  int evaluations = 0;
  /// Best vertex value never increased between iterations.
  bool monotone = true;
};

using Objective = std::function<double(std::span<const double>)>;

/// Minimizes `objective` starting from `init`. Non-finite objective values
/// are treated as +inf, so infeasible points are simply rejected. The
/// result is a deterministic function of (objective, init, options) unless
/// a deadline fires. Non-convergence is reported, never thrown.
NelderMeadResult nelder_mead(const Objective& objective, std::span<const double> init,
                             const NelderMeadOptions& options = {});

}  // namespace rainfall::numerics

namespace rainfall::numerics {

/// Nelder-Mead followed by one restart from the optimum with a fresh
/// simplex of size `polish_step`, which recovers from premature simplex
/// collapse. Iteration and evaluation counts are summed over both runs.
NelderMeadResult nelder_mead_polished(const Objective& objective, std::span<const double> init,
                                      NelderMeadOptions options, double polish_step);

}  // namespace rainfall::numerics
