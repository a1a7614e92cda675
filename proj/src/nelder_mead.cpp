#include "rainfall/numerics/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rainfall/errors.hpp"

namespace rainfall::numerics {
namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

}  // namespace

NelderMeadResult nelder_mead(const Objective& objective, std::span<const double> init,
                             const NelderMeadOptions& options) {
  const std::size_t n = init.size();
  if (n == 0) throw DomainError("nelder_mead: empty starting point");
  if (options.initial_step.size() != 1 && options.initial_step.size() != n)
    throw DomainError("nelder_mead: initial_step must have 1 or n entries");

  NelderMeadResult result;
  auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    const double v = objective(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> vertex(n + 1, std::vector<double>(init.begin(), init.end()));
  for (std::size_t i = 0; i < n; ++i) {
    const double step = options.initial_step.size() == 1 ? options.initial_step[0] : options.initial_step[i];
    vertex[i + 1][i] += step;
  }
  std::vector<double> fval(n + 1);
  for (std::size_t j = 0; j <= n; ++j) fval[j] = eval(vertex[j]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), second(n);
  double previous_best = std::numeric_limits<double>::infinity();

  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fval[a] < fval[b]; });
    std::vector<std::vector<double>> v2(n + 1);
    std::vector<double> f2(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      v2[k] = std::move(vertex[order[k]]);
      f2[k] = fval[order[k]];
    }
    vertex.swap(v2);
    fval.swap(f2);
  };

  auto point = [&](double coef, const std::vector<double>& towards, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = centroid[i] + coef * (towards[i] - centroid[i]);
  };

  for (;;) {
    sort_simplex();
    if (fval[0] > previous_best) result.monotone = false;
    previous_best = fval[0];

    double diameter = 0.0;
    for (std::size_t j = 1; j <= n; ++j)
      for (std::size_t i = 0; i < n; ++i) diameter = std::max(diameter, std::fabs(vertex[j][i] - vertex[0][i]));
    const double spread = fval[n] - fval[0];
    if ((diameter <= options.x_tol && spread <= options.f_tol) || fval[n] == fval[0]) {
      result.converged = true;
      break;
    }
    if (result.iterations >= options.max_iterations) break;
    if (options.deadline && std::chrono::steady_clock::now() >= *options.deadline) {
      result.timed_out = true;
      break;
    }
    ++result.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += vertex[j][i];
    for (double& c : centroid) c /= static_cast<double>(n);

    point(-kReflect, vertex[n], trial);
    const double f_reflect = eval(trial);

    if (f_reflect < fval[0]) {
      point(-kReflect * kExpand, vertex[n], second);
      const double f_expand = eval(second);
      if (f_expand < f_reflect) {
        vertex[n] = second;
        fval[n] = f_expand;
      } else {
        vertex[n] = trial;
        fval[n] = f_reflect;
      }
      continue;
    }
    if (f_reflect < fval[n - 1]) {
      vertex[n] = trial;
      fval[n] = f_reflect;
      continue;
    }
    const bool outside = f_reflect < fval[n];
    if (outside) {
      point(kContract, trial, second);
    } else {
      point(kContract, vertex[n], second);
    }
    const double f_contract = eval(second);
    if (f_contract < (outside ? f_reflect : fval[n])) {
      vertex[n] = second;
      fval[n] = f_contract;
      continue;
    }
    for (std::size_t j = 1; j <= n; ++j) {
      for (std::size_t i = 0; i < n; ++i) vertex[j][i] = vertex[0][i] + kShrink * (vertex[j][i] - vertex[0][i]);
      fval[j] = eval(vertex[j]);
    }
  }

  result.argmin = vertex[0];
  result.value = fval[0];
  return result;
}

}  // namespace rainfall::numerics

namespace rainfall::numerics {

NelderMeadResult nelder_mead_polished(const Objective& objective, std::span<const double> init,
                                      NelderMeadOptions options, double polish_step) {
  NelderMeadResult first = nelder_mead(objective, init, options);
  if (first.timed_out || !std::isfinite(first.value)) return first;
  options.initial_step = {polish_step};
  NelderMeadResult second = nelder_mead(objective, first.argmin, options);
  second.iterations += first.iterations;
  second.evaluations += first.evaluations;
  if (second.value > first.value) {
    first.iterations = second.iterations;
    first.evaluations = second.evaluations;
    first.timed_out = second.timed_out;
    return first;
  }
  second.monotone = second.monotone && first.monotone;
  return second;
}

}  // namespace rainfall::numerics
