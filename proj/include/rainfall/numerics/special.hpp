#pragma once

namespace rainfall::numerics {

/// ln Γ(x) for x > 0 (Lanczos approximation, g = 671/128, 14 terms).
/// Throws DomainError for x <= 0 or non-finite x.
double log_gamma(double x);

/// ψ(x) = d/dx ln Γ(x) for x > 0.
double digamma(double x);

/// ln B(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a + b).
double log_beta(double a, double b);

/// Regularized lower incomplete gamma P(a, x) = γ(a, x) / Γ(a).
///
/// Series expansion for x < a + 1, Lentz continued fraction for the upper
/// function otherwise. The result is clamped to [0, 1].
double reg_lower_incomplete_gamma(double a, double x);

/// Q(a, x) = 1 − P(a, x), evaluated without cancellation in the upper tail.
double reg_upper_incomplete_gamma(double a, double x);

/// Inverse of P(shape, ·) for the unit-scale gamma distribution.
double gamma_quantile(double p, double shape);

}  // namespace rainfall::numerics
