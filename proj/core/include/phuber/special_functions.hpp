#pragma once

namespace phuber {

/// Settings for the fixed-order Gauss-Legendre evaluation of the depth
/// normalizer integral and its adaptive-Simpson cross-check oracle.
struct QuadratureConfig {
    int node_count = 64;    // Gauss-Legendre order per panel, >= 2
    double abs_tol = 1e-12; // absolute tolerance of the adaptive cross-check
};

struct ValueAndDerivative {
    double value = 0.0;
    double derivative = 0.0;
};

/// Huber penalty h(r) = r^2/2 for r <= 1, r - 1/2 for r > 1, with its
/// one-sided derivative. The function is C^1 at r = 1. Throws
/// std::domain_error for r < 0.
ValueAndDerivative huber(double r);

/// Upper incomplete gamma Gamma(k, a) = int_a^inf t^{k-1} e^{-t} dt for
/// k in {-3,-2,-1,1,2,3} and a > 0. Positive orders use closed forms,
/// negative orders come from the g1 quadrature plus the downward recurrence
/// Gamma(s, x) = (Gamma(s+1, x) - x^s e^{-x}) / s, switching to the
/// asymptotic expansion for large a where the recurrence cancels.
double upper_gamma(int k, double a);

/// Scaled form Gamma(k, a) * a^{1-k} * e^a, which tends to 1 as a -> inf
/// for every order. Safe from under/overflow for all a > 0 and the form
/// the distribution moments are assembled from.
double upper_gamma_scaled(int k, double a);

/// g1(a) = a^2 * Gamma(-1, a) * e^a = int_0^1 (1 + log(1/y)/a)^{-2} dy,
/// strictly inside (0, 1), increasing toward 1. Composite Gauss-Legendre
/// with cfg.node_count nodes per panel.
double g1(double a, const QuadratureConfig& cfg = {});

/// Same integral evaluated by adaptive Simpson at the given absolute
/// tolerance; the independent cross-check for g1.
double g1_adaptive(double a, double abs_tol = 1e-12);

/// log(e^{-a}/a + Gamma(-1,a)*a), the depth normalizer without its mu_z
/// factor, computed in the cancellation-free form
/// -log(a) - a + log1p(g1(a)), together with its derivative
/// 1/a - 2(1 + 1/a) / (1 + g1(a)).
ValueAndDerivative log_norm_depth(double a);

namespace detail {

/// Fast route for g1 (series for x < 1, continued fraction otherwise).
/// Used inside the sampler's inverse-CDF Newton iterations; tests pin it
/// against the quadrature g1.
double g1_fast(double x);

}  // namespace detail

}  // namespace phuber
