#include "phuber/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "phuber/quadrature.hpp"

namespace phuber {

ValueAndDerivative huber(double r) {
    if (!(r >= 0.0)) {
        throw std::domain_error("huber: r must be >= 0");
    }
    if (r <= 1.0) {
        return {0.5 * r * r, r};
    }
    return {r - 0.5, 1.0};
}

namespace {

constexpr double kAsymptoticSwitch = 30.0;

// The normalizer integral int_0^1 (1 + log(1/y)/a)^{-2} dy is evaluated in
// t = log(1/y), where it reads int_0^inf e^{-t} (a/(a+t))^2 dt. Geometric
// panel edges resolve the width-~min(a,1) feature at t = 0 and the
// exponential tail; beyond t = 45 the remaining mass is below 3e-20.
std::vector<double> g1_panel_edges(double a) {
    const double t_cap = 45.0;
    std::vector<double> edges;
    edges.push_back(0.0);
    double t = std::min(a, 1.0) / 8.0;
    while (t < t_cap) {
        edges.push_back(t);
        t *= 2.0;
    }
    edges.push_back(t_cap);
    return edges;
}

double g1_integrand(double a, double y) {
    if (y <= 0.0) return 0.0;
    const double q = a / (a - std::log(y));
    return q * q;
}

double g1_integrand_t(double a, double t) {
    const double q = a / (a + t);
    return std::exp(-t) * q * q;
}

// G_s(a) = Gamma(s, a) a^{1-s} e^a ~ sum_j (s-1)(s-2)...(s-j) / a^j,
// truncated at the smallest term. Accurate to ~e^{-a} relative error,
// which beats the recurrence above the switch point.
double scaled_gamma_asymptotic(int s, double a) {
    double term = 1.0;
    double sum = 1.0;
    double prev = std::abs(term);
    for (int j = 1; j < 80; ++j) {
        term *= (s - j) / a;
        if (std::abs(term) >= prev) break;
        sum += term;
        prev = std::abs(term);
    }
    return sum;
}

}  // namespace

double g1(double a, const QuadratureConfig& cfg) {
    if (!(a > 0.0)) {
        throw std::domain_error("g1: a must be > 0");
    }
    if (cfg.node_count < 2) {
        throw std::invalid_argument("g1: node_count must be >= 2");
    }
    const auto f = [a](double t) { return g1_integrand_t(a, t); };
    if (cfg.node_count == 64) {
        // Repeated evaluations at one a dominate the loss and moment paths.
        thread_local double cached_a = -1.0;
        thread_local double cached_value = 0.0;
        if (a == cached_a) return cached_value;
        static const GaussLegendre rule64(64);
        const double value = rule64.integrate_panels(f, g1_panel_edges(a));
        cached_a = a;
        cached_value = value;
        return value;
    }
    const GaussLegendre rule(cfg.node_count);
    return rule.integrate_panels(f, g1_panel_edges(a));
}

double g1_adaptive(double a, double abs_tol) {
    if (!(a > 0.0)) {
        throw std::domain_error("g1_adaptive: a must be > 0");
    }
    return adaptive_simpson([a](double y) { return g1_integrand(a, y); }, 0.0, 1.0, abs_tol);
}

double upper_gamma_scaled(int k, double a) {
    if (!(a > 0.0)) {
        throw std::domain_error("upper_gamma: a must be > 0");
    }
    switch (k) {
        case 1:
            return 1.0;
        case 2:
            return 1.0 + 1.0 / a;
        case 3:
            return 1.0 + 2.0 / a + 2.0 / (a * a);
        case -1:
            if (a > kAsymptoticSwitch) return scaled_gamma_asymptotic(-1, a);
            return g1(a);
        case -2:
            if (a > kAsymptoticSwitch) return scaled_gamma_asymptotic(-2, a);
            return 0.5 * a * (1.0 - upper_gamma_scaled(-1, a));
        case -3:
            if (a > kAsymptoticSwitch) return scaled_gamma_asymptotic(-3, a);
            return a * (1.0 - upper_gamma_scaled(-2, a)) / 3.0;
        default:
            throw std::domain_error("upper_gamma: order must be in {-3,-2,-1,1,2,3}");
    }
}

double upper_gamma(int k, double a) {
    return upper_gamma_scaled(k, a) * std::pow(a, k - 1) * std::exp(-a);
}

ValueAndDerivative log_norm_depth(double a) {
    if (!(a > 0.0)) {
        throw std::domain_error("log_norm_depth: a must be > 0");
    }
    const double g = upper_gamma_scaled(-1, a);
    ValueAndDerivative out;
    out.value = -std::log(a) - a + std::log1p(g);
    out.derivative = 1.0 / a - 2.0 * (1.0 + 1.0 / a) / (1.0 + g);
    return out;
}

namespace detail {

namespace {

// E_1(x) by its power series, good for x < 1.
double exp_int_e1_series(double x) {
    constexpr double kEulerGamma = 0.57721566490153286061;
    double sum = -kEulerGamma - std::log(x);
    double term = 1.0;
    for (int k = 1; k < 60; ++k) {
        term *= -x / k;
        const double add = -term / k;
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

// Modified Lentz continued fraction for Gamma(s, x) e^x x^{-s}, s = -1.
double gamma_cf(double s, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 300; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h;
}

}  // namespace

double g1_fast(double x) {
    if (!(x > 0.0)) {
        throw std::domain_error("g1_fast: x must be > 0");
    }
    if (x < 1.0) {
        // x^2 e^x Gamma(-1,x) with Gamma(-1,x) = (e^{-x} - x E_1(x)) / x
        return x * (1.0 - x * std::exp(x) * exp_int_e1_series(x));
    }
    // Gamma(-1,x) = e^{-x} x^{-1} * CF  =>  x^2 e^x Gamma(-1,x) = x * CF
    return x * gamma_cf(-1.0, x);
}

}  // namespace detail

}  // namespace phuber
