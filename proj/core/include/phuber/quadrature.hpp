#pragma once

#include <functional>
#include <span>
#include <vector>

namespace phuber {

/// Gauss-Legendre rule of a fixed order. Nodes/weights are computed once at
/// construction (Newton iteration on the Legendre polynomial) and reused.
class GaussLegendre {
public:
    explicit GaussLegendre(int order);

    int order() const { return static_cast<int>(nodes_.size()); }

    /// Nodes and weights on the reference interval [-1, 1].
    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> weights() const { return weights_; }

    /// Integrate f over [lo, hi] with a single panel.
    template <class F>
    double integrate(F&& f, double lo, double hi) const {
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            sum += weights_[i] * f(mid + half * nodes_[i]);
        }
        return half * sum;
    }

    /// Integrate f over consecutive panels given by edges[0..n].
    template <class F>
    double integrate_panels(F&& f, std::span<const double> edges) const {
        double sum = 0.0;
        for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
            sum += integrate(f, edges[k], edges[k + 1]);
        }
        return sum;
    }

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

/// Recursive adaptive Simpson quadrature with an absolute error target.
/// Used as the cross-check oracle for the fixed-order rules.
double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        double abs_tol, int max_depth = 60);

}  // namespace phuber
