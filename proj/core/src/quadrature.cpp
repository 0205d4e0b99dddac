#include "phuber/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace phuber {

GaussLegendre::GaussLegendre(int order) {
    if (order < 2) {
        throw std::invalid_argument("GaussLegendre: order must be >= 2");
    }
    const int n = order;
    nodes_.resize(n);
    weights_.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-based initial guess for the i-th root of P_n.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes_[i] = -x;
        nodes_[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights_[i] = w;
        weights_[n - 1 - i] = w;
    }
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double lo, double hi, double flo,
                   double fmid, double fhi, double whole, double abs_tol, int depth) {
    const double mid = 0.5 * (lo + hi);
    const double lmid = 0.5 * (lo + mid);
    const double rmid = 0.5 * (mid + hi);
    const double flm = f(lmid);
    const double frm = f(rmid);
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * abs_tol) {
        return left + right + delta / 15.0;
    }
    return simpson_rec(f, lo, mid, flo, flm, fmid, left, 0.5 * abs_tol, depth - 1) +
           simpson_rec(f, mid, hi, fmid, frm, fhi, right, 0.5 * abs_tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        double abs_tol, int max_depth) {
    if (!(abs_tol > 0.0)) {
        throw std::invalid_argument("adaptive_simpson: abs_tol must be > 0");
    }
    if (lo == hi) return 0.0;
    const double mid = 0.5 * (lo + hi);
    const double flo = f(lo);
    const double fmid = f(mid);
    const double fhi = f(hi);
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    return simpson_rec(f, lo, hi, flo, fmid, fhi, whole, abs_tol, max_depth);
}

}  // namespace phuber
