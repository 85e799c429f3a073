// Centered finite differences for curvature densities of metric weights.
// Kahler forms follow the library convention omega = (1/2) i ddbar(phi), so a
// form's density with respect to prod(dx_a dy_a) is the complex Hessian
// H_ab = d^2 phi / dzeta_a dzeta_b-bar (determinant of it for top powers).

#ifndef BALMET_FD_HPP
#define BALMET_FD_HPP

#include <functional>

#include "balmet/herm.hpp"

namespace balmet {

using ScalarField1 = std::function<double(Complex)>;
using ScalarFieldN = std::function<double(const Vector&)>;

namespace fd_detail {

inline double second_diff(const std::function<double(double)>& f, double h) {
    return (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
}

inline double mixed_diff(const std::function<double(double, double)>& f, double hu, double hv) {
    return (f(hu, hv) - f(hu, -hv) - f(-hu, hv) + f(-hu, -hv)) / (4.0 * hu * hv);
}

/// One Richardson step for an O(h^2) stencil: (4 I(h) - I(2h)) / 3.
inline double richardson(const std::function<double(double)>& stencil, double h) {
    return (4.0 * stencil(h) - stencil(2.0 * h)) / 3.0;
}

}  // namespace fd_detail

/// Density of (1/2) i ddbar(phi) with respect to dx dy at z, for a potential
/// phi of one complex variable: (1/4) Laplacian(phi). Richardson-extrapolated
/// once from centered second differences.
inline double curvature_density(const ScalarField1& phi, Complex z, double h = 1e-4) {
    auto lap = [&](double step) {
        auto fx = [&](double t) { return phi(z + Complex(t, 0.0)); };
        auto fy = [&](double t) { return phi(z + Complex(0.0, t)); };
        return fd_detail::second_diff(fx, step) + fd_detail::second_diff(fy, step);
    };
    return 0.25 * fd_detail::richardson(lap, h);
}

/// Full complex Hessian H_ab = d^2 phi / dzeta_a dzeta_b-bar of a potential
/// of n complex variables, by centered differences with one Richardson step.
inline Matrix complex_hessian(const ScalarFieldN& phi, const Vector& at, double h = 1e-4) {
    const int n = static_cast<int>(at.size());
    Matrix H(n, n);

    auto shifted = [&](int a, double dx, double dy, int b, double dx2, double dy2) {
        Vector p = at;
        p(a) += Complex(dx, dy);
        p(b) += Complex(dx2, dy2);
        return phi(p);
    };

    for (int a = 0; a < n; ++a) {
        auto diag = [&](double step) {
            auto fx = [&](double t) { return shifted(a, t, 0.0, a, 0.0, 0.0); };
            auto fy = [&](double t) { return shifted(a, 0.0, t, a, 0.0, 0.0); };
            return fd_detail::second_diff(fx, step) + fd_detail::second_diff(fy, step);
        };
        H(a, a) = 0.25 * fd_detail::richardson(diag, h);
    }
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            auto part = [&](auto pick_u, auto pick_v) {
                return [&, pick_u, pick_v](double step) {
                    auto f = [&](double u, double v) {
                        auto [ux, uy] = pick_u(u);
                        auto [vx, vy] = pick_v(v);
                        return shifted(a, ux, uy, b, vx, vy);
                    };
                    return fd_detail::mixed_diff(f, step, step);
                };
            };
            auto X = [](double t) { return std::pair<double, double>{t, 0.0}; };
            auto Y = [](double t) { return std::pair<double, double>{0.0, t}; };
            const double xx = fd_detail::richardson(part(X, X), h);
            const double yy = fd_detail::richardson(part(Y, Y), h);
            const double xy = fd_detail::richardson(part(X, Y), h);
            const double yx = fd_detail::richardson(part(Y, X), h);
            H(a, b) = 0.25 * Complex(xx + yy, xy - yx);
            H(b, a) = std::conj(H(a, b));
        }
    }
    return H;
}

}  // namespace balmet

#endif  // BALMET_FD_HPP
