#pragma once

// Independent reference computations for the tests. Nothing here calls the
// solver code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "spl/grids.hpp"
#include "spl/rng.hpp"

namespace oracle {

// J_nu(x) for integer nu >= 0 by its power series; fine for x up to ~20.
inline double bessel_j(int nu, double x) {
    const double half = 0.5 * x;
    double term = 1.0;
    for (int k = 1; k <= nu; ++k) term *= half / k;
    double sum = term;
    for (int m = 1; m < 200; ++m) {
        term *= -half * half / (static_cast<double>(m) * (m + nu));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum) && m > 5) break;
    }
    return sum;
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// m-th positive zero of J_nu, by scanning for sign changes then bisecting.
inline double bessel_zero(int nu, int m) {
    int found = 0;
    const double step = 0.05;
    for (double x = step; x < 60.0; x += step) {
        if ((bessel_j(nu, x) < 0) != (bessel_j(nu, x + step) < 0) && ++found == m)
            return bisect([nu](double y) { return bessel_j(nu, y); }, x, x + step);
    }
    throw std::runtime_error("bessel_zero: not found");
}

// Principal eigenvalue of -u'' - chi_{|x|<r} u on (-L, L) with lambda > 0:
// cos(k x) inside with k^2 = lambda + 1, sin(m (L - |x|)) outside with
// m^2 = lambda; matching u'/u at |x| = r.
inline double interval_ball_eigenvalue(double L, double r) {
    auto mismatch = [&](double lam) {
        const double k = std::sqrt(lam + 1.0), m = std::sqrt(lam);
        return k * std::sin(k * r) * std::sin(m * (L - r)) - m * std::cos(k * r) * std::cos(m * (L - r));
    };
    const double lo = 1e-9;
    const double hi = std::pow(3.14159265358979 / (2.0 * L), 2);  // lambda(0) is an upper bound
    return bisect(mismatch, lo, hi);
}

// Eigenvalues (ascending) of a dense symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

// Best sum of u_i^2 over all k-subsets of `candidates` (equal weights).
inline double best_subset_energy(const std::vector<double>& u, const std::vector<std::size_t>& candidates, std::size_t k) {
    double best = -1.0;
    const std::size_t m = candidates.size();
    for (unsigned long mask = 0; mask < (1UL << m); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcountl(mask)) != k) continue;
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            if (mask & (1UL << j)) s += u[candidates[j]] * u[candidates[j]];
        best = std::max(best, s);
    }
    return best;
}

// Fraction of [lo, hi] covered by [a, b].
inline double overlap_fraction(double lo, double hi, double a, double b) {
    return std::max(0.0, std::min(hi, b) - std::max(lo, a)) / (hi - lo);
}

} // namespace oracle

namespace testutil {

// Random admissible potential: clamp(x_i + c, 0, 1) with x_i uniform and c
// chosen by bisection so the mass is v0 * |domain|.
inline std::vector<double> random_admissible(const spl::Grid& grid, double v0, spl::CounterRng& rng, double spread = 1.0) {
    const auto w = spl::cell_weights(grid);
    std::vector<double> x(w.size());
    for (double& xi : x) xi = spread * (rng.uniform() - 0.5);
    const double target = v0 * spl::domain_measure(grid);
    auto mass = [&](double c) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::clamp(x[i] + c, 0.0, 1.0);
        return s - target;
    };
    const double c = oracle::bisect(mass, -2.0, 2.0);
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = std::clamp(x[i] + c, 0.0, 1.0);
    return v;
}

} // namespace testutil
