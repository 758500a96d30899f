#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "pnp/banded.hpp"
#include "pnp/params.hpp"

namespace pnp::testing {

/// Dense Gaussian elimination with partial pivoting. Deliberately independent
/// of the banded solver it checks.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return x;
}

inline std::vector<std::vector<double>> to_dense(const BandedSystem& sys) {
    const std::size_t n = sys.size();
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        a[j][j] = sys.diag[j];
        if (j > 0) a[j][j - 1] = sys.sub[j];
        if (j + 1 < n) a[j][j + 1] = sys.super[j];
    }
    if (sys.has_corners) {
        a[0][2] += sys.corner_first;
        a[n - 1][n - 3] += sys.corner_last;
    }
    return a;
}

inline std::vector<double> random_vector(std::mt19937& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

/// Symmetric two-species electrolyte used by most of the studies.
inline DimensionlessParameters channel_baseline() {
    return DimensionlessParameters::binary_symmetric(3.1, 125.4, 4.63e-5, 1.0, -1.0);
}

/// Smooth validation configuration: fat boundary layers, gentle fields.
inline DimensionlessParameters smooth_baseline(double eps = 0.25) {
    DimensionlessParameters p =
        DimensionlessParameters::binary_symmetric(1.0, 1.0 / (2.0 * eps), eps, -1.0, 1.0);
    p.eps_prime = [eps](double) { return eps; };
    return p;
}

}  // namespace pnp::testing
