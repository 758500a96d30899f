#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pnp/errors.hpp"

namespace pnp {

/// Tridiagonal system with optional extra entries at (row 0, col 2) and
/// (row n-1, col n-3). The extras appear only for the standard boundary scheme,
/// whose boundary rows couple three unknowns. `rhs` may be left empty when the
/// object is used as a plain operator.
struct BandedSystem {
    std::vector<double> sub;    ///< sub[j] multiplies x_{j-1}; sub[0] unused
    std::vector<double> diag;   ///< diag[j] multiplies x_j
    std::vector<double> super;  ///< super[j] multiplies x_{j+1}; super[n-1] unused
    double corner_first = 0.0;  ///< row 0, column 2
    double corner_last = 0.0;   ///< row n-1, column n-3
    bool has_corners = false;
    std::vector<double> rhs;

    std::size_t size() const { return diag.size(); }

    static BandedSystem zeros(std::size_t n, bool corners) {
        BandedSystem s;
        s.sub.assign(n, 0.0);
        s.diag.assign(n, 0.0);
        s.super.assign(n, 0.0);
        s.rhs.assign(n, 0.0);
        s.has_corners = corners;
        return s;
    }
};

/// y = M x, including the corner entries.
inline std::vector<double> apply_banded(const BandedSystem& m, std::span<const double> x) {
    const std::size_t n = m.size();
    if (x.size() != n) throw ConfigError("apply_banded: vector length does not match system size");
    std::vector<double> y(n);
    y[0] = m.diag[0] * x[0] + m.super[0] * x[1];
    for (std::size_t j = 1; j + 1 < n; ++j)
        y[j] = m.sub[j] * x[j - 1] + m.diag[j] * x[j] + m.super[j] * x[j + 1];
    y[n - 1] = m.sub[n - 1] * x[n - 2] + m.diag[n - 1] * x[n - 1];
    if (m.has_corners) {
        y[0] += m.corner_first * x[2];
        y[n - 1] += m.corner_last * x[n - 3];
    }
    return y;
}

/// Thomas elimination in O(n). Corner entries are folded into the band first
/// with one row operation each, so the whole solve stays linear in n.
/// Throws NumericalError on a zero pivot, naming the row.
inline std::vector<double> solve_banded(const BandedSystem& sys) {
    const std::size_t n = sys.size();
    if (n < 3) throw ConfigError("solve_banded: system dimension must be at least 3");
    if (sys.rhs.size() != n) throw ConfigError("solve_banded: rhs length does not match system size");

    std::vector<double> a(sys.sub), b(sys.diag), c(sys.super), d(sys.rhs);

    if (sys.has_corners && sys.corner_first != 0.0) {
        if (c[1] == 0.0)
            throw NumericalError("solve_banded: zero pivot eliminating corner entry against row 1");
        const double f = sys.corner_first / c[1];
        b[0] -= f * a[1];
        c[0] -= f * b[1];
        d[0] -= f * d[1];
    }
    if (sys.has_corners && sys.corner_last != 0.0) {
        if (a[n - 2] == 0.0)
            throw NumericalError("solve_banded: zero pivot eliminating corner entry against row " +
                                 std::to_string(n - 2));
        const double f = sys.corner_last / a[n - 2];
        a[n - 1] -= f * b[n - 2];
        b[n - 1] -= f * c[n - 2];
        d[n - 1] -= f * d[n - 2];
    }

    std::vector<double> upper(n), rhs(n);
    if (b[0] == 0.0) throw NumericalError("solve_banded: singular system, zero pivot at row 0");
    upper[0] = c[0] / b[0];
    rhs[0] = d[0] / b[0];
    for (std::size_t j = 1; j < n; ++j) {
        const double denom = b[j] - a[j] * upper[j - 1];
        if (denom == 0.0 || !std::isfinite(denom))
            throw NumericalError("solve_banded: singular system, zero pivot at row " + std::to_string(j));
        upper[j] = c[j] / denom;
        rhs[j] = (d[j] - a[j] * rhs[j - 1]) / denom;
    }
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1];
    for (std::size_t j = n - 1; j-- > 0;) x[j] = rhs[j] - upper[j] * x[j + 1];
    return x;
}

}  // namespace pnp
