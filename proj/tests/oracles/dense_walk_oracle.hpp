// dense_walk_oracle.hpp
// Test-only reference for the cycle walk: the one-step operator written out
// entry by entry from its definition, raised to a power by repeated squaring,
// applied to a basis vector. Shares no code with the library.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace oracle {

using cd = std::complex<double>;
using Dense = std::vector<std::vector<cd>>;

inline Dense multiply(const Dense& a, const Dense& b) {
    const std::size_t n = a.size();
    Dense out(n, std::vector<cd>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j) out[i][j] += a[i][k] * b[k][j];
    return out;
}

/// <x', c'| U |x, c> with U = shift * (I (x) H); index 2x + c.
/// H|0> = (|0> + |1>)/sqrt2, H|1> = (|0> - |1>)/sqrt2; coin 0 steps +1, coin 1 steps -1.
inline Dense hadamard_walk_operator(std::size_t m) {
    const std::size_t n = 2 * m;
    Dense u(n, std::vector<cd>(n));
    const double h = 1.0 / std::sqrt(2.0);
    for (std::size_t x = 0; x < m; ++x)
        for (std::size_t c = 0; c < 2; ++c) {
            const double to_up = h;
            const double to_down = c == 0 ? h : -h;
            u[2 * ((x + 1) % m) + 0][2 * x + c] += to_up;
            u[2 * ((x + m - 1) % m) + 1][2 * x + c] += to_down;
        }
    return u;
}

inline Dense power(Dense base, std::size_t t) {
    const std::size_t n = base.size();
    Dense result(n, std::vector<cd>(n));
    for (std::size_t i = 0; i < n; ++i) result[i][i] = 1.0;
    while (t > 0) {
        if (t & 1U) result = multiply(result, base);
        base = multiply(base, base);
        t >>= 1U;
    }
    return result;
}

/// Position marginal of U^t |x0, c0>.
inline std::vector<double> position_distribution(std::size_t m, std::size_t x0, std::size_t c0, std::size_t t) {
    const Dense ut = power(hadamard_walk_operator(m), t);
    std::vector<double> p(m, 0.0);
    for (std::size_t x = 0; x < m; ++x)
        for (std::size_t c = 0; c < 2; ++c) p[x] += std::norm(ut[2 * x + c][2 * x0 + c0]);
    return p;
}

}  // namespace oracle
