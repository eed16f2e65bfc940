// walk_engine.hpp
// Two-direction discrete-time quantum walk on a cycle of M positions.
//
// The walk lives on layout [M, 2] (walker, coin). One step is U = S (I_w (x) C):
// the coin operator acts first, then the coin-controlled shift moves coin 0
// one position forward and coin 1 one position backward, modulo M.

#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "qwchain/qudit_state.hpp"

namespace qwchain {

/// Coin parameters in radians. Defaults give the Hadamard coin.
struct CoinParams {
    double xi = 0.0;
    double theta = std::numbers::pi / 4.0;
    double eta = 0.0;
};

struct WalkConfig {
    std::size_t position_dim = 16;
    CoinParams coin{};

    /// Throws InvalidDimension unless position_dim is a power of two >= 2.
    void validate() const {
        if (position_dim < 2 || !std::has_single_bit(position_dim))
            fail(error_code::invalid_dimension,
                 "walk position dimension must be a power of two >= 2, got " +
                     std::to_string(position_dim));
    }

    SubsystemLayout layout() const { return SubsystemLayout({position_dim, 2}); }
};

/// [[e^{i xi} cos theta, e^{i eta} sin theta], [e^{-i eta} sin theta, -e^{-i xi} cos theta]]
inline Matrix coin_matrix(const CoinParams& p) {
    const double c = std::cos(p.theta);
    const double s = std::sin(p.theta);
    return Matrix{{std::polar(c, p.xi), std::polar(s, p.eta)},
                  {std::polar(s, -p.eta), -std::polar(c, -p.xi)}};
}

/// Permutation S = T_{+1} (x) |0><0| + T_{-1} (x) |1><1| over the flat [M, 2] index.
inline Matrix shift_matrix(std::size_t m) {
    if (m < 2) fail(error_code::invalid_dimension, "shift needs M >= 2");
    Matrix s(2 * m, 2 * m);
    for (std::size_t x = 0; x < m; ++x) {
        s(2 * ((x + 1) % m) + 0, 2 * x + 0) = 1.0;
        s(2 * ((x + m - 1) % m) + 1, 2 * x + 1) = 1.0;
    }
    return s;
}

/// Dense U = S (I_w (x) C). Evolution does not use this; it is exposed for
/// inspection and small-M checks.
inline Matrix step_operator(const WalkConfig& config) {
    config.validate();
    return shift_matrix(config.position_dim) *
           kron(Matrix::identity(config.position_dim), coin_matrix(config.coin));
}

inline StateVector initial_walk_state(const WalkConfig& config, std::size_t position,
                                      std::size_t coin = 0) {
    config.validate();
    return StateVector::basis(config.layout(), {position, coin});
}

namespace detail {

inline void check_walk_layout(const StateVector& state, const WalkConfig& config) {
    config.validate();
    const auto& dims = state.layout().dims();
    if (dims.size() != 2 || dims[0] != config.position_dim || dims[1] != 2)
        fail(error_code::dimension_mismatch,
             "walk state must have layout [" + std::to_string(config.position_dim) + ", 2]");
}

struct Coin2 {
    complex a, b, c, d;
};

inline Coin2 coin_entries(const Matrix& m) { return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}; }

inline void coin_in_place(std::vector<complex>& amps, std::size_t m, const Coin2& k) {
    for (std::size_t x = 0; x < m; ++x) {
        const complex up = amps[2 * x];
        const complex down = amps[2 * x + 1];
        amps[2 * x] = k.a * up + k.b * down;
        amps[2 * x + 1] = k.c * up + k.d * down;
    }
}

inline void shift_in_place(std::vector<complex>& amps, std::vector<complex>& scratch, std::size_t m) {
    for (std::size_t x = 0; x < m; ++x) {
        scratch[2 * ((x + 1) % m)] = amps[2 * x];
        scratch[2 * ((x + m - 1) % m) + 1] = amps[2 * x + 1];
    }
    amps.swap(scratch);
}

inline void unshift_in_place(std::vector<complex>& amps, std::vector<complex>& scratch, std::size_t m) {
    for (std::size_t x = 0; x < m; ++x) {
        scratch[2 * x] = amps[2 * ((x + 1) % m)];
        scratch[2 * x + 1] = amps[2 * ((x + m - 1) % m) + 1];
    }
    amps.swap(scratch);
}

}  // namespace detail

/// U^t |state>, built from t applications of coin-then-shift.
inline StateVector evolve(const StateVector& state, const WalkConfig& config, std::size_t steps) {
    detail::check_walk_layout(state, config);
    if (steps == 0) return state;
    const Matrix coin = coin_matrix(config.coin);
    if (unitarity_defect(coin) > unitary_admission_tolerance)
        fail(error_code::not_unitary, "coin operator is not unitary");
    const auto k = detail::coin_entries(coin);
    const std::size_t m = config.position_dim;
    StateBuilder out(state);
    auto& amps = out.amplitudes();
    std::vector<complex> scratch(amps.size());
    for (std::size_t t = 0; t < steps; ++t) {
        detail::coin_in_place(amps, m, k);
        detail::shift_in_place(amps, scratch, m);
    }
    return std::move(out).finish();
}

/// (U^dagger)^t |state>: each step undoes the shift, then applies C^dagger.
inline StateVector inverse_evolve(const StateVector& state, const WalkConfig& config, std::size_t steps) {
    detail::check_walk_layout(state, config);
    if (steps == 0) return state;
    const auto k = detail::coin_entries(coin_matrix(config.coin).adjoint());
    const std::size_t m = config.position_dim;
    StateBuilder out(state);
    auto& amps = out.amplitudes();
    std::vector<complex> scratch(amps.size());
    for (std::size_t t = 0; t < steps; ++t) {
        detail::unshift_in_place(amps, scratch, m);
        detail::coin_in_place(amps, m, k);
    }
    return std::move(out).finish();
}

/// Walker position marginal of a [M, 2] walk state.
inline std::vector<double> walker_distribution(const StateVector& state) {
    return position_distribution(state, {0});
}

}  // namespace qwchain
