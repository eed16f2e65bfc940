// qw_hash.hpp
// Hash function driven by a message-controlled two-particle quantum walk.
//
// Two walkers on a cycle of n_h nodes share one 4-dimensional coin
// |c> = a|00> + b|01> + x|10> + d|11>. Each message bit selects the coin
// operator for one step (Grover coin C0 for 0, C1 for 1); the step applies the
// coin and then moves particle 1 by the first coin bit and particle 2 by the
// second (bit 0 -> +1, bit 1 -> -1, modulo n_h). Messages shorter than
// min_steps bits are extended by repeating their bits.
//
// The digest is read from the final joint position distribution p(x1, x2):
// each probability is rounded to 12 decimals, multiplied by 1e8, floored and
// reduced modulo 256. On an even cycle every step flips the parity of both
// positions, so only the parity class reachable after t steps carries
// probability; the digest takes exactly those entries (row-major), i.e.
// n_h^2 / 4 bytes for even n_h and n_h^2 bytes for odd n_h.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qwchain/bytes.hpp"
#include "qwchain/qudit_state.hpp"

namespace qwchain {

struct HashParams {
    std::size_t cycle_size = 8;
    /// Amplitudes of |00>, |01>, |10>, |11>.
    std::array<complex, 4> initial_coin = {complex(1.0 / std::sqrt(30.0), 0.0),
                                           complex(0.0, 2.0 / std::sqrt(30.0)),
                                           complex(-3.0 / std::sqrt(30.0), 0.0),
                                           complex(0.0, 4.0 / std::sqrt(30.0))};
    std::array<std::size_t, 2> initial_positions = {0, 2};
    std::size_t min_steps = 16;
    /// Phase picked up by every amplitude with both particles on the same node.
    double interaction_phase = 1.0;

    void validate() const {
        if (cycle_size < 4) fail(error_code::invalid_spec, "hash cycle size must be >= 4");
        double sq = 0.0;
        for (const auto& a : initial_coin) sq += std::norm(a);
        if (std::abs(sq - 1.0) > amplitude_tolerance)
            fail(error_code::not_normalized, "initial hash coin is not normalized");
        for (std::size_t p : initial_positions)
            if (p >= cycle_size) fail(error_code::invalid_index, "initial hash position off the cycle");
        if (min_steps < 1) fail(error_code::invalid_spec, "min_steps must be >= 1");
    }

    /// Digest length in bytes produced by these parameters.
    std::size_t digest_size() const {
        return cycle_size % 2 == 0 ? (cycle_size / 2) * (cycle_size / 2) : cycle_size * cycle_size;
    }
};

struct Digest {
    Bytes bytes;

    static Digest zero(std::size_t size) { return Digest{Bytes(size, 0)}; }
    static Digest from_hex(std::string_view hex) { return Digest{qwchain::from_hex(hex)}; }

    std::size_t size() const noexcept { return bytes.size(); }
    std::string hex() const { return to_hex(bytes); }

    friend bool operator==(const Digest&, const Digest&) = default;
};

/// Grover coin C0 and the alternative coin C1.
inline std::pair<Matrix, Matrix> grover_coins() {
    Matrix c0{{-0.5, 0.5, 0.5, 0.5}, {0.5, -0.5, 0.5, 0.5}, {0.5, 0.5, -0.5, 0.5}, {0.5, 0.5, 0.5, -0.5}};
    Matrix c1{{0.5, 0.5, 0.5, 0.5}, {0.5, 0.5, -0.5, -0.5}, {0.5, -0.5, 0.5, -0.5}, {0.5, -0.5, -0.5, 0.5}};
    return {std::move(c0), std::move(c1)};
}

/// floor(round_12(p) * 1e8) mod 256 for each probability.
inline Bytes extract_digest_bytes(std::span<const double> probabilities) {
    Bytes out;
    out.reserve(probabilities.size());
    for (double p : probabilities) {
        // round to 12 decimals as an integer count of 1e-12 units, then drop 4 digits
        const auto units = static_cast<std::uint64_t>(std::llround(std::max(p, 0.0) * 1e12));
        out.push_back(static_cast<std::uint8_t>((units / 10000) % 256));
    }
    return out;
}

inline std::size_t hash_step_count(std::size_t message_bits, const HashParams& params) {
    return std::max(message_bits, params.min_steps);
}

namespace detail {

inline bool message_bit(std::span<const std::uint8_t> message, std::size_t k) {
    const std::size_t bit = k % (message.size() * 8);
    return ((message[bit / 8] >> (7 - bit % 8)) & 1U) != 0;
}

}  // namespace detail

/// Final joint position distribution p(x1, x2), flattened row-major (n_h^2 values).
inline std::vector<double> hash_distribution(std::span<const std::uint8_t> message, const HashParams& params) {
    params.validate();
    if (message.empty()) fail(error_code::empty_message, "cannot hash an empty message");
    const std::size_t n = params.cycle_size;
    // amplitude of |x1, x2, c> at (x1 * n + x2) * 4 + c
    std::vector<complex> amps(n * n * 4);
    std::vector<complex> next(amps.size());
    const std::size_t start = (params.initial_positions[0] * n + params.initial_positions[1]) * 4;
    for (std::size_t c = 0; c < 4; ++c) amps[start + c] = params.initial_coin[c];

    // C0 = J/2 - I and C1 = (row-permuted H (x) H) evaluated as butterflies;
    // operation order is fixed so digests are reproducible bit-for-bit.
    const std::size_t steps = hash_step_count(message.size() * 8, params);
    std::array<complex, 4> out{};
    for (std::size_t k = 0; k < steps; ++k) {
        const bool bit = detail::message_bit(message, k);
        for (std::size_t x1 = 0; x1 < n; ++x1) {
            const std::size_t fwd1 = (x1 + 1) % n;
            const std::size_t back1 = (x1 + n - 1) % n;
            for (std::size_t x2 = 0; x2 < n; ++x2) {
                const complex* in = &amps[(x1 * n + x2) * 4];
                if (!bit) {
                    const complex half_sum = 0.5 * (((in[0] + in[1]) + in[2]) + in[3]);
                    for (std::size_t c = 0; c < 4; ++c) out[c] = half_sum - in[c];
                } else {
                    const complex a = in[0] + in[1];
                    const complex b = in[2] + in[3];
                    const complex c = in[0] - in[1];
                    const complex d = in[2] - in[3];
                    out = {0.5 * (a + b), 0.5 * (a - b), 0.5 * (c + d), 0.5 * (c - d)};
                }
                const std::size_t fwd2 = (x2 + 1) % n;
                const std::size_t back2 = (x2 + n - 1) % n;
                next[(fwd1 * n + fwd2) * 4 + 0] = out[0];
                next[(fwd1 * n + back2) * 4 + 1] = out[1];
                next[(back1 * n + fwd2) * 4 + 2] = out[2];
                next[(back1 * n + back2) * 4 + 3] = out[3];
            }
        }
        amps.swap(next);
        const complex meet = std::polar(1.0, params.interaction_phase);
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t c = 0; c < 4; ++c) amps[(x * n + x) * 4 + c] *= meet;
    }

    std::vector<double> probs(n * n, 0.0);
    for (std::size_t cell = 0; cell < n * n; ++cell)
        for (std::size_t c = 0; c < 4; ++c) probs[cell] += std::norm(amps[cell * 4 + c]);
    return probs;
}

/// Row-major cells of the joint distribution that can carry probability after `steps`.
inline std::vector<std::size_t> reachable_cells(const HashParams& params, std::size_t steps) {
    const std::size_t n = params.cycle_size;
    std::vector<std::size_t> cells;
    for (std::size_t x1 = 0; x1 < n; ++x1)
        for (std::size_t x2 = 0; x2 < n; ++x2) {
            if (n % 2 == 0) {
                const bool ok1 = (x1 + params.initial_positions[0] + steps) % 2 == 0;
                const bool ok2 = (x2 + params.initial_positions[1] + steps) % 2 == 0;
                if (!ok1 || !ok2) continue;
            }
            cells.push_back(x1 * n + x2);
        }
    return cells;
}

inline Digest hash(std::span<const std::uint8_t> message, const HashParams& params = {}) {
    const auto probs = hash_distribution(message, params);
    const auto cells = reachable_cells(params, hash_step_count(message.size() * 8, params));
    std::vector<double> selected;
    selected.reserve(cells.size());
    for (std::size_t cell : cells) selected.push_back(probs[cell]);
    return Digest{extract_digest_bytes(selected)};
}

/// Exactly ceil(out_bits / 8) bytes; bits past out_bits in the last byte are zero.
/// Short digests are extended with hash(digest || u32le(counter)), counter = 0, 1, ...
inline Bytes stretch_digest(const Digest& digest, std::size_t out_bits, const HashParams& params = {}) {
    if (out_bits == 0) fail(error_code::invalid_count, "out_bits must be >= 1");
    if (digest.bytes.empty()) fail(error_code::empty_message, "cannot stretch an empty digest");
    Bytes out = digest.bytes;
    std::uint32_t counter = 0;
    while (out.size() * 8 < out_bits) {
        Bytes seed = digest.bytes;
        put_le(seed, counter++);
        const Digest more = hash(seed, params);
        out.insert(out.end(), more.bytes.begin(), more.bytes.end());
    }
    out.resize((out_bits + 7) / 8);
    if (const std::size_t tail = out_bits % 8; tail != 0)
        out.back() &= static_cast<std::uint8_t>(0xFF << (8 - tail));
    return out;
}

}  // namespace qwchain
