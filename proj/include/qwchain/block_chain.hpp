// block_chain.hpp
// Quantum-walk blocks: positions seeded by the predecessor hash, step counts
// derived from the block's own data, validation by inverse evolution.

#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qwchain/bytes.hpp"
#include "qwchain/qw_hash.hpp"
#include "qwchain/rng.hpp"
#include "qwchain/types.hpp"
#include "qwchain/walk_engine.hpp"

namespace qwchain {

struct Transaction {
    NodeId sender = 0;
    NodeId receiver = 0;
    std::uint64_t nonce = 0;
    std::int64_t timestamp = 0;  // milliseconds
    Bytes payload;
    Bytes signature;

    friend bool operator==(const Transaction&, const Transaction&) = default;
};

/// Canonical bytes covered by a transaction signature (every field but the signature).
inline Bytes signing_bytes(const Transaction& tx) {
    Bytes out;
    put_le(out, tx.sender);
    put_le(out, tx.receiver);
    put_le(out, tx.nonce);
    put_le(out, static_cast<std::uint64_t>(tx.timestamp));
    put_blob(out, tx.payload);
    return out;
}

inline void serialize_into(Bytes& out, const Transaction& tx) {
    put_le(out, tx.sender);
    put_le(out, tx.receiver);
    put_le(out, tx.nonce);
    put_le(out, static_cast<std::uint64_t>(tx.timestamp));
    put_blob(out, tx.payload);
    put_blob(out, tx.signature);
}

/// u32 count, each transaction (fields in declared order, little-endian,
/// length-prefixed blobs), then the block timestamp as i64.
inline Bytes canonical_block_bytes(std::span<const Transaction> transactions, std::int64_t timestamp) {
    Bytes out;
    put_le(out, static_cast<std::uint32_t>(transactions.size()));
    for (const auto& tx : transactions) serialize_into(out, tx);
    put_le(out, static_cast<std::uint64_t>(timestamp));
    return out;
}

struct ChainParams {
    std::size_t n_walkers = 2;
    WalkConfig walk{};
    std::size_t step_bound = 16;  // T
    HashParams hash{};

    void validate() const {
        walk.validate();
        hash.validate();
        if (n_walkers < 1) fail(error_code::invalid_spec, "a block needs at least one walker");
        if (step_bound < 1) fail(error_code::invalid_spec, "step bound T must be >= 1");
    }

    /// L = log2(M)
    std::size_t bits_per_position() const { return static_cast<std::size_t>(std::countr_zero(walk.position_dim)); }
    std::size_t digest_size() const { return hash.digest_size(); }
    Digest genesis_prev_hash() const { return Digest::zero(digest_size()); }
};

struct BlockHeader {
    std::uint64_t index = 0;
    Digest prev_hash;
    Digest own_hash;
    std::int64_t timestamp = 0;
};

struct BlockBody {
    std::size_t n_walkers = 0;
    std::vector<std::size_t> initial_positions;
    std::vector<std::size_t> step_counts;
    std::vector<StateVector> final_states;
    std::vector<Transaction> transactions;
};

struct Block {
    BlockHeader header;
    BlockBody body;
};

/// Stretches the digest to n*L bits and reads n big-endian L-bit segments.
inline std::vector<std::size_t> derive_initial_positions(const Digest& prev_hash, const ChainParams& params) {
    params.validate();
    const std::size_t bits = params.bits_per_position();
    const Bytes stream = stretch_digest(prev_hash, params.n_walkers * bits, params.hash);
    std::vector<std::size_t> positions(params.n_walkers);
    for (std::size_t j = 0; j < params.n_walkers; ++j) {
        std::size_t value = 0;
        for (std::size_t b = 0; b < bits; ++b) {
            const std::size_t bit = j * bits + b;
            value = (value << 1) | ((stream[bit / 8] >> (7 - bit % 8)) & 1U);
        }
        positions[j] = value;
    }
    return positions;
}

/// Step counts t_j = (s_j + r) mod T + 1 over n equal segments of the canonical
/// block bytes (zero-padded to a multiple of n, each read big-endian), with
/// r = lowest 16 bits of the timestamp.
inline std::vector<std::size_t> derive_step_counts(std::span<const Transaction> transactions,
                                                   std::int64_t timestamp, const ChainParams& params) {
    params.validate();
    if (transactions.empty()) fail(error_code::empty_block, "a block needs at least one transaction");
    const Bytes data = canonical_block_bytes(transactions, timestamp);
    const std::size_t n = params.n_walkers;
    const std::size_t segment = (data.size() + n - 1) / n;
    const std::uint64_t bound = params.step_bound;
    const std::uint64_t r = static_cast<std::uint64_t>(timestamp) & 0xFFFFU;
    std::vector<std::size_t> steps(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::uint64_t s_mod = 0;
        for (std::size_t i = j * segment; i < (j + 1) * segment; ++i) {
            const std::uint64_t byte = i < data.size() ? data[i] : 0;
            s_mod = (s_mod * 256 + byte) % bound;
        }
        steps[j] = static_cast<std::size_t>((s_mod + r % bound) % bound + 1);
    }
    return steps;
}

inline Digest block_hash(std::span<const Transaction> transactions, std::int64_t timestamp,
                         const ChainParams& params) {
    return hash(canonical_block_bytes(transactions, timestamp), params.hash);
}

inline Block build_block(std::uint64_t index, const Digest& prev_hash, std::vector<Transaction> transactions,
                         std::int64_t timestamp, const ChainParams& params) {
    Block block;
    block.header.index = index;
    block.header.prev_hash = prev_hash;
    block.header.timestamp = timestamp;
    block.body.n_walkers = params.n_walkers;
    block.body.initial_positions = derive_initial_positions(prev_hash, params);
    block.body.step_counts = derive_step_counts(transactions, timestamp, params);
    block.body.final_states.reserve(params.n_walkers);
    for (std::size_t j = 0; j < params.n_walkers; ++j)
        block.body.final_states.push_back(evolve(initial_walk_state(params.walk, block.body.initial_positions[j]),
                                                 params.walk, block.body.step_counts[j]));
    block.header.own_hash = block_hash(transactions, timestamp, params);
    block.body.transactions = std::move(transactions);
    return block;
}

enum class ValidationMode {
    exact,    // fidelity of the inverse-evolved state with |x, 0>
    sampled,  // one seeded position measurement per walker
};

struct WalkerCheck {
    std::size_t walker = 0;
    std::size_t expected_position = 0;
    std::size_t steps = 0;
    double fidelity = 0.0;
    std::optional<std::size_t> measured;
    bool passed = false;
};

struct ValidationReport {
    bool accepted = false;
    bool internal_ok = false;
    bool linkage_ok = false;
    bool prev_link_ok = false;
    Digest recomputed_hash;
    std::vector<WalkerCheck> walkers;
    std::vector<std::string> failures;  // each cites the failing check
};

inline constexpr double walker_fidelity_threshold = 1.0 - 1e-9;

namespace detail {

inline void check_well_formed(const Block& block, const ChainParams& params) {
    const auto& body = block.body;
    const std::size_t n = params.n_walkers;
    if (body.n_walkers != n || body.final_states.size() != n || body.step_counts.size() != n ||
        body.initial_positions.size() != n)
        fail(error_code::malformed, "block walker count does not match chain parameters");
    if (body.transactions.empty()) fail(error_code::malformed, "block has no transactions");
    if (block.header.own_hash.size() != params.digest_size() ||
        block.header.prev_hash.size() != params.digest_size())
        fail(error_code::malformed, "header digest has the wrong length");
    const SubsystemLayout expected = params.walk.layout();
    for (const auto& s : body.final_states) {
        if (!(s.layout() == expected)) fail(error_code::malformed, "walk state has the wrong layout");
        if (std::abs(s.norm() - 1.0) > amplitude_tolerance)
            fail(error_code::malformed, "walk state is not normalized");
    }
}

}  // namespace detail

/// Internal check (backward evolution to the hash-derived positions) plus
/// linkage check (recomputed hash equals the header hash, header prev_hash
/// equals the validator's view of the predecessor). Throws Malformed for
/// structurally invalid blocks; validation failures are reported, not thrown.
inline ValidationReport validate_block(const Block& block, const Digest& prev_hash, const ChainParams& params,
                                       ValidationMode mode, Rng& rng) {
    params.validate();
    detail::check_well_formed(block, params);
    ValidationReport report;
    const auto& body = block.body;

    report.recomputed_hash = block_hash(body.transactions, block.header.timestamp, params);
    report.linkage_ok = report.recomputed_hash == block.header.own_hash;
    if (!report.linkage_ok) report.failures.push_back("linkage: recomputed hash differs from header hash");
    report.prev_link_ok = prev_hash == block.header.prev_hash;
    if (!report.prev_link_ok) report.failures.push_back("linkage: header prev_hash differs from predecessor hash");

    const auto expected_positions = derive_initial_positions(prev_hash, params);
    const auto steps = derive_step_counts(body.transactions, block.header.timestamp, params);
    bool internal = true;
    if (steps != body.step_counts) {
        internal = false;
        report.failures.push_back("internal: announced step counts differ from derived step counts");
    }
    for (std::size_t j = 0; j < params.n_walkers; ++j) {
        WalkerCheck check;
        check.walker = j;
        check.expected_position = expected_positions[j];
        check.steps = steps[j];
        const StateVector back = inverse_evolve(body.final_states[j], params.walk, steps[j]);
        check.fidelity = std::norm(back.amplitude({expected_positions[j], 0}));
        if (mode == ValidationMode::exact) {
            check.passed = check.fidelity >= walker_fidelity_threshold;
        } else {
            const auto m = measure(back, {0}, Basis::computational, rng);
            check.measured = m.outcomes[0];
            check.passed = m.outcomes[0] == expected_positions[j];
        }
        if (!check.passed) {
            internal = false;
            report.failures.push_back("internal: walker " + std::to_string(j) +
                                      " does not return to position " + std::to_string(expected_positions[j]));
        }
        report.walkers.push_back(check);
    }
    report.internal_ok = internal;
    report.accepted = report.internal_ok && report.linkage_ok && report.prev_link_ok;
    return report;
}

inline ValidationReport validate_block(const Block& block, const Digest& prev_hash, const ChainParams& params) {
    Rng unused(0);
    return validate_block(block, prev_hash, params, ValidationMode::exact, unused);
}

// ---------------------------------------------------------------------------
// Chain store
// ---------------------------------------------------------------------------

/// In-memory single-writer chain; persistence lives in chain_io.hpp.
class ChainStore {
public:
    std::size_t size() const noexcept { return blocks_.size(); }
    bool empty() const noexcept { return blocks_.empty(); }
    const std::vector<Block>& blocks() const noexcept { return blocks_; }
    const Block& at(std::size_t i) const { return blocks_.at(i); }
    Block& mutable_at(std::size_t i) { return blocks_.at(i); }

    Digest tip_hash(const ChainParams& params) const {
        return blocks_.empty() ? params.genesis_prev_hash() : blocks_.back().header.own_hash;
    }

    /// Validates against the current tip and appends on acceptance.
    ValidationReport append_block(Block block, const ChainParams& params) {
        ValidationReport report = validate_block(block, tip_hash(params), params);
        if (block.header.index != blocks_.size()) {
            report.accepted = false;
            report.failures.push_back("linkage: block index " + std::to_string(block.header.index) +
                                      " does not extend chain of length " + std::to_string(blocks_.size()));
        }
        if (report.accepted) blocks_.push_back(std::move(block));
        return report;
    }

    void push_unchecked(Block block) { blocks_.push_back(std::move(block)); }

private:
    std::vector<Block> blocks_;
};

struct ChainReport {
    bool accepted = true;
    std::optional<std::size_t> first_failure;
    std::vector<std::size_t> failing_blocks;
    std::vector<ValidationReport> reports;
};

/// Validates every block against the hash recomputed from its predecessor's
/// contents, so a historical edit fails at the edited block and its successor.
inline ChainReport verify_chain(const ChainStore& store, const ChainParams& params,
                                ValidationMode mode = ValidationMode::exact, std::uint64_t seed = 0) {
    ChainReport out;
    Rng rng(seed);
    Digest expected_prev = params.genesis_prev_hash();
    for (std::size_t k = 0; k < store.size(); ++k) {
        const Block& block = store.at(k);
        ValidationReport report;
        try {
            report = validate_block(block, expected_prev, params, mode, rng);
        } catch (const Error& e) {
            if (e.code() != error_code::malformed) throw;
            report.failures.push_back(std::string("malformed: ") + e.what());
            report.recomputed_hash = block.header.own_hash;
        }
        if (block.header.index != k) {
            report.accepted = false;
            report.failures.push_back("linkage: stored index " + std::to_string(block.header.index) +
                                      " at position " + std::to_string(k));
        }
        if (!report.accepted) {
            out.accepted = false;
            if (!out.first_failure) out.first_failure = k;
            out.failing_blocks.push_back(k);
        }
        expected_prev = report.recomputed_hash;
        out.reports.push_back(std::move(report));
    }
    return out;
}

}  // namespace qwchain
