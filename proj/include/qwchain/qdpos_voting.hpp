// qdpos_voting.hpp
// Weighted quantum voting over Cat states: weight quantization, privacy index
// distribution, the Fourier-measured ballot box, vote casting, tallying,
// inclusion checks and representative selection.
//
// Entangled measurements by distributed voters are simulated centrally: one
// joint outcome is sampled from the shared state and each voter is handed
// only their own component.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qwchain/qudit_state.hpp"
#include "qwchain/rng.hpp"
#include "qwchain/types.hpp"

namespace qwchain {

enum class CatPhase {
    index,   // dim = n, offsets a permutation of 0..n-1 with offsets[0] = 0
    ballot,  // all offsets zero, dim >= T_v
};

struct CatStateSpec {
    std::size_t particles = 0;
    std::size_t dim = 0;
    std::vector<std::size_t> offsets;
    CatPhase phase = CatPhase::index;
    std::size_t total_votes = 0;  // T_v, checked for the ballot phase
};

inline void validate(const CatStateSpec& spec) {
    auto invalid = [](const std::string& why) { fail(error_code::invalid_spec, why); };
    if (spec.particles < 2) invalid("a Cat state needs at least two particles");
    if (spec.dim < 2) invalid("qudit dimension must be >= 2");
    if (spec.offsets.size() != spec.particles) invalid("one offset per particle required");
    if (spec.offsets[0] != 0) invalid("first offset must be 0");
    for (std::size_t o : spec.offsets)
        if (o >= spec.dim) invalid("offset out of range");
    if (spec.phase == CatPhase::index) {
        if (spec.dim != spec.particles) invalid("index-phase Cat state needs dim = particles");
        std::vector<std::size_t> sorted = spec.offsets;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            invalid("index-phase offsets must be mutually distinct");
    } else {
        if (std::any_of(spec.offsets.begin(), spec.offsets.end(), [](std::size_t o) { return o != 0; }))
            invalid("ballot-phase offsets must all be zero");
        if (spec.dim < spec.total_votes) invalid("ballot dimension must satisfy d >= T_v");
    }
}

namespace detail {

/// (1/sqrt(d)) sum_l w^{l*offsets[0]} |l, l+offsets[1], ...> without validating the CatStateSpec.
inline StateVector cat_state(std::size_t particles, std::size_t dim, const std::vector<std::size_t>& offsets) {
    SubsystemLayout layout(std::vector<std::size_t>(particles, dim));
    StateBuilder out(layout);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    std::vector<std::size_t> digits(particles);
    for (std::size_t l = 0; l < dim; ++l) {
        for (std::size_t i = 0; i < particles; ++i) digits[i] = (l + offsets[i]) % dim;
        const double phase = 2.0 * std::numbers::pi * static_cast<double>((l * offsets[0]) % dim) /
                             static_cast<double>(dim);
        out.amplitudes()[layout.flatten(digits)] += std::polar(scale, phase);
    }
    return std::move(out).finish();
}

inline std::vector<std::size_t> all_targets(std::size_t n) {
    std::vector<std::size_t> t(n);
    std::iota(t.begin(), t.end(), std::size_t{0});
    return t;
}

}  // namespace detail

inline StateVector prepare_cat_state(const CatStateSpec& spec) {
    validate(spec);
    return detail::cat_state(spec.particles, spec.dim, spec.offsets);
}

// ---------------------------------------------------------------------------
// Weights
// ---------------------------------------------------------------------------

struct VoterProfile {
    NodeId id = 0;
    double weight = 0.0;
    std::size_t quantized_weight = 0;
};

/// floor(w_l / W * T_v) for every voter.
inline std::vector<std::size_t> quantize_weights(std::span<const double> weights, std::size_t total_votes) {
    if (weights.empty()) fail(error_code::invalid_count, "no voters");
    if (total_votes < 1) fail(error_code::invalid_count, "T_v must be >= 1");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) fail(error_code::invalid_weight, "voting weights must be positive");
        sum += w;
    }
    std::vector<std::size_t> out;
    out.reserve(weights.size());
    for (double w : weights) {
        const double share = w / sum * static_cast<double>(total_votes);
        // absorb representation error such as 0.3 / 1.0 * 10 = 2.9999999999999996
        out.push_back(static_cast<std::size_t>(std::floor(share * (1.0 + 1e-12) + 1e-12)));
    }
    return out;
}

/// Smallest power of two >= T_v + 1, so a full weight never wraps modulo d.
inline std::size_t default_ballot_dim(std::size_t total_votes) { return std::bit_ceil(total_votes + 1); }

// ---------------------------------------------------------------------------
// Protocol plumbing shared by index distribution and the ballot box
// ---------------------------------------------------------------------------

/// Carries prepared states from a candidate to the voters. May throw
/// ChannelCompromised; the default delivers states untouched.
using StateTransport = std::function<std::vector<StateVector>(std::vector<StateVector>)>;

enum class CatCorruption {
    none,
    wrong_offsets,  // prepared with offsets other than the disclosed ones
    product_state,  // a basis state the candidate knows, consistent with the disclosure
};

struct CandidateBehavior {
    CatCorruption corruption = CatCorruption::none;
    /// Corrupt every group (the candidate cannot tell which group survives
    /// verification); otherwise only group 0 is corrupted.
    bool every_group = true;
};

struct ProtocolOptions {
    std::size_t delta = 3;
    /// Largest tolerated fraction of failed verification groups.
    double verification_threshold = 0.0;
    CandidateBehavior behavior{};
    StateTransport transport{};
};

struct VerificationReport {
    std::vector<std::size_t> checked_groups;
    std::vector<std::size_t> failed_groups;
    double error_rate = 0.0;
};

namespace detail {

inline std::vector<StateVector> deliver(const ProtocolOptions& options, std::vector<StateVector> states) {
    return options.transport ? options.transport(std::move(states)) : states;
}

/// Chooses `count` distinct groups out of `groups`, sorted ascending.
inline std::vector<std::size_t> choose_groups(std::size_t groups, std::size_t count, Rng& rng) {
    std::vector<std::size_t> all = all_targets(groups);
    rng.shuffle(std::span<std::size_t>(all));
    all.resize(count);
    std::sort(all.begin(), all.end());
    return all;
}

inline void finish_verification(VerificationReport& report, const ProtocolOptions& options, std::size_t candidate,
                                const char* phase) {
    report.error_rate = report.checked_groups.empty()
                            ? 0.0
                            : static_cast<double>(report.failed_groups.size()) /
                                  static_cast<double>(report.checked_groups.size());
    if (report.error_rate > options.verification_threshold)
        fail(error_code::protocol_abort, std::string(phase) + " verification failed for candidate " +
                                             std::to_string(candidate) + " (error rate " +
                                             std::to_string(report.error_rate) + ")");
}

inline bool fourier_sum_is_zero(const std::vector<std::size_t>& outcomes, std::size_t d) {
    return std::accumulate(outcomes.begin(), outcomes.end(), std::size_t{0}) % d == 0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Privacy index distribution
// ---------------------------------------------------------------------------

struct PrivacyIndexSet {
    NodeId candidate = 0;
    std::vector<std::size_t> indices;  // N^k_l for voter l
};

inline bool is_permutation_of_range(const std::vector<std::size_t>& values) {
    std::vector<bool> seen(values.size(), false);
    for (std::size_t v : values) {
        if (v >= values.size() || seen[v]) return false;
        seen[v] = true;
    }
    return true;
}

struct IndexDistribution {
    PrivacyIndexSet indices;
    VerificationReport verification;
    std::vector<std::vector<std::size_t>> group_offsets;  // disclosed offsets per group
    std::size_t used_group = 0;
};

namespace detail {

/// Random offset tuple (0, permutation of 1..n-1).
inline std::vector<std::size_t> random_offsets(std::size_t n, Rng& rng) {
    std::vector<std::size_t> offsets = all_targets(n);
    rng.shuffle(std::span<std::size_t>(offsets).subspan(1));
    return offsets;
}

inline std::size_t factorial_capped(std::size_t k, std::size_t cap) {
    std::size_t f = 1;
    for (std::size_t i = 2; i <= k && f < cap; ++i) f *= i;
    return f;
}

}  // namespace detail

/// Prepares 1 + delta groups (two copies each) of index-phase Cat states,
/// sends them through the transport, verifies delta randomly chosen groups
/// against the disclosed offsets, and measures one copy of the remaining
/// group to hand each voter a private index. Throws ProtocolAbort when the
/// verification error rate exceeds the threshold.
inline IndexDistribution distribute_indices(NodeId candidate, std::size_t n, const ProtocolOptions& options,
                                            Rng& rng) {
    if (n < 2) fail(error_code::invalid_spec, "index distribution needs at least two voters");
    if (options.delta < 1) fail(error_code::invalid_spec, "delta must be >= 1");
    const std::size_t groups = 1 + options.delta;
    const bool distinct_possible = detail::factorial_capped(n - 1, groups) >= groups;

    IndexDistribution out;
    out.indices.candidate = candidate;
    while (out.group_offsets.size() < groups) {
        auto offsets = detail::random_offsets(n, rng);
        if (distinct_possible &&
            std::find(out.group_offsets.begin(), out.group_offsets.end(), offsets) != out.group_offsets.end())
            continue;
        out.group_offsets.push_back(std::move(offsets));
    }

    const auto& behavior = options.behavior;
    std::vector<StateVector> prepared;
    for (std::size_t g = 0; g < groups; ++g) {
        const auto& disclosed = out.group_offsets[g];
        const bool corrupt = behavior.corruption != CatCorruption::none && (behavior.every_group || g == 0);
        StateVector copy;
        if (!corrupt) {
            copy = detail::cat_state(n, n, disclosed);
        } else if (behavior.corruption == CatCorruption::wrong_offsets) {
            std::vector<std::size_t> actual = disclosed;
            std::rotate(actual.begin() + 1, actual.begin() + 2, actual.end());
            if (actual == disclosed) actual[1] = 0;  // n = 2 has a single valid tuple
            copy = detail::cat_state(n, n, actual);
        } else {
            std::vector<std::size_t> digits(n);
            for (std::size_t i = 0; i < n; ++i) digits[i] = disclosed[i] % n;
            copy = StateVector::basis(SubsystemLayout(std::vector<std::size_t>(n, n)), digits);
        }
        prepared.push_back(copy);
        prepared.push_back(std::move(copy));
    }
    const std::vector<StateVector> received = detail::deliver(options, std::move(prepared));

    const auto targets = detail::all_targets(n);
    out.verification.checked_groups = detail::choose_groups(groups, options.delta, rng);
    for (std::size_t g : out.verification.checked_groups) {
        const auto& disclosed = out.group_offsets[g];
        const auto comp = measure(received[2 * g], targets, Basis::computational, rng).outcomes;
        bool ok = true;
        for (std::size_t i = 0; i < n; ++i)
            if ((comp[i] + n - comp[0]) % n != disclosed[i]) ok = false;
        const auto four = measure(received[2 * g + 1], targets, Basis::fourier, rng).outcomes;
        if (!detail::fourier_sum_is_zero(four, n)) ok = false;
        if (!ok) out.verification.failed_groups.push_back(g);
    }
    detail::finish_verification(out.verification, options, candidate, "index");

    for (std::size_t g = 0; g < groups; ++g)
        if (!std::binary_search(out.verification.checked_groups.begin(), out.verification.checked_groups.end(), g))
            out.used_group = g;
    const std::size_t copy = rng.coin() ? 1 : 0;
    out.indices.indices = measure(received[2 * out.used_group + copy], targets, Basis::computational, rng).outcomes;
    return out;
}

// ---------------------------------------------------------------------------
// Ballot box
// ---------------------------------------------------------------------------

/// n x n outcomes mod d; column l belongs to voter l, row g to Cat state g.
struct BallotMatrix {
    NodeId candidate = 0;
    std::size_t n = 0;
    std::size_t dim = 0;
    std::vector<std::size_t> entries;  // row-major

    std::size_t entry(std::size_t g, std::size_t l) const { return entries.at(g * n + l); }

    std::vector<std::size_t> column(std::size_t l) const {
        std::vector<std::size_t> col(n);
        for (std::size_t g = 0; g < n; ++g) col[g] = entry(g, l);
        return col;
    }

    static BallotMatrix from_rows(NodeId candidate, std::size_t dim, const std::vector<std::vector<std::size_t>>& rows) {
        BallotMatrix m;
        m.candidate = candidate;
        m.n = rows.size();
        m.dim = dim;
        for (const auto& row : rows) {
            if (row.size() != m.n) fail(error_code::dimension_mismatch, "ballot matrix must be square");
            for (std::size_t v : row) {
                if (v >= dim) fail(error_code::invalid_index, "ballot entry out of range");
                m.entries.push_back(v);
            }
        }
        return m;
    }
};

inline bool rows_sum_to_zero(const BallotMatrix& m) {
    for (std::size_t g = 0; g < m.n; ++g) {
        std::size_t sum = 0;
        for (std::size_t l = 0; l < m.n; ++l) sum += m.entry(g, l);
        if (sum % m.dim != 0) return false;
    }
    return true;
}

struct BallotBox {
    BallotMatrix matrix;
    VerificationReport verification;
};

/// Prepares n + delta groups of the all-zero Cat state over d-level qudits,
/// verifies delta of them (equal computational outcomes, Fourier outcomes
/// summing to 0 mod d), and Fourier-measures one copy of each remaining group
/// to fill the rows of the ballot matrix.
inline BallotBox build_ballot_box(NodeId candidate, std::size_t n, std::size_t d, std::size_t total_votes,
                                  const ProtocolOptions& options, Rng& rng) {
    if (n < 2) fail(error_code::invalid_spec, "a ballot box needs at least two voters");
    if (d < total_votes) fail(error_code::invalid_spec, "ballot dimension must satisfy d >= T_v");
    if (options.delta < 1) fail(error_code::invalid_spec, "delta must be >= 1");
    const CatStateSpec spec{n, d, std::vector<std::size_t>(n, 0), CatPhase::ballot, total_votes};
    const StateVector honest = prepare_cat_state(spec);
    const std::size_t groups = n + options.delta;

    const auto& behavior = options.behavior;
    std::vector<StateVector> prepared;
    for (std::size_t g = 0; g < groups; ++g) {
        const bool corrupt = behavior.corruption != CatCorruption::none && (behavior.every_group || g == 0);
        StateVector copy = honest;
        if (corrupt && behavior.corruption == CatCorruption::wrong_offsets) {
            std::vector<std::size_t> offsets(n, 0);
            offsets[1] = 1;
            copy = detail::cat_state(n, d, offsets);
        } else if (corrupt) {
            copy = StateVector::basis(honest.layout(), std::vector<std::size_t>(n, 0));
        }
        prepared.push_back(copy);
        prepared.push_back(std::move(copy));
    }
    const std::vector<StateVector> received = detail::deliver(options, std::move(prepared));

    const auto targets = detail::all_targets(n);
    BallotBox box;
    box.verification.checked_groups = detail::choose_groups(groups, options.delta, rng);
    for (std::size_t g : box.verification.checked_groups) {
        const auto comp = measure(received[2 * g], targets, Basis::computational, rng).outcomes;
        bool ok = std::all_of(comp.begin(), comp.end(), [&](std::size_t v) { return v == comp[0]; });
        const auto four = measure(received[2 * g + 1], targets, Basis::fourier, rng).outcomes;
        if (!detail::fourier_sum_is_zero(four, d)) ok = false;
        if (!ok) box.verification.failed_groups.push_back(g);
    }
    detail::finish_verification(box.verification, options, candidate, "ballot");

    box.matrix.candidate = candidate;
    box.matrix.n = n;
    box.matrix.dim = d;
    for (std::size_t g = 0; g < groups; ++g) {
        if (std::binary_search(box.verification.checked_groups.begin(), box.verification.checked_groups.end(), g))
            continue;
        const std::size_t copy = rng.coin() ? 1 : 0;
        const auto row = measure(received[2 * g + copy], targets, Basis::fourier, rng).outcomes;
        box.matrix.entries.insert(box.matrix.entries.end(), row.begin(), row.end());
    }
    return box;
}

// ---------------------------------------------------------------------------
// Voting and tallying
// ---------------------------------------------------------------------------

/// Adds `vote` mod d at row `index` of a voter's column.
inline std::vector<std::size_t> cast_vote(std::span<const std::size_t> column, std::size_t index, std::size_t vote,
                                          std::size_t d, std::size_t quantized_weight) {
    if (index >= column.size()) fail(error_code::invalid_index, "privacy index outside the ballot column");
    if (vote > quantized_weight)
        fail(error_code::over_weight, "vote " + std::to_string(vote) + " exceeds quantized weight " +
                                          std::to_string(quantized_weight));
    std::vector<std::size_t> out(column.begin(), column.end());
    out[index] = (out[index] + vote) % d;
    return out;
}

struct TallySheet {
    NodeId candidate = 0;
    std::vector<std::size_t> rows;  // result^k_g
    std::size_t total = 0;          // result^k
};

/// Per-row sums mod d of the published columns. Throws IncompleteBallot if
/// any voter has not published.
inline TallySheet tally(NodeId candidate, std::span<const std::optional<std::vector<std::size_t>>> columns,
                        std::size_t d) {
    const std::size_t n = columns.size();
    TallySheet sheet;
    sheet.candidate = candidate;
    sheet.rows.assign(n, 0);
    for (std::size_t l = 0; l < n; ++l) {
        if (!columns[l]) fail(error_code::incomplete_ballot, "voter " + std::to_string(l) + " has not published");
        if (columns[l]->size() != n) fail(error_code::dimension_mismatch, "published column has the wrong length");
        for (std::size_t g = 0; g < n; ++g) sheet.rows[g] += (*columns[l])[g];
    }
    for (auto& r : sheet.rows) {
        r %= d;
        sheet.total += r;
    }
    return sheet;
}

inline TallySheet tally(const BallotMatrix& m) {
    std::vector<std::optional<std::vector<std::size_t>>> columns;
    for (std::size_t l = 0; l < m.n; ++l) columns.emplace_back(m.column(l));
    return tally(m.candidate, columns, m.dim);
}

/// sum_k result^k at the voter's index for candidate k equals what the voter cast.
inline bool verify_inclusion(std::size_t expected_total, std::span<const std::size_t> indices_per_candidate,
                             std::span<const TallySheet> tallies) {
    if (indices_per_candidate.size() != tallies.size()) return false;
    std::size_t sum = 0;
    for (std::size_t k = 0; k < tallies.size(); ++k) {
        if (indices_per_candidate[k] >= tallies[k].rows.size()) return false;
        sum += tallies[k].rows[indices_per_candidate[k]];
    }
    return sum == expected_total;
}

inline bool verify_inclusion(const VoterProfile& voter, std::span<const std::size_t> indices_per_candidate,
                             std::span<const TallySheet> tallies) {
    return verify_inclusion(voter.quantized_weight, indices_per_candidate, tallies);
}

struct Selection {
    std::vector<NodeId> ranked;            // top r by total, ties by ascending id
    std::vector<NodeId> production_order;  // ranked, randomly permuted
};

inline Selection select_representatives(std::span<const TallySheet> tallies, std::size_t r, Rng& rng) {
    if (r < 1 || r > tallies.size())
        fail(error_code::invalid_count, "cannot select " + std::to_string(r) + " of " +
                                            std::to_string(tallies.size()) + " candidates");
    std::vector<const TallySheet*> order;
    for (const auto& t : tallies) order.push_back(&t);
    std::stable_sort(order.begin(), order.end(), [](const TallySheet* a, const TallySheet* b) {
        if (a->total != b->total) return a->total > b->total;
        return a->candidate < b->candidate;
    });
    Selection out;
    for (std::size_t i = 0; i < r; ++i) out.ranked.push_back(order[i]->candidate);
    out.production_order = out.ranked;
    rng.shuffle(std::span<NodeId>(out.production_order));
    return out;
}

}  // namespace qwchain
