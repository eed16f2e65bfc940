// net_harness.hpp
// Simulated network around the chain and the voting protocol: decoy-protected
// quantum channels, transaction admission, block-production rounds with
// validator approval, elections, incentives and full-node synchronisation.
//
// Everything runs on one thread under a simulated millisecond clock; no wall
// time enters any report.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qwchain/block_chain.hpp"
#include "qwchain/chain_io.hpp"
#include "qwchain/qdpos_voting.hpp"
#include "qwchain/qudit_state.hpp"
#include "qwchain/rng.hpp"
#include "qwchain/signature.hpp"
#include "qwchain/types.hpp"

namespace qwchain {

// ---------------------------------------------------------------------------
// Nodes and adversaries
// ---------------------------------------------------------------------------

enum class Role : unsigned { voter = 1, candidate = 2, representative = 4, validator = 8, full_node = 16 };

inline constexpr unsigned role_bit(Role r) { return static_cast<unsigned>(r); }

struct Node {
    NodeId id = 0;
    std::string label;
    double stake_weight = 1.0;
    unsigned roles = 0;
    std::shared_ptr<Keypair> keys;
    Digest local_tip;  // last block hash this node has synchronised

    bool has(Role r) const { return (roles & role_bit(r)) != 0; }
};

enum class AdversaryKind { none, intercept_resend, block_tamper, vote_forger, state_substitution };

inline constexpr const char* to_string(AdversaryKind k) {
    switch (k) {
        case AdversaryKind::none: return "none";
        case AdversaryKind::intercept_resend: return "intercept_resend";
        case AdversaryKind::block_tamper: return "block_tamper";
        case AdversaryKind::vote_forger: return "vote_forger";
        case AdversaryKind::state_substitution: return "state_substitution";
    }
    return "unknown";
}

inline std::optional<AdversaryKind> adversary_from_string(std::string_view s) {
    for (auto k : {AdversaryKind::none, AdversaryKind::intercept_resend, AdversaryKind::block_tamper,
                   AdversaryKind::vote_forger, AdversaryKind::state_substitution})
        if (s == to_string(k)) return k;
    return std::nullopt;
}

enum class Forgery { over_weight, column_tamper };

/// Intercept-resend acts on every channel; the other kinds act through `node`.
struct AdversaryModel {
    AdversaryKind kind = AdversaryKind::none;
    NodeId node = 0;
    Forgery forgery = Forgery::over_weight;
};

// ---------------------------------------------------------------------------
// Decoy-protected quantum channel
// ---------------------------------------------------------------------------

struct QuantumChannel {
    double decoy_rate = 0.5;                  // decoys / (decoys + payload states)
    std::optional<std::size_t> decoy_count;   // overrides decoy_rate
    std::size_t decoy_dim = 0;                // 0: dimension of the first payload qudit
    double error_threshold = 0.05;
    AdversaryModel adversary{};

    void validate() const {
        if (!(decoy_rate > 0.0 && decoy_rate < 1.0)) fail(error_code::invalid_spec, "decoy_rate must lie in (0, 1)");
        if (!(error_threshold >= 0.0 && error_threshold <= 1.0))
            fail(error_code::invalid_spec, "error_threshold must lie in [0, 1]");
    }
};

struct DecoyCheck {
    std::size_t position = 0;  // index in the transmitted sequence
    Basis basis = Basis::computational;
    std::size_t value = 0;
    std::size_t outcome = 0;
    bool passed = true;
};

struct ChannelReport {
    std::size_t payload_count = 0;
    std::vector<DecoyCheck> decoys;
    std::size_t failures = 0;
    double error_rate = 0.0;
    bool compromised = false;
};

struct Transmission {
    std::vector<StateVector> delivered;
    ChannelReport report;
};

inline std::size_t decoy_count_for(const QuantumChannel& channel, std::size_t payload) {
    if (channel.decoy_count) return *channel.decoy_count;
    const double ratio = channel.decoy_rate / (1.0 - channel.decoy_rate);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(payload) - 1e-9)));
}

/// |value> or F|value> on one d-level qudit.
inline StateVector decoy_state(std::size_t d, Basis basis, std::size_t value) {
    SubsystemLayout layout({d});
    if (basis == Basis::computational) return StateVector::basis(layout, {value});
    StateBuilder out(layout);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::size_t j = 0; j < d; ++j)
        out.amplitudes()[j] = std::polar(scale, 2.0 * std::numbers::pi * static_cast<double>((j * value) % d) /
                                                    static_cast<double>(d));
    return std::move(out).finish();
}

/// Measures every qudit of `state` in an independently guessed basis and
/// forwards the collapsed state.
inline StateVector intercept_resend(const StateVector& state, Rng& rng) {
    StateVector current = state;
    for (std::size_t t = 0; t < state.layout().subsystems(); ++t) {
        const Basis guess = rng.coin() ? Basis::fourier : Basis::computational;
        current = measure(current, {t}, guess, rng).collapsed;
    }
    return current;
}

/// Interleaves decoys at secret positions, lets the adversary act on the whole
/// sequence, then checks each decoy in its announced basis. Never throws on a
/// failed check; `report.compromised` is set instead.
inline Transmission transmit_with_decoys_unchecked(const QuantumChannel& channel, std::vector<StateVector> states,
                                                   Rng& rng) {
    channel.validate();
    const std::size_t d = channel.decoy_dim != 0   ? channel.decoy_dim
                          : states.empty()         ? 2
                                                   : states.front().layout().dim(0);
    const std::size_t decoys = decoy_count_for(channel, states.size());
    const std::size_t total = states.size() + decoys;

    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<bool> is_decoy(total, false);
    for (std::size_t i = 0; i < decoys; ++i) is_decoy[order[i]] = true;

    Transmission out;
    out.report.payload_count = states.size();
    std::vector<StateVector> sequence;
    sequence.reserve(total);
    std::size_t next_payload = 0;
    for (std::size_t pos = 0; pos < total; ++pos) {
        if (is_decoy[pos]) {
            DecoyCheck check;
            check.position = pos;
            check.basis = rng.coin() ? Basis::fourier : Basis::computational;
            check.value = static_cast<std::size_t>(rng.below(d));
            out.report.decoys.push_back(check);
            sequence.push_back(decoy_state(d, check.basis, check.value));
        } else {
            sequence.push_back(std::move(states[next_payload++]));
        }
    }

    if (channel.adversary.kind == AdversaryKind::intercept_resend)
        for (auto& s : sequence) s = intercept_resend(s, rng);

    for (auto& check : out.report.decoys) {
        check.outcome = measure(sequence[check.position], {0}, check.basis, rng).outcomes[0];
        check.passed = check.outcome == check.value;
        if (!check.passed) ++out.report.failures;
    }
    out.report.error_rate = decoys == 0 ? 0.0 : static_cast<double>(out.report.failures) / static_cast<double>(decoys);
    out.report.compromised = out.report.error_rate > channel.error_threshold;
    for (std::size_t pos = 0; pos < total; ++pos)
        if (!is_decoy[pos]) out.delivered.push_back(std::move(sequence[pos]));
    return out;
}

/// As above; throws ChannelCompromised when the decoy error rate exceeds the threshold.
inline Transmission transmit_with_decoys(const QuantumChannel& channel, std::vector<StateVector> states, Rng& rng) {
    Transmission t = transmit_with_decoys_unchecked(channel, std::move(states), rng);
    if (t.report.compromised) {
        std::string failed;
        for (const auto& c : t.report.decoys)
            if (!c.passed) failed += (failed.empty() ? "" : ",") + std::to_string(c.position);
        fail(error_code::channel_compromised, "decoy error rate " + std::to_string(t.report.error_rate) +
                                                  " above threshold; failed decoys at positions " + failed);
    }
    return t;
}

/// Adapts a channel into a voting-protocol transport. Reports are appended to
/// `log` when given. `rng` must outlive the returned function.
inline StateTransport decoy_transport(QuantumChannel channel, Rng& rng, std::vector<ChannelReport>* log = nullptr) {
    return [channel = std::move(channel), rng = &rng, log](std::vector<StateVector> states) {
        Transmission t = transmit_with_decoys(channel, std::move(states), *rng);
        if (log) log->push_back(std::move(t.report));
        return std::move(t.delivered);
    };
}

// ---------------------------------------------------------------------------
// Transaction admission
// ---------------------------------------------------------------------------

enum class Admission { accepted, unknown_sender, bad_signature, replay };

inline constexpr const char* to_string(Admission a) {
    switch (a) {
        case Admission::accepted: return "accepted";
        case Admission::unknown_sender: return "unknown_sender";
        case Admission::bad_signature: return "bad_signature";
        case Admission::replay: return "replay";
    }
    return "unknown";
}

/// Checks signatures against a public-key directory and rejects any
/// (sender, nonce) pair seen before.
class TransactionGate {
public:
    explicit TransactionGate(SignatureParams params = {}) : params_(std::move(params)) {}

    void register_key(const PublicKey& key) { directory_[key.owner] = key; }

    Admission admit(const Transaction& tx) {
        const auto it = directory_.find(tx.sender);
        if (it == directory_.end()) return Admission::unknown_sender;
        if (seen_.count({tx.sender, tx.nonce}) != 0) return Admission::replay;
        if (!verify_signature(it->second, tx, params_)) return Admission::bad_signature;
        seen_.insert({tx.sender, tx.nonce});
        return Admission::accepted;
    }

private:
    SignatureParams params_;
    std::map<NodeId, PublicKey> directory_;
    std::set<std::pair<NodeId, std::uint64_t>> seen_;
};

// ---------------------------------------------------------------------------
// Validator approval aggregation
// ---------------------------------------------------------------------------

/// ceil(quorum * V), robust to quorum values such as 2/3 that are inexact in binary.
inline std::size_t approval_threshold(double quorum, std::size_t validators) {
    return static_cast<std::size_t>(std::ceil(quorum * static_cast<double>(validators) - 1e-9));
}

/// Sums 0/1 approvals with the Cat-state ballot machinery: one ballot box of
/// dimension V + 1 in which each validator holds weight 1.
inline std::size_t aggregate_approvals(const std::vector<bool>& approvals, std::size_t delta, Rng& rng) {
    const std::size_t n = approvals.size();
    if (n < 2) return n == 1 && approvals[0] ? 1 : 0;
    ProtocolOptions options;
    options.delta = delta;
    const std::size_t d = n + 1;
    const auto indices = distribute_indices(0, n, options, rng).indices.indices;
    const BallotBox box = build_ballot_box(0, n, d, n, options, rng);
    std::vector<std::optional<std::vector<std::size_t>>> columns;
    for (std::size_t l = 0; l < n; ++l)
        columns.emplace_back(cast_vote(box.matrix.column(l), indices[l], approvals[l] ? 1 : 0, d, 1));
    return tally(0, columns, d).total;
}

// ---------------------------------------------------------------------------
// Block production
// ---------------------------------------------------------------------------

struct RoundConfig {
    std::int64_t block_interval_ms = 1000;  // f_t
    std::vector<NodeId> validators;
    double quorum = 2.0 / 3.0;
    std::vector<NodeId> representatives;  // production order for this round
    std::int64_t start_time_ms = 0;
    std::size_t delta = 3;  // verification groups for approval aggregation

    void validate() const {
        if (!(quorum > 0.5 && quorum <= 1.0)) fail(error_code::config_error, "quorum must lie in (1/2, 1]");
        if (block_interval_ms <= 0) fail(error_code::config_error, "block interval must be positive");
        if (representatives.empty()) fail(error_code::config_error, "no representatives to produce blocks");
        if (validators.empty()) fail(error_code::config_error, "no validators");
    }
};

/// Node behaviour other than the honest default.
struct RoundEnvironment {
    AdversaryModel adversary{};
    std::set<NodeId> idle;        // representatives that never produce (timeout)
    std::set<NodeId> dissenting;  // validators that vote 0 regardless of validity
};

enum class AttemptOutcome { accepted, rejected, timeout };

inline constexpr const char* to_string(AttemptOutcome o) {
    switch (o) {
        case AttemptOutcome::accepted: return "accepted";
        case AttemptOutcome::rejected: return "rejected";
        case AttemptOutcome::timeout: return "timeout";
    }
    return "unknown";
}

struct ProductionAttempt {
    NodeId representative = 0;
    std::int64_t window_start_ms = 0;
    std::int64_t window_end_ms = 0;
    AttemptOutcome outcome = AttemptOutcome::timeout;
    bool block_valid = false;
    std::size_t approvals = 0;
    std::size_t threshold = 0;
    std::vector<NodeId> approving_validators;
    std::optional<Digest> block_hash;
    std::vector<std::string> evidence;
};

struct RoundReport {
    std::size_t round = 0;
    error_code status = error_code::ok;  // ok or round_failed
    std::size_t transactions = 0;
    std::vector<ProductionAttempt> attempts;
    std::optional<NodeId> producer;
    std::optional<std::uint64_t> block_index;
    std::int64_t end_time_ms = 0;

    const ProductionAttempt* accepted_attempt() const {
        for (const auto& a : attempts)
            if (a.outcome == AttemptOutcome::accepted) return &a;
        return nullptr;
    }
};

namespace detail {

inline void tamper_block(Block& block, AdversaryKind kind, Rng& rng) {
    if (kind == AdversaryKind::block_tamper) {
        auto& tx = block.body.transactions.front();
        if (tx.payload.empty()) tx.payload.push_back(0);
        tx.payload[rng.below(tx.payload.size())] ^= static_cast<std::uint8_t>(1U << rng.below(8));
    } else if (kind == AdversaryKind::state_substitution) {
        for (auto& s : block.body.final_states) s = random_state(s.layout(), rng);
    }
}

}  // namespace detail

/// One production round: representatives try in order, each within its own
/// window; the first block approved by a quorum of validators is appended.
/// Transactions of a rejected or missing block move to the next representative.
inline RoundReport run_production_round(std::size_t round, const RoundConfig& config,
                                        std::vector<Transaction> mempool, ChainStore& chain,
                                        const ChainParams& params, const RoundEnvironment& env, Rng& rng) {
    config.validate();
    RoundReport report;
    report.round = round;
    report.transactions = mempool.size();
    std::int64_t clock = config.start_time_ms;
    const std::size_t threshold = approval_threshold(config.quorum, config.validators.size());

    for (NodeId rep : config.representatives) {
        ProductionAttempt attempt;
        attempt.representative = rep;
        attempt.window_start_ms = clock;
        attempt.window_end_ms = clock + config.block_interval_ms;
        attempt.threshold = threshold;
        clock = attempt.window_end_ms;

        if (env.idle.count(rep) != 0 || mempool.empty()) {
            attempt.outcome = AttemptOutcome::timeout;
            attempt.evidence.push_back(mempool.empty() ? "timeout: empty mempool"
                                                       : "timeout: no block within window");
            report.attempts.push_back(std::move(attempt));
            continue;
        }

        const Digest prev = chain.tip_hash(params);
        Block block = build_block(chain.size(), prev, mempool, attempt.window_end_ms, params);
        if (env.adversary.node == rep) detail::tamper_block(block, env.adversary.kind, rng);
        attempt.block_hash = block.header.own_hash;

        ValidationReport validation = validate_block(block, prev, params);
        attempt.block_valid = validation.accepted;
        std::vector<bool> votes;
        for (NodeId v : config.validators) {
            const bool approve = validation.accepted && env.dissenting.count(v) == 0;
            votes.push_back(approve);
            if (approve) attempt.approving_validators.push_back(v);
        }
        attempt.approvals = aggregate_approvals(votes, config.delta, rng);

        if (attempt.approvals >= threshold) {
            const ValidationReport appended = chain.append_block(block, params);
            if (!appended.accepted) fail(error_code::round_failed, "approved block failed to append");
            attempt.outcome = AttemptOutcome::accepted;
            report.producer = rep;
            report.block_index = block.header.index;
            report.attempts.push_back(std::move(attempt));
            break;
        }
        attempt.outcome = AttemptOutcome::rejected;
        attempt.evidence = validation.failures;
        attempt.evidence.push_back("quorum: " + std::to_string(attempt.approvals) + " of " +
                                   std::to_string(config.validators.size()) + " approvals, " +
                                   std::to_string(threshold) + " required");
        report.attempts.push_back(std::move(attempt));
    }
    report.end_time_ms = clock;
    if (!report.producer) report.status = error_code::round_failed;
    return report;
}

// ---------------------------------------------------------------------------
// Incentives
// ---------------------------------------------------------------------------

struct IncentiveParams {
    std::int64_t reward_producer = 10;   // R_p
    std::int64_t reward_validator = 1;   // R_v
    std::size_t idle_threshold = 2;      // k consecutive timeouts before exclusion
};

struct IncentiveLedger {
    std::map<NodeId, std::int64_t> balances;
    std::map<NodeId, std::size_t> consecutive_timeouts;
    std::map<NodeId, std::string> excluded;  // node -> reason

    bool is_excluded(NodeId id) const { return excluded.count(id) != 0; }
};

inline void apply_incentives(const RoundReport& report, IncentiveLedger& ledger, const IncentiveParams& params) {
    for (const auto& a : report.attempts) {
        switch (a.outcome) {
            case AttemptOutcome::accepted:
                ledger.balances[a.representative] += params.reward_producer;
                ledger.consecutive_timeouts[a.representative] = 0;
                for (NodeId v : a.approving_validators) ledger.balances[v] += params.reward_validator;
                break;
            case AttemptOutcome::rejected:
                if (!a.block_valid) {
                    const std::string cited = a.evidence.empty() ? "invalid block" : a.evidence.front();
                    ledger.excluded.emplace(a.representative, "round " + std::to_string(report.round) + ": " + cited);
                }
                break;
            case AttemptOutcome::timeout:
                if (++ledger.consecutive_timeouts[a.representative] >= params.idle_threshold)
                    ledger.excluded.emplace(a.representative,
                                            "round " + std::to_string(report.round) + ": " +
                                                std::to_string(params.idle_threshold) + " consecutive timeouts");
                break;
        }
    }
}

/// Candidates still eligible for the next election.
inline std::vector<NodeId> eligible_candidates(const std::vector<NodeId>& candidates, const IncentiveLedger& ledger) {
    std::vector<NodeId> out;
    for (NodeId c : candidates)
        if (!ledger.is_excluded(c)) out.push_back(c);
    return out;
}

// ---------------------------------------------------------------------------
// Synchronisation
// ---------------------------------------------------------------------------

struct SyncEntry {
    NodeId node = 0;
    bool consistent = true;
    double max_amplitude_deviation = 0.0;
    std::string detail;
};

struct SyncReport {
    error_code status = error_code::ok;  // ok or sync_mismatch
    std::vector<SyncEntry> nodes;
    std::vector<NodeId> divergent;
};

/// Each full node rebuilds the block's walk states from its own tip hash and
/// the block's transactions and timestamp, then compares with the block.
inline SyncReport finalize_and_sync(const Block& block, const std::vector<Node>& nodes, const ChainParams& params) {
    SyncReport report;
    for (const auto& node : nodes) {
        if (!node.has(Role::full_node)) continue;
        SyncEntry entry;
        entry.node = node.id;
        try {
            const Block local = build_block(block.header.index, node.local_tip, block.body.transactions,
                                            block.header.timestamp, params);
            double deviation = 0.0;
            for (std::size_t j = 0; j < local.body.final_states.size(); ++j) {
                const auto& a = local.body.final_states[j].amplitudes();
                const auto& b = block.body.final_states.at(j).amplitudes();
                if (a.size() != b.size()) {
                    deviation = std::numeric_limits<double>::infinity();
                    break;
                }
                for (std::size_t i = 0; i < a.size(); ++i) deviation = std::max(deviation, std::abs(a[i] - b[i]));
            }
            entry.max_amplitude_deviation = deviation;
            entry.consistent = deviation <= amplitude_tolerance && local.header.own_hash == block.header.own_hash;
            if (!entry.consistent) entry.detail = "rebuilt walk states differ from block";
        } catch (const Error& e) {
            entry.consistent = false;
            entry.max_amplitude_deviation = std::numeric_limits<double>::infinity();
            entry.detail = e.what();
        }
        if (!entry.consistent) report.divergent.push_back(node.id);
        report.nodes.push_back(std::move(entry));
    }
    if (!report.divergent.empty()) report.status = error_code::sync_mismatch;
    return report;
}

// ---------------------------------------------------------------------------
// Elections
// ---------------------------------------------------------------------------

struct ElectionConfig {
    std::vector<double> weights;  // voter l has id l
    std::vector<NodeId> candidates;
    std::vector<std::string> candidate_labels;  // optional, parallel to candidates
    std::size_t total_votes = 10;               // T_v
    std::size_t ballot_dim = 0;                 // 0: default_ballot_dim(T_v)
    std::vector<std::vector<std::size_t>> votes;  // votes[k][l]
    std::size_t representatives = 1;
    std::size_t delta = 3;
    double verification_threshold = 0.0;
    bool use_channel = true;
    QuantumChannel channel{};
    AdversaryModel adversary{};
    /// Replace the quantum phases for candidate k (used to replay a fixed transcript).
    std::vector<std::vector<std::size_t>> fixed_indices;
    std::vector<BallotMatrix> fixed_matrices;
};

struct VoteRejection {
    NodeId voter = 0;
    NodeId candidate = 0;
    std::size_t attempted = 0;
    std::size_t allowed = 0;
    std::string reason;
};

struct CandidateRecord {
    NodeId candidate = 0;
    std::string label;
    std::vector<std::size_t> indices;      // audit only
    BallotMatrix initial;                  // audit only
    BallotMatrix published;                // columns as published after voting
    std::optional<VerificationReport> index_verification;
    std::optional<VerificationReport> ballot_verification;
    TallySheet tally;
};

struct ElectionResult {
    error_code status = error_code::ok;  // ok or protocol_abort (inclusion failure)
    std::string abort_reason;
    std::vector<VoterProfile> voters;
    std::size_t ballot_dim = 0;
    std::vector<CandidateRecord> candidates;
    std::vector<VoteRejection> rejections;
    std::vector<std::size_t> cast_totals;  // per voter, after guards
    std::vector<bool> inclusion;           // per voter
    Selection selection;
    std::vector<ChannelReport> channel_reports;
};

/// Runs weight quantization, index distribution, ballot boxes, voting,
/// tallying, inclusion checks and selection. Quantum-phase failures throw
/// ProtocolAbort or ChannelCompromised; a failed inclusion check is returned
/// as status protocol_abort with no representatives selected.
inline ElectionResult run_election(const ElectionConfig& config, Rng& rng) {
    const std::size_t n = config.weights.size();
    const std::size_t m = config.candidates.size();
    if (n < 2) fail(error_code::config_error, "an election needs at least two voters");
    if (m < 1) fail(error_code::config_error, "an election needs at least one candidate");
    if (config.votes.size() != m) fail(error_code::config_error, "one vote row per candidate required");
    for (const auto& row : config.votes)
        if (row.size() != n) fail(error_code::config_error, "one vote per voter per candidate required");
    if (config.representatives < 1 || config.representatives > m)
        fail(error_code::invalid_count, "representative count must lie in [1, candidates]");

    ElectionResult result;
    const auto quantized = quantize_weights(config.weights, config.total_votes);
    for (std::size_t l = 0; l < n; ++l)
        result.voters.push_back({static_cast<NodeId>(l), config.weights[l], quantized[l]});
    const std::size_t d = config.ballot_dim != 0 ? config.ballot_dim : default_ballot_dim(config.total_votes);
    result.ballot_dim = d;

    ProtocolOptions options;
    options.delta = config.delta;
    options.verification_threshold = config.verification_threshold;
    Rng channel_rng = rng.split(0xC4A7);
    if (config.use_channel) {
        QuantumChannel channel = config.channel;
        if (config.adversary.kind == AdversaryKind::intercept_resend) channel.adversary = config.adversary;
        options.transport = decoy_transport(channel, channel_rng, &result.channel_reports);
    }

    for (std::size_t k = 0; k < m; ++k) {
        CandidateRecord rec;
        rec.candidate = config.candidates[k];
        rec.label = k < config.candidate_labels.size() ? config.candidate_labels[k] : std::to_string(rec.candidate);
        if (k < config.fixed_indices.size() && !config.fixed_indices[k].empty()) {
            rec.indices = config.fixed_indices[k];
            if (rec.indices.size() != n || !is_permutation_of_range(rec.indices))
                fail(error_code::config_error, "fixed indices must be a permutation of 0..n-1");
        } else {
            auto dist = distribute_indices(rec.candidate, n, options, rng);
            rec.indices = std::move(dist.indices.indices);
            rec.index_verification = std::move(dist.verification);
        }
        if (k < config.fixed_matrices.size() && config.fixed_matrices[k].n != 0) {
            rec.initial = config.fixed_matrices[k];
            rec.initial.candidate = rec.candidate;
            if (rec.initial.n != n || rec.initial.dim != d)
                fail(error_code::config_error, "fixed ballot matrix has the wrong shape");
        } else {
            BallotBox box = build_ballot_box(rec.candidate, n, d, config.total_votes, options, rng);
            rec.initial = std::move(box.matrix);
            rec.ballot_verification = std::move(box.verification);
        }
        rec.published = rec.initial;
        result.candidates.push_back(std::move(rec));
    }

    const bool forging = config.adversary.kind == AdversaryKind::vote_forger && config.adversary.node < n;
    const std::size_t forger = forging ? config.adversary.node : n;
    result.cast_totals.assign(n, 0);
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t k = 0; k < m; ++k) {
            auto& rec = result.candidates[k];
            std::size_t vote = config.votes[k][l];
            if (l == forger && config.adversary.forgery == Forgery::over_weight && k == 0)
                vote = quantized[l] - result.cast_totals[l] + 1;
            const std::size_t allowed = quantized[l] - result.cast_totals[l];
            const auto column = rec.published.column(l);
            std::vector<std::size_t> updated;
            try {
                updated = cast_vote(column, rec.indices[l], vote, d, allowed);
            } catch (const Error& e) {
                if (e.code() != error_code::over_weight) throw;
                result.rejections.push_back({static_cast<NodeId>(l), rec.candidate, vote, allowed, e.what()});
                continue;  // the rejected vote counts as 0
            }
            result.cast_totals[l] += vote;
            for (std::size_t g = 0; g < n; ++g) rec.published.entries[g * n + l] = updated[g];
        }
    }
    if (forging && config.adversary.forgery == Forgery::column_tamper) {
        auto& rec = result.candidates.front();
        const std::size_t row = (rec.indices[forger] + 1) % n;
        auto& entry = rec.published.entries[row * n + forger];
        entry = (entry + 1) % d;
    }

    std::vector<TallySheet> tallies;
    for (auto& rec : result.candidates) {
        rec.tally = tally(rec.published);
        tallies.push_back(rec.tally);
    }
    std::vector<std::size_t> failed;
    for (std::size_t l = 0; l < n; ++l) {
        std::vector<std::size_t> idx;
        for (const auto& rec : result.candidates) idx.push_back(rec.indices[l]);
        const bool ok = verify_inclusion(result.cast_totals[l], idx, tallies);
        result.inclusion.push_back(ok);
        if (!ok) failed.push_back(l);
    }
    if (!failed.empty()) {
        result.status = error_code::protocol_abort;
        result.abort_reason = "inclusion check failed for voters";
        for (std::size_t l : failed) result.abort_reason += " " + std::to_string(l);
        return result;
    }
    result.selection = select_representatives(tallies, config.representatives, rng);
    return result;
}

// ---------------------------------------------------------------------------
// JSON records
// ---------------------------------------------------------------------------

inline Json to_json(const ChannelReport& r) {
    Json decoys = Json::array();
    for (const auto& c : r.decoys)
        decoys.push_back({{"position", c.position},
                          {"basis", c.basis == Basis::fourier ? "fourier" : "computational"},
                          {"value", c.value},
                          {"outcome", c.outcome},
                          {"passed", c.passed}});
    return Json{{"payload_count", r.payload_count}, {"decoy_count", r.decoys.size()}, {"failures", r.failures},
                {"error_rate", r.error_rate},       {"compromised", r.compromised},   {"decoys", std::move(decoys)}};
}

inline Json to_json(const VerificationReport& r) {
    return Json{{"checked_groups", r.checked_groups}, {"failed_groups", r.failed_groups}, {"error_rate", r.error_rate}};
}

inline Json to_json(const RoundReport& r) {
    Json attempts = Json::array();
    for (const auto& a : r.attempts)
        attempts.push_back({{"representative", a.representative},
                            {"window_start_ms", a.window_start_ms},
                            {"window_end_ms", a.window_end_ms},
                            {"outcome", to_string(a.outcome)},
                            {"block_valid", a.block_valid},
                            {"approvals", a.approvals},
                            {"threshold", a.threshold},
                            {"approving_validators", a.approving_validators},
                            {"block_hash", a.block_hash ? Json(a.block_hash->hex()) : Json(nullptr)},
                            {"evidence", a.evidence}});
    return Json{{"round", r.round},
                {"status", to_string(r.status)},
                {"transactions", r.transactions},
                {"producer", r.producer ? Json(*r.producer) : Json(nullptr)},
                {"block_index", r.block_index ? Json(*r.block_index) : Json(nullptr)},
                {"end_time_ms", r.end_time_ms},
                {"attempts", std::move(attempts)}};
}

inline Json to_json(const SyncReport& r) {
    Json nodes = Json::array();
    for (const auto& e : r.nodes)
        nodes.push_back({{"node", e.node},
                         {"consistent", e.consistent},
                         {"max_amplitude_deviation",
                          std::isfinite(e.max_amplitude_deviation) ? Json(e.max_amplitude_deviation) : Json(nullptr)},
                         {"detail", e.detail}});
    return Json{{"status", to_string(r.status)}, {"divergent", r.divergent}, {"nodes", std::move(nodes)}};
}

inline Json to_json(const IncentiveLedger& l) {
    Json balances = Json::array();
    for (const auto& [id, b] : l.balances) balances.push_back({{"node", id}, {"balance", b}});
    Json excluded = Json::array();
    for (const auto& [id, why] : l.excluded) excluded.push_back({{"node", id}, {"reason", why}});
    return Json{{"balances", std::move(balances)}, {"excluded", std::move(excluded)}};
}

/// Public section omits privacy indices and pre-vote matrices; the audit
/// section carries them so the run can be replayed.
inline Json election_transcript(const ElectionResult& r) {
    Json voters = Json::array();
    for (std::size_t l = 0; l < r.voters.size(); ++l)
        voters.push_back({{"id", r.voters[l].id},
                          {"weight", r.voters[l].weight},
                          {"quantized_weight", r.voters[l].quantized_weight},
                          {"cast_total", r.cast_totals.at(l)},
                          {"inclusion_ok", r.inclusion.at(l)}});
    Json tallies = Json::array();
    Json audit_candidates = Json::array();
    for (const auto& c : r.candidates) {
        std::vector<std::vector<std::size_t>> published, initial;
        for (std::size_t g = 0; g < c.published.n; ++g) {
            published.emplace_back(c.published.entries.begin() + static_cast<std::ptrdiff_t>(g * c.published.n),
                                   c.published.entries.begin() + static_cast<std::ptrdiff_t>((g + 1) * c.published.n));
            initial.emplace_back(c.initial.entries.begin() + static_cast<std::ptrdiff_t>(g * c.initial.n),
                                 c.initial.entries.begin() + static_cast<std::ptrdiff_t>((g + 1) * c.initial.n));
        }
        Json entry{{"candidate", c.candidate}, {"label", c.label}, {"rows", c.tally.rows}, {"total", c.tally.total},
                   {"published_matrix", published}};
        entry["index_verification"] = c.index_verification ? to_json(*c.index_verification) : Json(nullptr);
        entry["ballot_verification"] = c.ballot_verification ? to_json(*c.ballot_verification) : Json(nullptr);
        tallies.push_back(std::move(entry));
        audit_candidates.push_back({{"candidate", c.candidate}, {"indices", c.indices}, {"initial_matrix", initial}});
    }
    Json rejections = Json::array();
    for (const auto& rej : r.rejections)
        rejections.push_back({{"voter", rej.voter},
                              {"candidate", rej.candidate},
                              {"attempted", rej.attempted},
                              {"allowed", rej.allowed},
                              {"reason", rej.reason}});
    Json channels = Json::array();
    for (const auto& c : r.channel_reports)
        channels.push_back({{"payload_count", c.payload_count},
                            {"decoy_count", c.decoys.size()},
                            {"failures", c.failures},
                            {"error_rate", c.error_rate}});
    return Json{{"public",
                 {{"status", to_string(r.status)},
                  {"abort_reason", r.abort_reason},
                  {"ballot_dim", r.ballot_dim},
                  {"voters", std::move(voters)},
                  {"tallies", std::move(tallies)},
                  {"elected", r.selection.ranked},
                  {"production_order", r.selection.production_order},
                  {"rejections", std::move(rejections)},
                  {"channels", std::move(channels)}}},
                {"audit", {{"candidates", std::move(audit_candidates)}}}};
}

}  // namespace qwchain
