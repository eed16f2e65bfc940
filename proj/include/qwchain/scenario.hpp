// scenario.hpp
// Scenario files and the end-to-end pipeline behind `qwc election` and
// `qwc simulate`.
//
// Format: one `key = value` per line, `#` starts a comment, blank lines are
// ignored. Lists are comma separated; per-candidate lists are separated by
// `/` and matrix rows by `;`. Unknown keys are errors.
//
// Node ids: voters 0..n-1, candidates n..n+m-1 (labelled C1..Cm), validators
// after the candidates. Every node is a full node.

#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qwchain/block_chain.hpp"
#include "qwchain/chain_io.hpp"
#include "qwchain/net_harness.hpp"
#include "qwchain/qdpos_voting.hpp"
#include "qwchain/signature.hpp"

namespace qwchain {

struct Scenario {
    std::uint64_t seed = 1;
    std::size_t voters = 4;
    std::vector<double> weights;  // empty: equal weights
    std::size_t total_votes = 10;
    std::size_t ballot_dim = 0;
    std::size_t candidates = 2;
    std::size_t representatives = 1;
    std::vector<std::vector<std::size_t>> votes;  // empty: voter l gives its full weight to candidate l mod m
    std::vector<std::vector<std::size_t>> indices;
    std::vector<std::vector<std::vector<std::size_t>>> matrices;
    std::size_t delta = 3;
    std::size_t validators = 4;
    double quorum = 2.0 / 3.0;
    std::int64_t block_interval_ms = 1000;
    std::size_t rounds = 3;
    std::size_t transactions_per_round = 4;
    std::size_t n_walkers = 2;
    std::size_t position_dim = 16;
    std::size_t step_bound = 16;
    std::size_t hash_cycle = 8;
    double decoy_rate = 0.5;
    double error_threshold = 0.05;
    AdversaryKind adversary = AdversaryKind::none;
    NodeId adversary_node = 0;
    Forgery forgery = Forgery::over_weight;
    std::set<NodeId> idle;
    std::int64_t reward_producer = 10;
    std::int64_t reward_validator = 1;
    std::size_t idle_threshold = 2;

    NodeId candidate_id(std::size_t k) const { return static_cast<NodeId>(voters + k); }
    NodeId validator_id(std::size_t v) const { return static_cast<NodeId>(voters + candidates + v); }

    ChainParams chain_params() const {
        ChainParams p;
        p.n_walkers = n_walkers;
        p.walk.position_dim = position_dim;
        p.step_bound = step_bound;
        p.hash.cycle_size = hash_cycle;
        p.validate();
        return p;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto res = std::from_chars(first, last, value);
    if (text.empty() || res.ec != std::errc{} || res.ptr != last)
        fail(error_code::config_error, "bad value for '" + key + "': '" + text + "'");
    return value;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
    std::vector<T> out;
    for (const auto& item : split(text, ',')) out.push_back(parse_number<T>(key, item));
    return out;
}

/// "a,b / c,d" -> {{a,b},{c,d}}
inline std::vector<std::vector<std::size_t>> parse_groups(const std::string& key, const std::string& text) {
    std::vector<std::vector<std::size_t>> out;
    for (const auto& group : split(text, '/')) out.push_back(parse_list<std::size_t>(key, group));
    return out;
}

inline double parse_fraction(const std::string& key, const std::string& text) {
    const auto slash = text.find('/');
    if (slash == std::string::npos) return parse_number<double>(key, text);
    const double num = parse_number<double>(key, trim(text.substr(0, slash)));
    const double den = parse_number<double>(key, trim(text.substr(slash + 1)));
    if (den == 0.0) fail(error_code::config_error, "zero denominator in '" + key + "'");
    return num / den;
}

}  // namespace detail

/// Throws ConfigError with the offending line number on any problem.
inline Scenario parse_scenario(std::string_view text) {
    Scenario s;
    std::set<std::string> seen;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = detail::trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(error_code::config_error, "line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (!seen.insert(key).second)
            fail(error_code::config_error, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        try {
            using detail::parse_number;
            if (key == "seed") s.seed = parse_number<std::uint64_t>(key, value);
            else if (key == "voters") s.voters = parse_number<std::size_t>(key, value);
            else if (key == "weights") s.weights = detail::parse_list<double>(key, value);
            else if (key == "total_votes") s.total_votes = parse_number<std::size_t>(key, value);
            else if (key == "ballot_dim") s.ballot_dim = parse_number<std::size_t>(key, value);
            else if (key == "candidates") s.candidates = parse_number<std::size_t>(key, value);
            else if (key == "representatives") s.representatives = parse_number<std::size_t>(key, value);
            else if (key == "votes") s.votes = detail::parse_groups(key, value);
            else if (key == "indices") s.indices = detail::parse_groups(key, value);
            else if (key == "matrices") {
                for (const auto& cand : detail::split(value, '/')) {
                    std::vector<std::vector<std::size_t>> rows;
                    for (const auto& row : detail::split(cand, ';')) rows.push_back(detail::parse_list<std::size_t>(key, row));
                    s.matrices.push_back(std::move(rows));
                }
            }
            else if (key == "delta") s.delta = parse_number<std::size_t>(key, value);
            else if (key == "validators") s.validators = parse_number<std::size_t>(key, value);
            else if (key == "quorum") s.quorum = detail::parse_fraction(key, value);
            else if (key == "block_interval_ms") s.block_interval_ms = parse_number<std::int64_t>(key, value);
            else if (key == "rounds") s.rounds = parse_number<std::size_t>(key, value);
            else if (key == "transactions_per_round") s.transactions_per_round = parse_number<std::size_t>(key, value);
            else if (key == "n_walkers") s.n_walkers = parse_number<std::size_t>(key, value);
            else if (key == "position_dim") s.position_dim = parse_number<std::size_t>(key, value);
            else if (key == "step_bound") s.step_bound = parse_number<std::size_t>(key, value);
            else if (key == "hash_cycle") s.hash_cycle = parse_number<std::size_t>(key, value);
            else if (key == "decoy_rate") s.decoy_rate = parse_number<double>(key, value);
            else if (key == "error_threshold") s.error_threshold = parse_number<double>(key, value);
            else if (key == "adversary") {
                const auto kind = adversary_from_string(value);
                if (!kind) fail(error_code::config_error, "unknown adversary '" + value + "'");
                s.adversary = *kind;
            }
            else if (key == "adversary_node") s.adversary_node = parse_number<NodeId>(key, value);
            else if (key == "forgery") {
                if (value == "over_weight") s.forgery = Forgery::over_weight;
                else if (value == "column_tamper") s.forgery = Forgery::column_tamper;
                else fail(error_code::config_error, "unknown forgery '" + value + "'");
            }
            else if (key == "idle") {
                for (auto id : detail::parse_list<NodeId>(key, value)) s.idle.insert(id);
            }
            else if (key == "reward_producer") s.reward_producer = parse_number<std::int64_t>(key, value);
            else if (key == "reward_validator") s.reward_validator = parse_number<std::int64_t>(key, value);
            else if (key == "idle_threshold") s.idle_threshold = parse_number<std::size_t>(key, value);
            else fail(error_code::config_error, "unknown key '" + key + "'");
        } catch (const Error& e) {
            fail(error_code::config_error, "line " + std::to_string(line_no) + ": " + e.what());
        }
    }

    auto bad = [](const std::string& why) { fail(error_code::config_error, why); };
    if (s.voters < 2) bad("voters must be >= 2");
    if (s.weights.empty()) s.weights.assign(s.voters, 1.0);
    if (s.weights.size() != s.voters) bad("weights must list one value per voter");
    if (s.candidates < 1) bad("candidates must be >= 1");
    if (s.representatives < 1 || s.representatives > s.candidates) bad("representatives must lie in [1, candidates]");
    if (!s.votes.empty() && s.votes.size() != s.candidates) bad("votes must list one group per candidate");
    for (const auto& v : s.votes)
        if (v.size() != s.voters) bad("each vote group needs one value per voter");
    if (!s.indices.empty() && s.indices.size() != s.candidates) bad("indices must list one group per candidate");
    if (!s.matrices.empty() && s.matrices.size() != s.candidates) bad("matrices must list one matrix per candidate");
    if (s.matrices.empty() && s.ballot_dim != 0 && s.ballot_dim < s.total_votes)
        bad("ballot_dim must be >= total_votes unless matrices are fixed");
    if (!s.matrices.empty() && s.ballot_dim == 0) bad("fixed matrices need an explicit ballot_dim");
    if (s.validators < 1) bad("validators must be >= 1");
    if (!(s.quorum > 0.5 && s.quorum <= 1.0)) bad("quorum must lie in (1/2, 1]");
    if (s.block_interval_ms <= 0) bad("block_interval_ms must be positive");
    if (!(s.decoy_rate > 0.0 && s.decoy_rate < 1.0)) bad("decoy_rate must lie in (0, 1)");
    if (s.idle_threshold < 1) bad("idle_threshold must be >= 1");
    // n particles of dimension d must fit the simulator's amplitude cap
    auto fits = [](std::size_t d, std::size_t n) {
        std::size_t total = 1;
        for (std::size_t i = 0; i < n; ++i) {
            if (total > default_dimension_cap / d) return false;
            total *= d;
        }
        return true;
    };
    if (s.validators >= 2 && !fits(s.validators + 1, s.validators))
        bad("validators: approval aggregation over " + std::to_string(s.validators) +
            " validators exceeds the state-vector cap (at most 6)");
    if (s.indices.empty() && !fits(s.voters, s.voters))
        bad("voters: index distribution over " + std::to_string(s.voters) + " voters exceeds the state-vector cap");
    const std::size_t ballot_d = s.ballot_dim != 0 ? s.ballot_dim : default_ballot_dim(s.total_votes);
    if (s.matrices.empty() && !fits(ballot_d, s.voters))
        bad("voters: ballot box of dimension " + std::to_string(ballot_d) + " over " + std::to_string(s.voters) +
            " voters exceeds the state-vector cap");
    try {
        (void)s.chain_params();
    } catch (const Error& e) {
        bad(e.what());
    }
    return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(error_code::store_error, "cannot open scenario " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str());
}

inline ElectionConfig election_config(const Scenario& s) {
    ElectionConfig c;
    c.weights = s.weights;
    for (std::size_t k = 0; k < s.candidates; ++k) {
        c.candidates.push_back(s.candidate_id(k));
        c.candidate_labels.push_back("C" + std::to_string(k + 1));
    }
    c.total_votes = s.total_votes;
    c.ballot_dim = s.ballot_dim;
    c.representatives = s.representatives;
    c.delta = s.delta;
    c.channel.decoy_rate = s.decoy_rate;
    c.channel.error_threshold = s.error_threshold;
    c.adversary = {s.adversary, s.adversary_node, s.forgery};
    c.fixed_indices = s.indices;
    const std::size_t d = s.ballot_dim != 0 ? s.ballot_dim : default_ballot_dim(s.total_votes);
    for (std::size_t k = 0; k < s.matrices.size(); ++k)
        c.fixed_matrices.push_back(BallotMatrix::from_rows(s.candidate_id(k), d, s.matrices[k]));
    if (!s.votes.empty()) {
        c.votes = s.votes;
    } else {
        const auto quantized = quantize_weights(s.weights, s.total_votes);
        c.votes.assign(s.candidates, std::vector<std::size_t>(s.voters, 0));
        for (std::size_t l = 0; l < s.voters; ++l) c.votes[l % s.candidates][l] = quantized[l];
    }
    return c;
}

/// Process-style exit status shared by the CLI and the pipeline.
enum class RunStatus { ok = 0, rejected = 1, usage = 2, missing_input = 3, aborted = 4 };

struct SimulationOutput {
    RunStatus status = RunStatus::ok;
    std::string reason;
    Json election;
    Json transactions = Json::array();
    Json rounds = Json::array();
    Json sync = Json::array();
    Json incentives;
    ChainStore chain;
    ChainParams params;
    Json summary;
};

namespace detail {

inline RunStatus status_for(const Error& e) {
    switch (e.code()) {
        case error_code::protocol_abort:
        case error_code::channel_compromised: return RunStatus::aborted;
        case error_code::config_error:
        case error_code::invalid_spec:
        case error_code::invalid_count:
        case error_code::invalid_weight: return RunStatus::usage;
        default: return RunStatus::rejected;
    }
}

}  // namespace detail

/// Election only.
inline SimulationOutput run_election_scenario(const Scenario& s) {
    SimulationOutput out;
    Rng master(s.seed);
    Rng rng = master.split(1);
    try {
        const ElectionResult er = run_election(election_config(s), rng);
        out.election = election_transcript(er);
        if (er.status != error_code::ok) {
            out.status = RunStatus::aborted;
            out.reason = std::string(to_string(er.status)) + ": " + er.abort_reason;
        }
    } catch (const Error& e) {
        out.election = Json{{"public", {{"status", to_string(e.code())}, {"abort_reason", e.what()}}}};
        out.status = detail::status_for(e);
        out.reason = e.what();
    }
    out.summary = Json{{"status", static_cast<int>(out.status)}, {"reason", out.reason}, {"seed", s.seed}};
    return out;
}

/// Sign and admit transactions, elect representatives, run production
/// rounds with incentives, and synchronise every full node after each block.
inline SimulationOutput run_simulation(const Scenario& s) {
    SimulationOutput out;
    out.params = s.chain_params();
    Rng master(s.seed);
    Rng election_rng = master.split(1);
    Rng tx_rng = master.split(2);
    Rng round_rng = master.split(3);

    // nodes and keys
    std::vector<Node> nodes;
    const std::size_t total_nodes = s.voters + s.candidates + s.validators;
    const std::size_t senders = s.voters;
    const std::size_t budget = std::max<std::size_t>(
        16, (s.rounds * s.transactions_per_round + senders - 1) / senders + 2);
    SignatureParams sig_params;
    sig_params.key_budget = budget;
    TransactionGate gate(sig_params);
    for (std::size_t i = 0; i < total_nodes; ++i) {
        Node node;
        node.id = static_cast<NodeId>(i);
        node.roles = role_bit(Role::full_node);
        if (i < s.voters) {
            node.label = "V" + std::to_string(i);
            node.stake_weight = s.weights[i];
            node.roles |= role_bit(Role::voter);
            node.keys = std::make_shared<Keypair>(node.id, master.next(), sig_params);
            gate.register_key(node.keys->public_key());
        } else if (i < s.voters + s.candidates) {
            node.label = "C" + std::to_string(i - s.voters + 1);
            node.roles |= role_bit(Role::candidate);
        } else {
            node.label = "Val" + std::to_string(i - s.voters - s.candidates + 1);
            node.roles |= role_bit(Role::validator);
        }
        node.local_tip = out.params.genesis_prev_hash();
        nodes.push_back(std::move(node));
    }

    auto finish = [&](RunStatus status, std::string reason) {
        out.status = status;
        out.reason = std::move(reason);
        out.summary = Json{{"status", static_cast<int>(out.status)},
                           {"reason", out.reason},
                           {"seed", s.seed},
                           {"chain_length", out.chain.size()},
                           {"tip_hash", out.chain.tip_hash(out.params).hex()}};
        return out;
    };

    // election
    ElectionResult er;
    try {
        er = run_election(election_config(s), election_rng);
    } catch (const Error& e) {
        out.election = Json{{"public", {{"status", to_string(e.code())}, {"abort_reason", e.what()}}}};
        return finish(detail::status_for(e), e.what());
    }
    out.election = election_transcript(er);
    if (er.status != error_code::ok)
        return finish(RunStatus::aborted, std::string(to_string(er.status)) + ": " + er.abort_reason);
    for (NodeId rep : er.selection.ranked) nodes.at(rep).roles |= role_bit(Role::representative);

    // transactions per round, signed by voters in rotation
    std::vector<std::uint64_t> next_nonce(senders, 0);
    std::vector<std::vector<Transaction>> mempools(s.rounds);
    std::int64_t clock = 0;
    for (std::size_t r = 0; r < s.rounds; ++r) {
        for (std::size_t t = 0; t < s.transactions_per_round; ++t) {
            const std::size_t from = (r * s.transactions_per_round + t) % senders;
            const auto to = static_cast<NodeId>(tx_rng.below(total_nodes));
            Bytes payload(8);
            for (auto& b : payload) b = static_cast<std::uint8_t>(tx_rng.below(256));
            Transaction tx = sign_transaction(*nodes[from].keys, to, next_nonce[from]++,
                                              clock + static_cast<std::int64_t>(t), std::move(payload));
            const Admission a = gate.admit(tx);
            out.transactions.push_back({{"round", r}, {"sender", tx.sender}, {"nonce", tx.nonce},
                                        {"admission", to_string(a)}});
            if (a == Admission::accepted) mempools[r].push_back(std::move(tx));
        }
        if (r == 0 && !mempools[0].empty()) {
            const Admission replay = gate.admit(mempools[0].front());
            out.transactions.push_back({{"round", r}, {"sender", mempools[0].front().sender},
                                        {"nonce", mempools[0].front().nonce}, {"admission", to_string(replay)},
                                        {"note", "replayed transaction"}});
        }
        clock += s.block_interval_ms;
    }

    // production rounds
    RoundConfig rc;
    rc.block_interval_ms = s.block_interval_ms;
    rc.quorum = s.quorum;
    rc.delta = s.delta;
    for (std::size_t v = 0; v < s.validators; ++v) rc.validators.push_back(s.validator_id(v));
    RoundEnvironment env;
    env.adversary = {s.adversary, s.adversary_node, s.forgery};
    env.idle = s.idle;
    IncentiveLedger ledger;
    for (const auto& n : nodes) ledger.balances[n.id] = 0;
    const IncentiveParams incentives{s.reward_producer, s.reward_validator, s.idle_threshold};

    const auto& order = er.selection.production_order;
    bool any_failed = false;
    bool any_mismatch = false;
    std::vector<Transaction> carry;
    std::int64_t round_start = 0;
    for (std::size_t r = 0; r < s.rounds; ++r) {
        rc.representatives.clear();
        for (std::size_t i = 0; i < order.size(); ++i) rc.representatives.push_back(order[(r + i) % order.size()]);
        rc.start_time_ms = round_start;
        std::vector<Transaction> pool = std::move(carry);
        carry.clear();
        pool.insert(pool.end(), mempools[r].begin(), mempools[r].end());
        const RoundReport report = run_production_round(r, rc, pool, out.chain, out.params, env, round_rng);
        round_start = report.end_time_ms;
        apply_incentives(report, ledger, incentives);
        out.rounds.push_back(to_json(report));
        if (report.status != error_code::ok) {
            any_failed = true;
            carry = std::move(pool);  // retried next round
            continue;
        }
        const Block& block = out.chain.at(*report.block_index);
        const SyncReport sync = finalize_and_sync(block, nodes, out.params);
        Json entry = to_json(sync);
        entry["block_index"] = block.header.index;
        out.sync.push_back(std::move(entry));
        if (sync.status != error_code::ok) any_mismatch = true;
        for (auto& n : nodes)
            if (std::find(sync.divergent.begin(), sync.divergent.end(), n.id) == sync.divergent.end())
                n.local_tip = block.header.own_hash;
    }

    std::vector<NodeId> candidates;
    for (std::size_t k = 0; k < s.candidates; ++k) candidates.push_back(s.candidate_id(k));
    out.incentives = to_json(ledger);
    out.incentives["next_election_candidates"] = eligible_candidates(candidates, ledger);

    if (any_mismatch) return finish(RunStatus::rejected, "SyncMismatch: full nodes diverged");
    if (any_failed) return finish(RunStatus::rejected, "RoundFailed: no representative produced an accepted block");
    return finish(RunStatus::ok, "");
}

/// Writes every artifact of a run into `dir`.
inline void write_simulation(const std::filesystem::path& dir, const SimulationOutput& out, bool full) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(error_code::store_error, "cannot create " + dir.string() + ": " + ec.message());
    write_json_file(dir / "election.json", out.election);
    write_json_file(dir / "summary.json", out.summary);
    if (!full) return;
    write_json_file(dir / "transactions.json", out.transactions);
    write_json_file(dir / "rounds.json", out.rounds);
    write_json_file(dir / "sync.json", out.sync);
    write_json_file(dir / "incentives.json", out.incentives.is_null() ? Json::object() : out.incentives);
    save_chain(dir / "chain", out.chain, out.params);
}

}  // namespace qwchain
