// Acceptance run: one [PASS]/[FAIL] line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>

#include "oracles/dense_walk_oracle.hpp"
#include "qwchain/block_chain.hpp"
#include "qwchain/net_harness.hpp"
#include "qwchain/qdpos_voting.hpp"
#include "qwchain/qw_hash.hpp"
#include "qwchain/walk_engine.hpp"

namespace {

using namespace qwchain;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string Fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

using Column = std::optional<std::vector<std::size_t>>;

Outcome WorkedElection() {
    const std::vector<double> weights{0.3, 0.3, 0.2, 0.2};
    const auto q = quantize_weights(weights, 10);
    ElectionConfig cfg;
    cfg.weights = weights;
    cfg.candidates = {4, 5};
    cfg.ballot_dim = 4;
    cfg.votes = {{2, 1, 0, 1}, {1, 2, 2, 1}};
    cfg.fixed_indices = {{1, 2, 3, 0}, {3, 0, 1, 2}};
    cfg.fixed_matrices = {BallotMatrix::from_rows(4, 4, {{0, 2, 0, 2}, {3, 0, 2, 3}, {1, 3, 1, 3}, {2, 0, 2, 0}}),
                          BallotMatrix::from_rows(5, 4, {{1, 1, 1, 1}, {2, 3, 0, 3}, {1, 3, 2, 2}, {2, 3, 1, 2}})};
    Rng rng(1);
    const auto r = run_election(cfg, rng);
    const bool ok = q == std::vector<std::size_t>{3, 3, 2, 2} && r.status == error_code::ok &&
                    r.candidates[0].tally.rows == std::vector<std::size_t>{1, 2, 1, 0} &&
                    r.candidates[1].tally.rows == std::vector<std::size_t>{2, 2, 1, 1} &&
                    r.candidates[0].tally.total == 4 && r.candidates[1].tally.total == 6 &&
                    r.selection.ranked == std::vector<NodeId>{5};
    return {ok, Fmt("weights %zu,%zu,%zu,%zu; tallies C1=%zu C2=%zu; elected C%u", q[0], q[1], q[2], q[3],
                    r.candidates[0].tally.total, r.candidates[1].tally.total,
                    r.selection.ranked.empty() ? 0U : unsigned(r.selection.ranked[0] - 3))};
}

Outcome CatLaws() {
    Rng rng(2);
    const auto idx = prepare_cat_state({4, 4, {0, 3, 2, 1}, CatPhase::index, 0});
    const auto bal = prepare_cat_state({4, 4, {0, 0, 0, 0}, CatPhase::ballot, 4});
    const std::vector<std::size_t> all{0, 1, 2, 3};
    int distinct = 0, zero_sum = 0;
    for (int t = 0; t < 1000; ++t) {
        if (is_permutation_of_range(measure(idx, all, Basis::computational, rng).outcomes)) ++distinct;
        const auto f = measure(bal, all, Basis::fourier, rng).outcomes;
        if ((f[0] + f[1] + f[2] + f[3]) % 4 == 0) ++zero_sum;
    }
    return {distinct == 1000 && zero_sum == 1000, Fmt("distinct %d/1000, zero-sum %d/1000", distinct, zero_sum)};
}

Outcome RoundTrip() {
    WalkConfig cfg;
    double worst = 1.0;
    for (std::size_t x = 0; x < 16; ++x)
        for (std::size_t t = 1; t <= 32; ++t) {
            const auto start = initial_walk_state(cfg, x);
            worst = std::min(worst, fidelity(inverse_evolve(evolve(start, cfg, t), cfg, t), start));
        }
    return {worst >= 1.0 - 1e-9, Fmt("min fidelity 1 - %.3g over 512 cases", 1.0 - worst)};
}

Outcome OracleEquivalence() {
    WalkConfig cfg;
    double worst = 0.0;
    for (auto [x, t] : {std::pair<std::size_t, std::size_t>{6, 5}, {8, 4}}) {
        const auto p = walker_distribution(evolve(initial_walk_state(cfg, x), cfg, t));
        const auto q = oracle::position_distribution(16, x, 0, t);
        for (std::size_t i = 0; i < 16; ++i) worst = std::max(worst, std::abs(p[i] - q[i]));
    }
    return {worst <= 1e-9, Fmt("max |p - oracle| = %.3g", worst)};
}

Outcome TamperDetection() {
    ChainParams p;
    ChainStore store;
    for (std::size_t k = 0; k < 10; ++k) {
        std::vector<Transaction> txs;
        for (std::size_t i = 0; i < 3; ++i)
            txs.push_back({NodeId(i), NodeId(i + 1), 3 * k + i, std::int64_t(100 * k + i),
                           to_bytes("amount " + std::to_string(17 * k + i)), Bytes(8, std::uint8_t(k))});
        store.append_block(build_block(k, store.tip_hash(p), txs, 1000 * std::int64_t(k + 1), p), p);
    }
    if (store.size() != 10 || !verify_chain(store, p).accepted) return {false, "honest chain did not verify"};

    Rng rng(5);
    int linkage = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        ChainStore copy = store;
        const std::size_t k = rng.below(10);
        auto& tx = copy.mutable_at(k).body.transactions[rng.below(3)];
        const auto flip = static_cast<std::uint8_t>(1 + rng.below(255));
        const std::size_t field = rng.below(4);
        if (field == 0) tx.payload[rng.below(tx.payload.size())] ^= flip;
        else if (field == 1) tx.signature[rng.below(tx.signature.size())] ^= flip;
        else if (field == 2) tx.nonce ^= std::uint64_t(flip) << (8 * rng.below(8));
        else tx.receiver ^= NodeId(flip) << (8 * rng.below(4));
        const auto r = verify_chain(copy, p);
        if (!r.accepted && !r.reports[k].linkage_ok) ++linkage;
    }

    int internal = 0;
    const Block honest = store.at(3);
    for (int t = 0; t < trials; ++t) {
        Block b = honest;
        for (auto& s : b.body.final_states) s = random_state(s.layout(), rng);
        if (!validate_block(b, store.at(2).header.own_hash, p, ValidationMode::sampled, rng).internal_ok) ++internal;
    }
    const double expected = 1.0 - std::pow(1.0 / 16, 2);
    const double rate = double(internal) / trials;
    const double sigma = std::sqrt(expected * (1 - expected) / trials);
    const bool ok = linkage == trials && rate >= 0.99 * expected && std::abs(rate - expected) <= 3 * sigma;
    return {ok, Fmt("linkage %d/%d; internal %.4f (expected %.4f, 3 sigma %.4f)", linkage, trials, rate, expected,
                    3 * sigma)};
}

Outcome DecoyRate() {
    QuantumChannel ch;
    ch.decoy_count = 100;
    ch.adversary.kind = AdversaryKind::intercept_resend;
    Rng rng(6);
    std::size_t failed = 0, total = 0;
    while (total < 10000) {
        std::vector<StateVector> payload(4, StateVector::basis(SubsystemLayout({4}), {1}));
        const auto r = transmit_with_decoys_unchecked(ch, std::move(payload), rng).report;
        failed += r.failures;
        total += r.decoys.size();
    }
    const double rate = double(failed) / double(total);
    return {std::abs(rate - 0.375) <= 0.02, Fmt("%zu/%zu decoys failed = %.4f (target 0.375 +/- 0.02)", failed, total, rate)};
}

Outcome RowSumLaw() {
    Rng rng(7);
    int ok = 0;
    for (int t = 0; t < 1000; ++t)
        if (rows_sum_to_zero(build_ballot_box(1, 4, 8, 8, ProtocolOptions{}, rng).matrix)) ++ok;
    return {ok == 1000, Fmt("%d/1000 boxes satisfy the row-sum law", ok)};
}

Outcome ExhaustiveTally() {
    const auto m = BallotMatrix::from_rows(1, 4, {{0, 2, 0, 2}, {3, 0, 2, 3}, {1, 3, 1, 3}, {2, 0, 2, 0}});
    std::vector<std::size_t> perm{0, 1, 2, 3};
    std::size_t cases = 0, good = 0;
    do {
        for (std::size_t code = 0; code < 256; ++code) {
            const std::size_t votes[4] = {code & 3, (code >> 2) & 3, (code >> 4) & 3, (code >> 6) & 3};
            std::vector<Column> cols;
            for (std::size_t l = 0; l < 4; ++l) cols.emplace_back(cast_vote(m.column(l), perm[l], votes[l], 4, 3));
            const auto t = tally(1, cols, 4);
            bool all = true;
            for (std::size_t l = 0; l < 4; ++l) all = all && t.rows[perm[l]] == votes[l];
            ++cases;
            if (all) ++good;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return {good == cases, Fmt("%zu/%zu vote vectors x index permutations", good, cases)};
}

Outcome Avalanche() {
    Rng rng(9);
    double total = 0.0;
    for (int t = 0; t < 200; ++t) {
        Bytes msg(32);
        for (auto& b : msg) b = std::uint8_t(rng.below(256));
        const auto a = hash(msg);
        const std::size_t bit = rng.below(256);
        msg[bit / 8] ^= std::uint8_t(0x80U >> (bit % 8));
        const auto b = hash(msg);
        std::size_t diff = 0;
        for (std::size_t i = 0; i < a.size(); ++i) diff += std::popcount(unsigned(a.bytes[i] ^ b.bytes[i]));
        total += double(diff) / double(8 * a.size());
    }
    const double mean = total / 200;
    std::set<std::string> seen;
    std::size_t collisions = 0;
    for (int t = 0; t < 10000; ++t) {
        Bytes msg(32);
        for (auto& b : msg) b = std::uint8_t(rng.below(256));
        if (!seen.insert(hash(msg).hex()).second) ++collisions;
    }
    return {mean >= 0.35 && mean <= 0.65 && collisions == 0,
            Fmt("mean flipped fraction %.4f; %zu collisions in 10000", mean, collisions)};
}

Outcome QuorumBoundary() {
    ChainParams p;
    RoundConfig cfg;
    cfg.validators = {10, 11, 12, 13};
    cfg.representatives = {0};
    std::vector<Transaction> pool{{1, 2, 0, 0, to_bytes("q"), {}}};
    Rng rng(10);
    auto run = [&](std::set<NodeId> dissent) {
        ChainStore chain;
        RoundEnvironment env;
        env.dissenting = std::move(dissent);
        return run_production_round(0, cfg, pool, chain, p, env, rng);
    };
    const auto three = run({13});
    const auto two = run({12, 13});
    const bool ok = three.attempts[0].approvals == 3 && three.status == error_code::ok &&
                    two.attempts[0].approvals == 2 && two.status == error_code::round_failed;
    return {ok, Fmt("3 approvals -> %s, 2 approvals -> %s (threshold %zu)", to_string(three.attempts[0].outcome),
                    to_string(two.attempts[0].outcome), three.attempts[0].threshold)};
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const Criterion criteria[] = {
        {1, "Worked election example", 1, WorkedElection},
        {2, "Cat-state measurement laws", 5, CatLaws},
        {3, "Walk round-trip", 10, RoundTrip},
        {4, "Oracle equivalence", 5, OracleEquivalence},
        {5, "Tamper detection", 60, TamperDetection},
        {6, "Decoy detection rate", 30, DecoyRate},
        {7, "Ballot row-sum law", 10, RowSumLaw},
        {8, "Exhaustive tally correctness", 30, ExhaustiveTally},
        {9, "QW-hash avalanche and collisions", 120, Avalanche},
        {10, "Quorum boundary", 1, QuorumBoundary},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool pass = o.pass && secs < c.budget_s;
        if (!pass) ++failures;
        std::printf("[%s] %2d. %s: %s (%.2fs, limit %.0fs)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                    secs, c.budget_s);
    }
    std::printf("%d/10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
