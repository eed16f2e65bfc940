// qwc: command-line front end for the qwchain library.
// Exit status: 0 ok, 1 rejected, 2 usage or config, 3 missing or corrupt input, 4 protocol abort.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qwchain/block_chain.hpp"
#include "qwchain/chain_io.hpp"
#include "qwchain/net_harness.hpp"
#include "qwchain/qw_hash.hpp"
#include "qwchain/scenario.hpp"
#include "qwchain/signature.hpp"
#include "qwchain/walk_engine.hpp"

namespace fs = std::filesystem;
using qwchain::error_code;
using qwchain::Json;

namespace {

constexpr int kOk = 0;
constexpr int kRejected = 1;
constexpr int kUsage = 2;
constexpr int kMissing = 3;
constexpr int kAborted = 4;

int exit_code_for(const qwchain::Error& e) {
    switch (e.code()) {
        case error_code::store_error:
        case error_code::malformed: return kMissing;
        case error_code::config_error:
        case error_code::invalid_spec:
        case error_code::invalid_count:
        case error_code::invalid_weight:
        case error_code::invalid_dimension:
        case error_code::invalid_index:
        case error_code::empty_message: return kUsage;
        case error_code::protocol_abort:
        case error_code::channel_compromised: return kAborted;
        default: return kRejected;
    }
}

void emit(const Json& j, const std::string& out) {
    if (out.empty()) {
        std::cout << j.dump(2) << '\n';
        return;
    }
    const fs::path path(out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    qwchain::write_json_file(path, j);
}

qwchain::Bytes read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) qwchain::fail(error_code::store_error, "cannot open " + path.string());
    return qwchain::Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// `base` itself under --seed, otherwise base/run-<UTC timestamp>.
fs::path run_directory(const fs::path& base, bool seeded) {
    if (seeded) return base;
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char stamp[64];
    std::snprintf(stamp, sizeof stamp, "run-%04d%02d%02dT%02d%02d%02d.%03lldZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<long long>(ms));
    return base / stamp;
}

// ---------------------------------------------------------------- hash

struct HashArgs {
    std::string input, text, hex, out;
    std::size_t cycle = 8;
    std::size_t bits = 0;
};

int cmd_hash(const HashArgs& a) {
    qwchain::Bytes msg;
    if (!a.input.empty()) msg = read_file(a.input);
    else if (!a.hex.empty()) msg = qwchain::from_hex(a.hex);
    else msg = qwchain::to_bytes(a.text);
    qwchain::HashParams p;
    p.cycle_size = a.cycle;
    const qwchain::Digest d = qwchain::hash(msg, p);
    const std::string hex = a.bits == 0 ? d.hex() : qwchain::to_hex(qwchain::stretch_digest(d, a.bits, p));
    std::cout << hex << '\n';
    if (!a.out.empty())
        emit(Json{{"cycle_size", p.cycle_size},
                  {"message_bytes", msg.size()},
                  {"steps", qwchain::hash_step_count(msg.size() * 8, p)},
                  {"bits", a.bits == 0 ? 8 * d.size() : a.bits},
                  {"digest", hex}},
             a.out);
    return kOk;
}

// ---------------------------------------------------------------- walk

struct WalkArgs {
    std::size_t dim = 16, start = 0, steps = 0, coin_state = 0;
    std::vector<double> coin{0.0, std::numbers::pi / 4.0, 0.0};
    std::string out, gnuplot;
};

int cmd_walk(const WalkArgs& a) {
    qwchain::WalkConfig cfg;
    cfg.position_dim = a.dim;
    cfg.coin = {a.coin[0], a.coin[1], a.coin[2]};
    if (a.start >= a.dim) qwchain::fail(error_code::invalid_index, "--start must lie in [0, --dim)");
    if (a.coin_state > 1) qwchain::fail(error_code::invalid_index, "--coin-state must be 0 or 1");
    const auto psi0 = qwchain::initial_walk_state(cfg, a.start, a.coin_state);
    const auto initial = qwchain::walker_distribution(psi0);
    const auto final_ = qwchain::walker_distribution(qwchain::evolve(psi0, cfg, a.steps));
    std::vector<std::size_t> labels(a.dim);
    for (std::size_t x = 0; x < a.dim; ++x) labels[x] = x;
    emit(Json{{"labels", labels},
              {"initial", initial},
              {"final", final_},
              {"metadata",
               {{"dim", a.dim},
                {"start", a.start},
                {"coin_state", a.coin_state},
                {"steps", a.steps},
                {"coin", {{"xi", a.coin[0]}, {"theta", a.coin[1]}, {"eta", a.coin[2]}}}}}},
         a.out);
    if (!a.gnuplot.empty()) {
        std::ofstream g(a.gnuplot, std::ios::binary | std::ios::trunc);
        if (!g) qwchain::fail(error_code::store_error, "cannot write " + a.gnuplot);
        g << "# position initial final\n";
        char line[96];
        for (std::size_t x = 0; x < a.dim; ++x) {
            std::snprintf(line, sizeof line, "%zu %.12f %.12f\n", x, initial[x], final_[x]);
            g << line;
        }
    }
    return kOk;
}

// ---------------------------------------------------------------- chain-build

struct BuildArgs {
    std::size_t blocks = 10, txs = 3, walkers = 2, dim = 16, step_bound = 16, cycle = 8, senders = 4;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_chain_build(const BuildArgs& a) {
    qwchain::ChainParams params;
    params.n_walkers = a.walkers;
    params.walk.position_dim = a.dim;
    params.step_bound = a.step_bound;
    params.hash.cycle_size = a.cycle;
    params.validate();
    if (a.blocks < 1 || a.txs < 1 || a.senders < 1)
        qwchain::fail(error_code::config_error, "--blocks, --txs and --senders must be positive");

    qwchain::Rng master(a.seed);
    qwchain::SignatureParams sig;
    sig.key_budget = (a.blocks * a.txs + a.senders - 1) / a.senders;
    std::vector<qwchain::Keypair> keys;
    std::vector<std::uint64_t> nonces(a.senders, 0);
    for (std::size_t s = 0; s < a.senders; ++s)
        keys.emplace_back(static_cast<qwchain::NodeId>(s), master.split(100 + s).next(), sig);

    qwchain::Rng rng = master.split(1);
    qwchain::ChainStore store;
    constexpr std::int64_t kEpochMs = 1'700'000'000'000;
    std::size_t tx_count = 0;
    for (std::size_t k = 0; k < a.blocks; ++k) {
        std::vector<qwchain::Transaction> txs;
        for (std::size_t i = 0; i < a.txs; ++i, ++tx_count) {
            const std::size_t s = tx_count % a.senders;
            const auto receiver = static_cast<qwchain::NodeId>((s + 1 + rng.below(a.senders)) % (a.senders + 1));
            const std::string payload = "transfer " + std::to_string(1 + rng.below(1000));
            txs.push_back(qwchain::sign_transaction(keys[s], receiver, nonces[s]++,
                                                    kEpochMs + std::int64_t(k) * 1000 + std::int64_t(i),
                                                    qwchain::to_bytes(payload)));
        }
        const auto block =
            qwchain::build_block(k, store.tip_hash(params), txs, kEpochMs + std::int64_t(k + 1) * 1000, params);
        if (!store.append_block(block, params).accepted)
            qwchain::fail(error_code::malformed, "freshly built block " + std::to_string(k) + " was rejected");
    }
    qwchain::save_chain(a.out, store, params);
    std::cout << Json{{"blocks", store.size()}, {"tip_hash", store.tip_hash(params).hex()}, {"dir", a.out}}.dump()
              << '\n';
    return kOk;
}

// ---------------------------------------------------------------- chain-verify

struct VerifyArgs {
    std::string chain, report;
    bool sampled = false;
    std::uint64_t seed = 0;
};

int cmd_chain_verify(const VerifyArgs& a) {
    const auto loaded = qwchain::load_chain(a.chain);
    const auto mode = a.sampled ? qwchain::ValidationMode::sampled : qwchain::ValidationMode::exact;
    const auto report = qwchain::verify_chain(loaded.store, loaded.params, mode, a.seed);
    Json j = qwchain::to_json(report);
    j["mode"] = a.sampled ? "sampled" : "exact";
    j["length"] = loaded.store.size();
    if (!a.report.empty()) emit(j, a.report);
    std::cout << Json{{"accepted", report.accepted},
                      {"length", loaded.store.size()},
                      {"failing_blocks", report.failing_blocks}}
                     .dump()
              << '\n';
    return report.accepted ? kOk : kRejected;
}

// ---------------------------------------------------------------- tamper-experiment

struct TamperArgs {
    std::string chain, mutation = "transaction-byte", out;
    std::size_t block = 0, trials = 1000;
    std::uint64_t seed = 0;
    bool sampled = false;
};

int cmd_tamper(const TamperArgs& a) {
    const auto loaded = qwchain::load_chain(a.chain);
    const auto& store = loaded.store;
    const auto& params = loaded.params;
    if (a.block >= store.size())
        qwchain::fail(error_code::store_error, "block " + std::to_string(a.block) + " beyond chain length " +
                                                   std::to_string(store.size()));
    if (a.trials < 1) qwchain::fail(error_code::config_error, "--trials must be positive");
    const qwchain::Digest prev = a.block == 0 ? params.genesis_prev_hash() : store.at(a.block - 1).header.own_hash;
    const auto mode = a.sampled ? qwchain::ValidationMode::sampled : qwchain::ValidationMode::exact;

    qwchain::Rng rng(a.seed);
    std::size_t rejected = 0, internal = 0, linkage = 0;
    for (std::size_t t = 0; t < a.trials; ++t) {
        qwchain::Block b = store.at(a.block);
        if (a.mutation == "transaction-byte") {
            auto& tx = b.body.transactions[rng.below(b.body.transactions.size())];
            if (tx.payload.empty()) tx.payload.push_back(0);
            tx.payload[rng.below(tx.payload.size())] ^= static_cast<std::uint8_t>(1 + rng.below(255));
        } else {
            qwchain::detail::tamper_block(b, qwchain::AdversaryKind::state_substitution, rng);
        }
        const auto r = qwchain::validate_block(b, prev, params, mode, rng);
        rejected += r.accepted ? 0 : 1;
        internal += r.internal_ok ? 0 : 1;
        linkage += r.linkage_ok ? 0 : 1;
    }
    const double n = static_cast<double>(a.trials);
    emit(Json{{"mutation", a.mutation},
              {"block", a.block},
              {"trials", a.trials},
              {"mode", a.sampled ? "sampled" : "exact"},
              {"seed", a.seed},
              {"rejected", rejected},
              {"internal_detected", internal},
              {"linkage_detected", linkage},
              {"detection_rate", double(rejected) / n},
              {"internal_rate", double(internal) / n},
              {"linkage_rate", double(linkage) / n}},
         a.out);
    return kOk;
}

// ---------------------------------------------------------------- election / simulate

struct RunArgs {
    std::string config, out = "runs";
    std::optional<std::uint64_t> seed;
};

int cmd_run(const RunArgs& a, bool full) {
    qwchain::Scenario s;
    try {
        s = qwchain::load_scenario(a.config);
    } catch (const qwchain::Error& e) {
        std::cerr << "qwc: " << e.what() << '\n';
        return e.code() == error_code::store_error ? kMissing : kUsage;
    }
    if (a.seed) s.seed = *a.seed;
    const auto out = full ? qwchain::run_simulation(s) : qwchain::run_election_scenario(s);
    const fs::path dir = run_directory(a.out, a.seed.has_value());
    qwchain::write_simulation(dir, out, full);
    std::cout << Json{{"status", static_cast<int>(out.status)}, {"reason", out.reason}, {"dir", dir.string()}}.dump()
              << '\n';
    if (out.status != qwchain::RunStatus::ok) std::cerr << "qwc: " << out.reason << '\n';
    return static_cast<int>(out.status);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qwc: quantum-walk blockchain toolkit"};
    app.require_subcommand(1);

    HashArgs hash_args;
    auto* hash = app.add_subcommand("hash", "Print the walk hash of a message as lowercase hex");
    auto* in_opt = hash->add_option("--input", hash_args.input, "File to hash");
    auto* text_opt = hash->add_option("--text", hash_args.text, "Literal message");
    auto* hex_opt = hash->add_option("--hex", hash_args.hex, "Message given as hex");
    in_opt->excludes(text_opt)->excludes(hex_opt);
    text_opt->excludes(hex_opt);
    hash->add_option("--cycle", hash_args.cycle, "Cycle size n_h")->capture_default_str();
    hash->add_option("--bits", hash_args.bits, "Stretch the digest to this many bits");
    hash->add_option("--out", hash_args.out, "Also write a JSON record");
    hash->callback([&] {
        if (!*in_opt && !*text_opt && !*hex_opt) throw CLI::RequiredError("--input, --text or --hex");
    });

    WalkArgs walk_args;
    auto* walk = app.add_subcommand("walk", "Evolve a single walker and dump distributions");
    walk->add_option("--dim", walk_args.dim, "Position dimension M")->capture_default_str();
    walk->add_option("--start", walk_args.start, "Initial position")->required();
    walk->add_option("--steps", walk_args.steps, "Number of walk steps")->required();
    walk->add_option("--coin-state", walk_args.coin_state, "Initial coin state")->capture_default_str();
    walk->add_option("--coin", walk_args.coin, "Coin angles xi theta eta")->expected(3);
    walk->add_option("--out", walk_args.out, "DistributionDump JSON (stdout if omitted)");
    walk->add_option("--gnuplot", walk_args.gnuplot, "Columns: position initial final");

    BuildArgs build_args;
    auto* build = app.add_subcommand("chain-build", "Build a signed chain and store it");
    build->add_option("--out", build_args.out, "Chain directory")->required();
    build->add_option("--blocks", build_args.blocks, "Number of blocks")->capture_default_str();
    build->add_option("--txs", build_args.txs, "Transactions per block")->capture_default_str();
    build->add_option("--senders", build_args.senders, "Distinct senders")->capture_default_str();
    build->add_option("--walkers", build_args.walkers, "Walkers per block")->capture_default_str();
    build->add_option("--dim", build_args.dim, "Position dimension M")->capture_default_str();
    build->add_option("--step-bound", build_args.step_bound, "Step bound T")->capture_default_str();
    build->add_option("--cycle", build_args.cycle, "Hash cycle size")->capture_default_str();
    build->add_option("--seed", build_args.seed, "Seed for payloads and keys")->capture_default_str();

    VerifyArgs verify_args;
    auto* verify = app.add_subcommand("chain-verify", "Validate a stored chain");
    verify->add_option("--chain", verify_args.chain, "Chain directory")->required();
    verify->add_flag("--sampled", verify_args.sampled, "One seeded measurement per walker");
    verify->add_option("--seed", verify_args.seed, "Seed for sampled validation");
    verify->add_option("--report", verify_args.report, "Write the full report as JSON");

    TamperArgs tamper_args;
    auto* tamper = app.add_subcommand("tamper-experiment", "Mutate one block repeatedly and count detections");
    tamper->add_option("--chain", tamper_args.chain, "Chain directory")->required();
    tamper->add_option("--block", tamper_args.block, "Block index")->required();
    tamper->add_option("--mutation", tamper_args.mutation, "Mutation kind")
        ->check(CLI::IsMember({"transaction-byte", "state-substitution"}))
        ->capture_default_str();
    tamper->add_option("--trials", tamper_args.trials, "Number of trials")->capture_default_str();
    tamper->add_option("--seed", tamper_args.seed, "Seed");
    tamper->add_flag("--sampled", tamper_args.sampled, "Sampled internal check");
    tamper->add_option("--out", tamper_args.out, "Report JSON (stdout if omitted)");

    RunArgs election_args, simulate_args;
    auto* election = app.add_subcommand("election", "Run the representative election of a scenario");
    auto* simulate = app.add_subcommand("simulate", "Run a scenario end to end");
    for (auto [cmd, args] : {std::pair{election, &election_args}, std::pair{simulate, &simulate_args}}) {
        cmd->add_option("--config", args->config, "Scenario file")->required();
        cmd->add_option("--out", args->out, "Output directory")->capture_default_str();
        cmd->add_option("--seed", args->seed, "Override the scenario seed; writes into --out directly");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*hash) return cmd_hash(hash_args);
        if (*walk) return cmd_walk(walk_args);
        if (*build) return cmd_chain_build(build_args);
        if (*verify) return cmd_chain_verify(verify_args);
        if (*tamper) return cmd_tamper(tamper_args);
        if (*election) return cmd_run(election_args, false);
        if (*simulate) return cmd_run(simulate_args, true);
    } catch (const qwchain::Error& e) {
        std::cerr << "qwc: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const fs::filesystem_error& e) {
        std::cerr << "qwc: " << e.what() << '\n';
        return kMissing;
    }
    return kUsage;
}
