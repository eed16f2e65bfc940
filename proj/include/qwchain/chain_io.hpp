// chain_io.hpp
// JSON encoding of blocks and reports, and the on-disk chain directory:
//
//   <dir>/chain.json          format version, chain parameters, block count
//   <dir>/block_000000.json   one file per block, numbered from 0
//
// Digests and byte strings are lowercase hex; amplitudes are [re, im] pairs.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "qwchain/block_chain.hpp"

namespace qwchain {

using Json = nlohmann::ordered_json;

inline constexpr int chain_format_version = 1;

inline Json complex_to_json(const complex& c) { return Json::array({c.real(), c.imag()}); }

inline complex complex_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 2) fail(error_code::malformed, "amplitude must be [re, im]");
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

inline Json to_json(const ChainParams& p) {
    Json coin = Json::array();
    for (const auto& a : p.hash.initial_coin) coin.push_back(complex_to_json(a));
    return Json{{"n_walkers", p.n_walkers},
                {"position_dim", p.walk.position_dim},
                {"step_bound", p.step_bound},
                {"coin", {{"xi", p.walk.coin.xi}, {"theta", p.walk.coin.theta}, {"eta", p.walk.coin.eta}}},
                {"hash",
                 {{"cycle_size", p.hash.cycle_size},
                  {"initial_coin", coin},
                  {"initial_positions", {p.hash.initial_positions[0], p.hash.initial_positions[1]}},
                  {"min_steps", p.hash.min_steps},
                  {"interaction_phase", p.hash.interaction_phase}}}};
}

inline ChainParams chain_params_from_json(const Json& j) {
    ChainParams p;
    p.n_walkers = j.at("n_walkers").get<std::size_t>();
    p.walk.position_dim = j.at("position_dim").get<std::size_t>();
    p.step_bound = j.at("step_bound").get<std::size_t>();
    const auto& coin = j.at("coin");
    p.walk.coin = {coin.at("xi").get<double>(), coin.at("theta").get<double>(), coin.at("eta").get<double>()};
    const auto& h = j.at("hash");
    p.hash.cycle_size = h.at("cycle_size").get<std::size_t>();
    const auto& amps = h.at("initial_coin");
    if (!amps.is_array() || amps.size() != 4) fail(error_code::malformed, "hash coin needs four amplitudes");
    for (std::size_t i = 0; i < 4; ++i) p.hash.initial_coin[i] = complex_from_json(amps.at(i));
    p.hash.initial_positions = {h.at("initial_positions").at(0).get<std::size_t>(),
                                h.at("initial_positions").at(1).get<std::size_t>()};
    p.hash.min_steps = h.at("min_steps").get<std::size_t>();
    p.hash.interaction_phase = h.at("interaction_phase").get<double>();
    p.validate();
    return p;
}

inline Json to_json(const Transaction& tx) {
    return Json{{"sender", tx.sender},   {"receiver", tx.receiver},           {"nonce", tx.nonce},
                {"timestamp", tx.timestamp}, {"payload", to_hex(tx.payload)}, {"signature", to_hex(tx.signature)}};
}

inline Transaction transaction_from_json(const Json& j) {
    Transaction tx;
    tx.sender = j.at("sender").get<NodeId>();
    tx.receiver = j.at("receiver").get<NodeId>();
    tx.nonce = j.at("nonce").get<std::uint64_t>();
    tx.timestamp = j.at("timestamp").get<std::int64_t>();
    tx.payload = from_hex(j.at("payload").get<std::string>());
    tx.signature = from_hex(j.at("signature").get<std::string>());
    return tx;
}

inline Json to_json(const StateVector& s) {
    Json amps = Json::array();
    for (const auto& a : s.amplitudes()) amps.push_back(complex_to_json(a));
    return Json{{"layout", s.layout().dims()}, {"amplitudes", std::move(amps)}};
}

inline StateVector state_from_json(const Json& j) {
    SubsystemLayout layout(j.at("layout").get<std::vector<std::size_t>>());
    std::vector<complex> amps;
    for (const auto& a : j.at("amplitudes")) amps.push_back(complex_from_json(a));
    return StateVector::from_amplitudes(layout, std::move(amps));
}

inline Json to_json(const Block& b) {
    Json txs = Json::array();
    for (const auto& tx : b.body.transactions) txs.push_back(to_json(tx));
    Json states = Json::array();
    for (const auto& s : b.body.final_states) states.push_back(to_json(s));
    return Json{{"header",
                 {{"index", b.header.index},
                  {"prev_hash", b.header.prev_hash.hex()},
                  {"own_hash", b.header.own_hash.hex()},
                  {"timestamp", b.header.timestamp}}},
                {"body",
                 {{"n_walkers", b.body.n_walkers},
                  {"initial_positions", b.body.initial_positions},
                  {"step_counts", b.body.step_counts},
                  {"final_states", std::move(states)},
                  {"transactions", std::move(txs)}}}};
}

inline Block block_from_json(const Json& j) {
    Block b;
    const auto& h = j.at("header");
    b.header.index = h.at("index").get<std::uint64_t>();
    b.header.prev_hash = Digest::from_hex(h.at("prev_hash").get<std::string>());
    b.header.own_hash = Digest::from_hex(h.at("own_hash").get<std::string>());
    b.header.timestamp = h.at("timestamp").get<std::int64_t>();
    const auto& body = j.at("body");
    b.body.n_walkers = body.at("n_walkers").get<std::size_t>();
    b.body.initial_positions = body.at("initial_positions").get<std::vector<std::size_t>>();
    b.body.step_counts = body.at("step_counts").get<std::vector<std::size_t>>();
    for (const auto& s : body.at("final_states")) b.body.final_states.push_back(state_from_json(s));
    for (const auto& tx : body.at("transactions")) b.body.transactions.push_back(transaction_from_json(tx));
    return b;
}

inline Json to_json(const ValidationReport& r) {
    Json walkers = Json::array();
    for (const auto& w : r.walkers) {
        Json entry{{"walker", w.walker},
                   {"expected_position", w.expected_position},
                   {"steps", w.steps},
                   {"fidelity", w.fidelity},
                   {"passed", w.passed}};
        entry["measured"] = w.measured ? Json(*w.measured) : Json(nullptr);
        walkers.push_back(std::move(entry));
    }
    return Json{{"accepted", r.accepted},
                {"internal_ok", r.internal_ok},
                {"linkage_ok", r.linkage_ok},
                {"prev_link_ok", r.prev_link_ok},
                {"recomputed_hash", r.recomputed_hash.hex()},
                {"walkers", std::move(walkers)},
                {"failures", r.failures}};
}

inline Json to_json(const ChainReport& r) {
    Json blocks = Json::array();
    for (const auto& b : r.reports) blocks.push_back(to_json(b));
    return Json{{"accepted", r.accepted},
                {"first_failure", r.first_failure ? Json(*r.first_failure) : Json(nullptr)},
                {"failing_blocks", r.failing_blocks},
                {"blocks", std::move(blocks)}};
}

inline std::string block_file_name(std::size_t index) {
    char name[32];
    std::snprintf(name, sizeof name, "block_%06zu.json", index);
    return name;
}

inline void write_json_file(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(error_code::store_error, "cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) fail(error_code::store_error, "write failed for " + path.string());
}

inline Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(error_code::store_error, "cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(error_code::store_error, path.string() + ": " + e.what());
    }
}

inline void save_chain(const std::filesystem::path& dir, const ChainStore& store, const ChainParams& params) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(error_code::store_error, "cannot create " + dir.string() + ": " + ec.message());
    write_json_file(dir / "chain.json",
                    Json{{"format_version", chain_format_version}, {"params", to_json(params)}, {"length", store.size()}});
    for (std::size_t i = 0; i < store.size(); ++i) write_json_file(dir / block_file_name(i), to_json(store.at(i)));
}

struct LoadedChain {
    ChainParams params;
    ChainStore store;
};

/// Throws StoreError for a missing directory, unreadable or inconsistent files.
inline LoadedChain load_chain(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) fail(error_code::store_error, "no chain directory at " + dir.string());
    const Json meta = read_json_file(dir / "chain.json");
    LoadedChain out;
    try {
        if (meta.at("format_version").get<int>() != chain_format_version)
            fail(error_code::store_error, "unsupported chain format version");
        out.params = chain_params_from_json(meta.at("params"));
        const auto length = meta.at("length").get<std::size_t>();
        for (std::size_t i = 0; i < length; ++i)
            out.store.push_unchecked(block_from_json(read_json_file(dir / block_file_name(i))));
    } catch (const nlohmann::json::exception& e) {
        fail(error_code::store_error, std::string("corrupt chain store: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == error_code::store_error) throw;
        fail(error_code::store_error, std::string("corrupt chain store: ") + e.what());
    }
    return out;
}

}  // namespace qwchain
