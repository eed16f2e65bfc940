#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "qwchain/chain_io.hpp"

namespace {

namespace fs = std::filesystem;
using qwchain::ChainParams;
using qwchain::ChainStore;

fs::path ScratchDir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("qwchain_io_" + name);
    fs::remove_all(dir);
    return dir;
}

ChainStore SmallChain(const ChainParams& p) {
    ChainStore store;
    for (std::size_t k = 0; k < 3; ++k) {
        std::vector<qwchain::Transaction> txs{
            {7, 8, k, 100 + std::int64_t(k), qwchain::to_bytes("item " + std::to_string(k)), qwchain::Bytes{1, 2}}};
        EXPECT_TRUE(store.append_block(qwchain::build_block(k, store.tip_hash(p), txs, 900 + std::int64_t(k), p), p)
                        .accepted);
    }
    return store;
}

qwchain::error_code LoadCode(const fs::path& dir) {
    try {
        qwchain::load_chain(dir);
    } catch (const qwchain::Error& e) {
        return e.code();
    }
    return qwchain::error_code::ok;
}

}  // namespace

TEST(ChainIo, SaveLoadRoundTrip) {
    ChainParams p;
    p.step_bound = 12;
    const ChainStore store = SmallChain(p);
    const fs::path dir = ScratchDir("roundtrip");
    qwchain::save_chain(dir, store, p);
    const auto loaded = qwchain::load_chain(dir);
    ASSERT_EQ(loaded.store.size(), store.size());
    EXPECT_EQ(loaded.params.step_bound, 12u);
    for (std::size_t k = 0; k < store.size(); ++k) {
        EXPECT_EQ(qwchain::to_json(loaded.store.at(k)), qwchain::to_json(store.at(k)));
        for (std::size_t j = 0; j < p.n_walkers; ++j)
            EXPECT_EQ(loaded.store.at(k).body.final_states[j].amplitudes(), store.at(k).body.final_states[j].amplitudes());
    }
    EXPECT_TRUE(qwchain::verify_chain(loaded.store, loaded.params).accepted);
    fs::remove_all(dir);
}

TEST(ChainIo, ParamsJsonRoundTrip) {
    ChainParams p;
    p.n_walkers = 3;
    p.walk.coin = {0.1, 0.2, 0.3};
    p.hash.cycle_size = 5;
    const ChainParams q = qwchain::chain_params_from_json(qwchain::to_json(p));
    EXPECT_EQ(qwchain::to_json(q), qwchain::to_json(p));
}

TEST(ChainIo, MissingDirectoryIsStoreError) {
    EXPECT_EQ(LoadCode(ScratchDir("missing")), qwchain::error_code::store_error);
}

TEST(ChainIo, CorruptFilesAreStoreErrors) {
    ChainParams p;
    const fs::path dir = ScratchDir("corrupt");
    qwchain::save_chain(dir, SmallChain(p), p);
    { std::ofstream(dir / qwchain::block_file_name(1), std::ios::trunc) << "{ not json"; }
    EXPECT_EQ(LoadCode(dir), qwchain::error_code::store_error);

    qwchain::save_chain(dir, SmallChain(p), p);
    fs::remove(dir / qwchain::block_file_name(2));
    EXPECT_EQ(LoadCode(dir), qwchain::error_code::store_error);

    qwchain::save_chain(dir, SmallChain(p), p);
    auto block = qwchain::read_json_file(dir / qwchain::block_file_name(0));
    block["body"]["final_states"][0]["amplitudes"][0] = qwchain::Json::array({5.0, 0.0});
    qwchain::write_json_file(dir / qwchain::block_file_name(0), block);
    EXPECT_EQ(LoadCode(dir), qwchain::error_code::store_error);

    qwchain::save_chain(dir, SmallChain(p), p);
    auto meta = qwchain::read_json_file(dir / "chain.json");
    meta["format_version"] = 99;
    qwchain::write_json_file(dir / "chain.json", meta);
    EXPECT_EQ(LoadCode(dir), qwchain::error_code::store_error);
    fs::remove_all(dir);
}

TEST(ChainIo, TamperedButWellFormedLoadsAndFailsVerification) {
    ChainParams p;
    const fs::path dir = ScratchDir("tampered");
    qwchain::save_chain(dir, SmallChain(p), p);
    auto block = qwchain::read_json_file(dir / qwchain::block_file_name(1));
    block["body"]["transactions"][0]["payload"] = qwchain::to_hex(qwchain::to_bytes("item 9"));
    qwchain::write_json_file(dir / qwchain::block_file_name(1), block);
    const auto loaded = qwchain::load_chain(dir);
    const auto report = qwchain::verify_chain(loaded.store, loaded.params);
    EXPECT_FALSE(report.accepted);
    EXPECT_EQ(report.first_failure, std::optional<std::size_t>(1));
    fs::remove_all(dir);
}
