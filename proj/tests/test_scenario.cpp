#include <gtest/gtest.h>

#include "qwchain/scenario.hpp"

namespace {

using qwchain::RunStatus;

constexpr const char* kWorked = R"(
# four weighted voters, two candidates
seed = 7
voters = 4
weights = 0.3, 0.3, 0.2, 0.2
total_votes = 10
candidates = 2
votes = 2,1,0,1 / 1,2,2,1
delta = 2
validators = 3
rounds = 2
transactions_per_round = 3
)";

std::string ConfigErrorOf(const std::string& text) {
    try {
        qwchain::parse_scenario(text);
    } catch (const qwchain::Error& e) {
        EXPECT_EQ(e.code(), qwchain::error_code::config_error);
        return e.what();
    }
    return {};
}

}  // namespace

TEST(ParseScenario, ReadsAllForms) {
    const auto s = qwchain::parse_scenario(std::string(kWorked) +
                                           "quorum = 3/4  # trailing comment\nidle = 4, 5\n"
                                           "matrices = 0,0;0,0 / 1,1;2,2\nballot_dim = 2\n");
    EXPECT_EQ(s.seed, 7u);
    EXPECT_EQ(s.weights, (std::vector<double>{0.3, 0.3, 0.2, 0.2}));
    EXPECT_EQ(s.votes, (std::vector<std::vector<std::size_t>>{{2, 1, 0, 1}, {1, 2, 2, 1}}));
    EXPECT_DOUBLE_EQ(s.quorum, 0.75);
    EXPECT_EQ(s.idle, (std::set<qwchain::NodeId>{4, 5}));
    ASSERT_EQ(s.matrices.size(), 2u);
    EXPECT_EQ(s.matrices[1], (std::vector<std::vector<std::size_t>>{{1, 1}, {2, 2}}));
    EXPECT_EQ(s.candidate_id(1), 5u);
    EXPECT_EQ(s.validator_id(0), 6u);
}

TEST(ParseScenario, Defaults) {
    const auto s = qwchain::parse_scenario("");
    EXPECT_EQ(s.weights, std::vector<double>(4, 1.0));
    EXPECT_NEAR(s.quorum, 2.0 / 3.0, 1e-15);
    const auto c = qwchain::election_config(s);
    EXPECT_EQ(c.votes, (std::vector<std::vector<std::size_t>>{{2, 0, 2, 0}, {0, 2, 0, 2}}));
    EXPECT_EQ(c.candidate_labels, (std::vector<std::string>{"C1", "C2"}));
}

TEST(ParseScenario, ErrorsCarryLineNumbers) {
    EXPECT_NE(ConfigErrorOf("seed = 1\nbogus = 2\n").find("line 2"), std::string::npos);
    EXPECT_NE(ConfigErrorOf("seed = 1\nseed = 2\n").find("duplicate"), std::string::npos);
    EXPECT_NE(ConfigErrorOf("\n\nvoters = four\n").find("line 3"), std::string::npos);
    EXPECT_NE(ConfigErrorOf("no equals sign\n").find("line 1"), std::string::npos);
    EXPECT_FALSE(ConfigErrorOf("adversary = dragon\n").empty());
    EXPECT_FALSE(ConfigErrorOf("quorum = 1/2\n").empty());
    EXPECT_FALSE(ConfigErrorOf("weights = 1, 2\n").empty());
    EXPECT_FALSE(ConfigErrorOf("votes = 1,1,1,1\n").empty());
    EXPECT_FALSE(ConfigErrorOf("position_dim = 12\n").empty());
    EXPECT_FALSE(ConfigErrorOf("representatives = 3\n").empty());
}

TEST(ParseScenario, StateCapLimitsValidatorsAndVoters) {
    // (V + 1)^V amplitudes: 7^6 fits under 2^20, 8^7 does not
    EXPECT_NO_THROW(qwchain::parse_scenario("validators = 6\n"));
    EXPECT_NE(ConfigErrorOf("validators = 7\n").find("at most 6"), std::string::npos);
    // default ballot dimension 16: 16^5 fits, 16^6 does not
    EXPECT_NO_THROW(qwchain::parse_scenario("voters = 5\nweights = 1,1,1,1,1\n"));
    EXPECT_FALSE(ConfigErrorOf("voters = 6\nweights = 1,1,1,1,1,1\n").empty());
}

TEST(LoadScenario, MissingFileIsStoreError) {
    try {
        qwchain::load_scenario("/nonexistent/scenario.cfg");
        FAIL();
    } catch (const qwchain::Error& e) {
        EXPECT_EQ(e.code(), qwchain::error_code::store_error);
    }
}

TEST(Pipeline, WorkedElection) {
    const auto out = qwchain::run_election_scenario(qwchain::parse_scenario(kWorked));
    EXPECT_EQ(out.status, RunStatus::ok);
    const auto& pub = out.election["public"];
    EXPECT_EQ(pub["tallies"][0]["total"], 4);
    EXPECT_EQ(pub["tallies"][1]["total"], 6);
    EXPECT_EQ(pub["elected"], qwchain::Json::array({5}));
}

TEST(Pipeline, HonestSimulation) {
    const auto out = qwchain::run_simulation(qwchain::parse_scenario(kWorked));
    EXPECT_EQ(out.status, RunStatus::ok) << out.reason;
    EXPECT_EQ(out.chain.size(), 2u);
    EXPECT_TRUE(qwchain::verify_chain(out.chain, out.params).accepted);
    ASSERT_GE(out.transactions.size(), 7u);
    EXPECT_EQ(out.transactions[3]["admission"], "replay");
    for (const auto& s : out.sync) EXPECT_EQ(s["status"], "Ok");
    EXPECT_EQ(out.incentives["next_election_candidates"], qwchain::Json::array({4, 5}));
}

TEST(Pipeline, TamperingRepresentativeExcluded) {
    auto s = qwchain::parse_scenario(std::string(kWorked) + "representatives = 2\nadversary = block_tamper\n"
                                                            "adversary_node = 5\n");
    const auto out = qwchain::run_simulation(s);
    EXPECT_EQ(out.status, RunStatus::ok) << out.reason;
    // with two rounds and rotation the tamperer leads once; the other representative produces both blocks
    EXPECT_EQ(out.chain.size(), 2u);
    EXPECT_TRUE(qwchain::verify_chain(out.chain, out.params).accepted);
    EXPECT_EQ(out.incentives["next_election_candidates"], qwchain::Json::array({4}));
}

TEST(Pipeline, InterceptResendAborts) {
    const auto out = qwchain::run_simulation(qwchain::parse_scenario(std::string(kWorked) + "adversary = intercept_resend\n"));
    EXPECT_EQ(out.status, RunStatus::aborted);
    EXPECT_NE(out.reason.find("ChannelCompromised"), std::string::npos);
}

TEST(Pipeline, ColumnTamperAborts) {
    const auto out = qwchain::run_election_scenario(
        qwchain::parse_scenario(std::string(kWorked) + "adversary = vote_forger\nadversary_node = 0\nforgery = column_tamper\n"));
    EXPECT_EQ(out.status, RunStatus::aborted);
    EXPECT_NE(out.reason.find("ProtocolAbort"), std::string::npos);
}

TEST(Pipeline, SameSeedSameOutputs) {
    const auto s = qwchain::parse_scenario(kWorked);
    const auto a = qwchain::run_simulation(s);
    const auto b = qwchain::run_simulation(s);
    EXPECT_EQ(a.election.dump(), b.election.dump());
    EXPECT_EQ(a.rounds.dump(), b.rounds.dump());
    EXPECT_EQ(a.summary.dump(), b.summary.dump());
    auto t = s;
    t.seed = 8;
    EXPECT_NE(qwchain::run_simulation(t).summary["tip_hash"], a.summary["tip_hash"]);
}
