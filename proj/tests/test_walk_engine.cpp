#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "oracles/dense_walk_oracle.hpp"
#include "qwchain/walk_engine.hpp"

namespace {

using qwchain::StateVector;
using qwchain::WalkConfig;

std::vector<double> Distribution(std::size_t start, std::size_t steps, std::size_t m = 16) {
    WalkConfig cfg;
    cfg.position_dim = m;
    return qwchain::walker_distribution(qwchain::evolve(qwchain::initial_walk_state(cfg, start), cfg, steps));
}

// exact Hadamard-walk distributions, independently computed in rational arithmetic
const std::map<std::size_t, double> kStart6Steps5 = {
    {1, 1.0 / 32}, {3, 5.0 / 32}, {5, 4.0 / 32}, {7, 4.0 / 32}, {9, 17.0 / 32}, {11, 1.0 / 32}};
const std::map<std::size_t, double> kStart8Steps4 = {
    {4, 1.0 / 16}, {6, 2.0 / 16}, {8, 2.0 / 16}, {10, 10.0 / 16}, {12, 1.0 / 16}};

void ExpectMatches(const std::vector<double>& p, const std::map<std::size_t, double>& expected) {
    for (std::size_t x = 0; x < p.size(); ++x) {
        const auto it = expected.find(x);
        EXPECT_NEAR(p[x], it == expected.end() ? 0.0 : it->second, 1e-12) << "position " << x;
    }
}

}  // namespace

TEST(WalkEngine, KnownDistributions) {
    ExpectMatches(Distribution(6, 5), kStart6Steps5);
    ExpectMatches(Distribution(8, 4), kStart8Steps4);
}

TEST(WalkEngine, MatchesDenseOracle) {
    for (std::size_t m : {4u, 8u, 16u})
        for (std::size_t start = 0; start < m; start += 3)
            for (std::size_t t : {0u, 1u, 2u, 5u, 9u, 17u}) {
                const auto p = Distribution(start, t, m);
                const auto q = oracle::position_distribution(m, start, 0, t);
                for (std::size_t x = 0; x < m; ++x) EXPECT_NEAR(p[x], q[x], 1e-9) << m << " " << start << " " << t;
            }
}

TEST(WalkEngine, OracleAgreesWithFrozenValues) {
    ExpectMatches(oracle::position_distribution(16, 6, 0, 5), kStart6Steps5);
    ExpectMatches(oracle::position_distribution(16, 8, 0, 4), kStart8Steps4);
}

TEST(WalkEngine, SingleStepAmplitudes) {
    WalkConfig cfg;
    const StateVector s = qwchain::evolve(qwchain::initial_walk_state(cfg, 6), cfg, 1);
    const double h = 1.0 / std::sqrt(2.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double expected = (i == 14 || i == 11) ? h : 0.0;
        EXPECT_NEAR(std::abs(s[i] - expected), 0.0, 1e-15) << i;
    }
}

TEST(WalkEngine, DenseStepOperatorAgrees) {
    WalkConfig cfg;
    cfg.position_dim = 8;
    cfg.coin = {0.3, 1.1, -0.7};
    const qwchain::Matrix u = qwchain::step_operator(cfg);
    EXPECT_LT(qwchain::unitarity_defect(u), 1e-12);
    qwchain::Rng rng(4);
    const StateVector psi = qwchain::random_state(cfg.layout(), rng);
    const StateVector fast = qwchain::evolve(psi, cfg, 1);
    const StateVector dense = qwchain::apply_unitary(psi, u, {0, 1});
    for (std::size_t i = 0; i < psi.size(); ++i) EXPECT_LT(std::abs(fast[i] - dense[i]), 1e-13);
}

TEST(WalkEngine, RoundTripProperty) {
    qwchain::Rng rng(21);
    for (std::size_t m : {2u, 4u, 16u, 64u}) {
        WalkConfig cfg;
        cfg.position_dim = m;
        cfg.coin = {rng.uniform() * 6.28, rng.uniform() * 6.28, rng.uniform() * 6.28};
        for (int trial = 0; trial < 5; ++trial) {
            const StateVector psi = qwchain::random_state(cfg.layout(), rng);
            const std::size_t t = 1 + rng.below(40);
            const StateVector back = qwchain::inverse_evolve(qwchain::evolve(psi, cfg, t), cfg, t);
            EXPECT_GT(qwchain::fidelity(back, psi), 1.0 - 1e-9);
            EXPECT_NEAR(qwchain::evolve(psi, cfg, t).norm(), 1.0, 1e-12);
        }
    }
}

TEST(WalkEngine, PartialInverseIsNotTheStart) {
    WalkConfig cfg;
    const StateVector fwd = qwchain::evolve(qwchain::initial_walk_state(cfg, 6), cfg, 5);
    const auto p = qwchain::walker_distribution(qwchain::inverse_evolve(fwd, cfg, 4));
    ExpectMatches(p, {{5, 0.5}, {7, 0.5}});
}

TEST(WalkEngine, ZeroStepsIsIdentity) {
    WalkConfig cfg;
    const auto p = Distribution(6, 0);
    ExpectMatches(p, {{6, 1.0}});
}

TEST(WalkEngine, RejectsBadConfig) {
    auto code = [](auto&& f) {
        try {
            f();
        } catch (const qwchain::Error& e) {
            return e.code();
        }
        return qwchain::error_code::ok;
    };
    WalkConfig bad;
    bad.position_dim = 12;
    EXPECT_EQ(code([&] { bad.validate(); }), qwchain::error_code::invalid_dimension);
    WalkConfig cfg;
    EXPECT_EQ(code([&] { qwchain::initial_walk_state(cfg, 16); }), qwchain::error_code::invalid_index);
    const StateVector wrong = StateVector::basis(qwchain::SubsystemLayout({8, 2}), {0, 0});
    EXPECT_EQ(code([&] { qwchain::evolve(wrong, cfg, 1); }), qwchain::error_code::dimension_mismatch);
    EXPECT_EQ(code([] { qwchain::shift_matrix(1); }), qwchain::error_code::invalid_dimension);
}
