#include <gtest/gtest.h>

#include "qwchain/signature.hpp"

namespace {

using qwchain::Keypair;
using qwchain::SignatureParams;
using qwchain::Transaction;

SignatureParams SmallParams() {
    SignatureParams p;
    p.key_budget = 4;
    return p;
}

}  // namespace

TEST(Signature, RoundTrip) {
    const auto params = SmallParams();
    Keypair keys(3, 99, params);
    const Transaction tx = qwchain::sign_transaction(keys, 4, 0, 1234, qwchain::to_bytes("send 10"));
    EXPECT_EQ(tx.signature.size(), params.signature_size());
    EXPECT_TRUE(qwchain::verify_signature(keys.public_key(), tx, params));
    EXPECT_EQ(keys.public_key().commitments.size(), params.key_budget);
    EXPECT_EQ(keys.public_key().commitments[0].size(), 2 * params.digest_bits);
}

TEST(Signature, DeterministicFromSeed) {
    const auto params = SmallParams();
    Keypair a(3, 7, params), b(3, 7, params), c(3, 8, params);
    EXPECT_EQ(a.public_key().commitments, b.public_key().commitments);
    EXPECT_NE(a.public_key().commitments, c.public_key().commitments);
}

TEST(Signature, WrongKeyOrOwnerRejected) {
    const auto params = SmallParams();
    Keypair alice(1, 11, params), mallory(1, 12, params);
    const Transaction tx = qwchain::sign_transaction(alice, 2, 1, 5, qwchain::to_bytes("x"));
    EXPECT_FALSE(qwchain::verify_signature(mallory.public_key(), tx, params));
    Transaction relabeled = tx;
    relabeled.sender = 5;
    EXPECT_FALSE(qwchain::verify_signature(alice.public_key(), relabeled, params));
}

TEST(Signature, AnyFieldChangeInvalidates) {
    const auto params = SmallParams();
    Keypair keys(1, 21, params);
    const Transaction tx = qwchain::sign_transaction(keys, 2, 2, 77, qwchain::to_bytes("transfer 0042 units"));
    qwchain::Rng rng(22);
    for (int t = 0; t < 1000; ++t) {
        Transaction bad = tx;
        const std::size_t bit = rng.below(bad.payload.size() * 8);
        bad.payload[bit / 8] ^= static_cast<std::uint8_t>(1U << (bit % 8));
        EXPECT_FALSE(qwchain::verify_signature(keys.public_key(), bad, params));
    }
    Transaction moved = tx;
    moved.receiver = 3;
    EXPECT_FALSE(qwchain::verify_signature(keys.public_key(), moved, params));
    Transaction late = tx;
    late.timestamp += 1;
    EXPECT_FALSE(qwchain::verify_signature(keys.public_key(), late, params));
    Transaction forged = tx;
    forged.signature[4] ^= 0x01;
    EXPECT_FALSE(qwchain::verify_signature(keys.public_key(), forged, params));
}

TEST(Signature, UnsignedOrTruncatedRejected) {
    const auto params = SmallParams();
    Keypair keys(1, 31, params);
    Transaction tx{1, 2, 0, 0, qwchain::to_bytes("x"), {}};
    EXPECT_FALSE(qwchain::verify_signature(keys.public_key(), tx, params));
    tx.signature = keys.sign(tx);
    tx.signature.pop_back();
    EXPECT_FALSE(qwchain::verify_signature(keys.public_key(), tx, params));
}

TEST(Signature, OneTimeKeysAreNotReused) {
    const auto params = SmallParams();
    Keypair keys(1, 41, params);
    qwchain::sign_transaction(keys, 2, 0, 0, qwchain::to_bytes("a"));
    try {
        qwchain::sign_transaction(keys, 2, 0, 0, qwchain::to_bytes("b"));
        FAIL();
    } catch (const qwchain::Error& e) {
        EXPECT_EQ(e.code(), qwchain::error_code::key_exhausted);
    }
    EXPECT_THROW(qwchain::sign_transaction(keys, 2, 4, 0, qwchain::to_bytes("c")), qwchain::Error);
    // a signature made for nonce 1 does not verify under nonce 2
    Transaction tx = qwchain::sign_transaction(keys, 2, 1, 0, qwchain::to_bytes("d"));
    tx.nonce = 2;
    EXPECT_FALSE(qwchain::verify_signature(keys.public_key(), tx, params));
}
