// signature.hpp
// Lamport one-time signatures over the quantum-walk hash.
//
// A keypair holds `key_budget` one-time keys; key i signs the transaction with
// nonce i and nothing else. Each one-time key is 2 * digest_bits random
// preimages; the public key stores their commitments hash(preimage). Signing
// reveals one preimage per bit of the message digest.
//
// Signature layout: u32le key index, then digest_bits preimages.

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qwchain/block_chain.hpp"
#include "qwchain/bytes.hpp"
#include "qwchain/qw_hash.hpp"
#include "qwchain/rng.hpp"
#include "qwchain/types.hpp"

namespace qwchain {

struct SignatureParams {
    std::size_t digest_bits = 64;
    std::size_t preimage_size = 8;
    std::size_t key_budget = 16;
    HashParams message_hash{};
    HashParams commitment_hash = [] {
        HashParams p;
        p.cycle_size = 5;
        return p;
    }();

    std::size_t signature_size() const { return 4 + digest_bits * preimage_size; }
};

struct PublicKey {
    NodeId owner = 0;
    /// commitments[i][2 * bit + value] for one-time key i.
    std::vector<std::vector<Digest>> commitments;
};

/// Bits signed for a transaction: the first digest_bits of
/// hash(u32le owner || u32le key index || signing_bytes).
inline std::vector<bool> signed_bits(NodeId owner, std::uint32_t key_index, const Transaction& tx,
                                     const SignatureParams& params) {
    Bytes message;
    put_le(message, owner);
    put_le(message, key_index);
    const Bytes body = signing_bytes(tx);
    message.insert(message.end(), body.begin(), body.end());
    const Bytes digest = stretch_digest(hash(message, params.message_hash), params.digest_bits, params.message_hash);
    std::vector<bool> bits(params.digest_bits);
    for (std::size_t b = 0; b < params.digest_bits; ++b) bits[b] = ((digest[b / 8] >> (7 - b % 8)) & 1U) != 0;
    return bits;
}

class Keypair {
public:
    Keypair(NodeId owner, std::uint64_t seed, SignatureParams params = {})
        : params_(std::move(params)), used_(params_.key_budget, false) {
        if (params_.digest_bits < 1 || params_.preimage_size < 1 || params_.key_budget < 1)
            fail(error_code::invalid_spec, "signature parameters must be positive");
        Rng rng(seed);
        public_.owner = owner;
        secrets_.resize(params_.key_budget);
        public_.commitments.resize(params_.key_budget);
        for (std::size_t i = 0; i < params_.key_budget; ++i) {
            for (std::size_t j = 0; j < 2 * params_.digest_bits; ++j) {
                Bytes pre(params_.preimage_size);
                for (auto& b : pre) b = static_cast<std::uint8_t>(rng.below(256));
                public_.commitments[i].push_back(hash(pre, params_.commitment_hash));
                secrets_[i].push_back(std::move(pre));
            }
        }
    }

    const PublicKey& public_key() const noexcept { return public_; }
    const SignatureParams& params() const noexcept { return params_; }
    NodeId owner() const noexcept { return public_.owner; }

    /// Throws KeyExhausted when tx.nonce has no unused one-time key.
    Bytes sign(const Transaction& tx) {
        if (tx.nonce >= params_.key_budget)
            fail(error_code::key_exhausted, "nonce " + std::to_string(tx.nonce) + " beyond one-time key budget " +
                                                std::to_string(params_.key_budget));
        const auto index = static_cast<std::uint32_t>(tx.nonce);
        if (used_[index]) fail(error_code::key_exhausted, "one-time key " + std::to_string(index) + " already used");
        used_[index] = true;
        const auto bits = signed_bits(public_.owner, index, tx, params_);
        Bytes sig;
        sig.reserve(params_.signature_size());
        put_le(sig, index);
        for (std::size_t b = 0; b < bits.size(); ++b) {
            const Bytes& pre = secrets_[index][2 * b + (bits[b] ? 1 : 0)];
            sig.insert(sig.end(), pre.begin(), pre.end());
        }
        return sig;
    }

private:
    SignatureParams params_;
    PublicKey public_;
    std::vector<std::vector<Bytes>> secrets_;
    std::vector<bool> used_;
};

/// Builds and signs a transaction from the keypair's owner.
inline Transaction sign_transaction(Keypair& keys, NodeId receiver, std::uint64_t nonce, std::int64_t timestamp,
                                    Bytes payload) {
    Transaction tx{keys.owner(), receiver, nonce, timestamp, std::move(payload), {}};
    tx.signature = keys.sign(tx);
    return tx;
}

inline bool verify_signature(const PublicKey& key, const Transaction& tx, const SignatureParams& params = {}) {
    if (tx.sender != key.owner) return false;
    if (tx.signature.size() != params.signature_size()) return false;
    std::uint32_t index = 0;
    for (std::size_t i = 0; i < 4; ++i) index |= static_cast<std::uint32_t>(tx.signature[i]) << (8 * i);
    if (index >= key.commitments.size() || index != tx.nonce) return false;
    if (key.commitments[index].size() != 2 * params.digest_bits) return false;
    const auto bits = signed_bits(key.owner, index, tx, params);
    for (std::size_t b = 0; b < bits.size(); ++b) {
        const auto pre = std::span<const std::uint8_t>(tx.signature).subspan(4 + b * params.preimage_size,
                                                                            params.preimage_size);
        if (!(hash(pre, params.commitment_hash) == key.commitments[index][2 * b + (bits[b] ? 1 : 0)])) return false;
    }
    return true;
}

}  // namespace qwchain
