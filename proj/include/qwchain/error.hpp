// error.hpp
// Error codes shared by every qwchain module.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qwchain {

enum class error_code {
    ok,
    invalid_index,
    invalid_dimension,
    dimension_mismatch,
    not_unitary,
    not_normalized,
    degenerate_state,
    empty_message,
    empty_block,
    malformed,
    store_error,
    invalid_spec,
    invalid_weight,
    invalid_vote,
    over_weight,
    incomplete_ballot,
    invalid_count,
    protocol_abort,
    channel_compromised,
    round_failed,
    sync_mismatch,
    key_exhausted,
    config_error,
};

constexpr std::string_view to_string(error_code code) noexcept {
    switch (code) {
        case error_code::ok: return "Ok";
        case error_code::invalid_index: return "InvalidIndex";
        case error_code::invalid_dimension: return "InvalidDimension";
        case error_code::dimension_mismatch: return "DimensionMismatch";
        case error_code::not_unitary: return "NotUnitary";
        case error_code::not_normalized: return "NotNormalized";
        case error_code::degenerate_state: return "DegenerateState";
        case error_code::empty_message: return "EmptyMessage";
        case error_code::empty_block: return "EmptyBlock";
        case error_code::malformed: return "Malformed";
        case error_code::store_error: return "StoreError";
        case error_code::invalid_spec: return "InvalidSpec";
        case error_code::invalid_weight: return "InvalidWeight";
        case error_code::invalid_vote: return "InvalidVote";
        case error_code::over_weight: return "OverWeight";
        case error_code::incomplete_ballot: return "IncompleteBallot";
        case error_code::invalid_count: return "InvalidCount";
        case error_code::protocol_abort: return "ProtocolAbort";
        case error_code::channel_compromised: return "ChannelCompromised";
        case error_code::round_failed: return "RoundFailed";
        case error_code::sync_mismatch: return "SyncMismatch";
        case error_code::key_exhausted: return "KeyExhausted";
        case error_code::config_error: return "ConfigError";
    }
    return "Unknown";
}

/// Exception carrying a machine-readable code; what() is "<Code>: <detail>".
class Error : public std::runtime_error {
public:
    Error(error_code code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    error_code code() const noexcept { return code_; }

private:
    error_code code_;
};

[[noreturn]] inline void fail(error_code code, const std::string& detail) {
    throw Error(code, detail);
}

}  // namespace qwchain
