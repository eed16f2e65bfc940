// types.hpp
#pragma once

#include <cstdint>

namespace qwchain {

using NodeId = std::uint32_t;

}  // namespace qwchain
