#pragma once

namespace envgame {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace envgame
