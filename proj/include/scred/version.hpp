#pragma once

namespace scred {

inline constexpr const char* version = "0.1.0";

}  // namespace scred
