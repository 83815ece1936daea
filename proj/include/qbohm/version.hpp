#pragma once

namespace qbohm {

inline constexpr const char* version() { return "0.1.0"; }

} // namespace qbohm
