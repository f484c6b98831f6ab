#pragma once

namespace dhelm {

inline constexpr const char* kVersion = "0.1.0";

} // namespace dhelm
