#pragma once

namespace acev {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace acev
