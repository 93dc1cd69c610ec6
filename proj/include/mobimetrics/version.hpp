#pragma once

namespace mobimetrics {

// Build identifier embedded in every output manifest.
inline constexpr const char* kVersion = "mobimetrics 0.1.0";

}  // namespace mobimetrics
