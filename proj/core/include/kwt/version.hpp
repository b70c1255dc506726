#pragma once

namespace kwt {

inline constexpr const char* kToolName = "kwt";
inline constexpr const char* kToolVersion = "0.1.0";

// Reserved literal marking an abstaining response. Any dataset whose gold
// responses contain this string is rejected at load.
inline constexpr const char* kIdkToken = "<IDK>";

}  // namespace kwt
