#pragma once

namespace lambshift {

inline constexpr const char* kVersion = "1.0.0";

// embedded in every CSV/JSON output file
inline constexpr const char* kSchemaVersion = "lambshift-output-v1";

}  // namespace lambshift
