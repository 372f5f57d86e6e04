#pragma once

#include <string>

namespace hiertree {

inline constexpr const char* kToolName = "hiertree";
inline constexpr const char* kToolVersion = "0.1.0";

// The exact string printed by `hiertree --version`; embedded verbatim in
// every JSON artifact under the "generator" key.
inline std::string version_string() {
    return std::string(kToolName) + " " + kToolVersion;
}

} // namespace hiertree
