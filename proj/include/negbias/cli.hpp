#pragma once

#include <string>
#include <vector>

namespace negbias {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitIntegrity = 3;
inline constexpr int kExitProvider = 4;

/// Entry point of the negbias tool. args excludes the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace negbias
