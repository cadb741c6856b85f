#pragma once

namespace seqmt {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace seqmt
