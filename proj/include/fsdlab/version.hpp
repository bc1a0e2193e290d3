#pragma once

namespace fsdlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fsdlab
