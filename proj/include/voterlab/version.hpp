#pragma once

namespace voterlab {

inline constexpr const char* kVersion = "voterlab 0.1.0";

}  // namespace voterlab
