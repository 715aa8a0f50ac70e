#pragma once

namespace emspec {
inline constexpr const char* kVersion = "0.1.0";
}
