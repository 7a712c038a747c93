#pragma once

namespace neulab {

inline constexpr const char* library_version = "0.1.0";

} // namespace neulab
