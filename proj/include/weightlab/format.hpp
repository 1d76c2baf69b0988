#pragma once

#include <string>

namespace weightlab {

/// Shortest-stable decimal rendering with 17 significant digits.
std::string format_double(double x);

}  // namespace weightlab
