#pragma once

#include <string>

namespace advtrack {

/// Shortest decimal representation that round-trips to the same double.
std::string fmt_double(double v);

/// Strict double parse of a whole token; throws std::invalid_argument on junk.
double parse_double(const std::string& token, const std::string& context);

}  // namespace advtrack
