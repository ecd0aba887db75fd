#pragma once

#include <string>

#include "posit/config.hpp"

namespace posit {

/// Exact rendering of a finite dyadic rational: "0", "3", "-3/8", "1/64".
/// Large magnitudes are written out in full decimal.
std::string format_fraction(WideReal value);

/// Shortest round-trip decimal form of a double, independent of the locale.
std::string format_real(double value);

}  // namespace posit
