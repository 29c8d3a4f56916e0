#pragma once

#include <cstdio>
#include <string>

namespace wob {

/// Round-trippable text for reals; every CSV goes through this so reports are
/// byte-stable.
inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace wob
