#pragma once

#include <cstdio>
#include <string>

namespace seqdesign {

// Shortest round-trippable decimal form, byte-stable for a given platform.
inline std::string csv_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string csv_int(long long v) { return std::to_string(v); }

}  // namespace seqdesign
