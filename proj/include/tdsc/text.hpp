#pragma once

#include <cstdio>
#include <string>

namespace tdsc {

// Shortest decimal that round-trips a double (17 significant digits).
// Used for CSV payloads and run logs so that identical runs produce
// byte-identical files.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace tdsc
