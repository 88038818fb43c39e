#include "ams/format.hpp"

#include <cstdio>
#include <cstdlib>

namespace ams {

std::string format_double(double v) {
    char buf[40];
    for (int digits = 15; digits <= 17; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;
}

}  // namespace ams
