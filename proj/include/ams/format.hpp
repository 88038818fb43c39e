#ifndef AMS_FORMAT_HPP
#define AMS_FORMAT_HPP

#include <string>

namespace ams {

// Shortest decimal representation that parses back to the same double;
// deterministic, so formatted outputs stay byte-stable.
std::string format_double(double v);

}  // namespace ams

#endif
