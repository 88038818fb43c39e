#ifndef AMS_DIGEST_HPP
#define AMS_DIGEST_HPP

#include <cstdint>
#include <span>
#include <string>

namespace ams {

// FNV-1a 64-bit; used for cache keys and output checksums.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t fnv1a64(const std::string& s);
std::string to_hex(std::uint64_t v);

}  // namespace ams

#endif
