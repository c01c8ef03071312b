#include "promptgauge/digest.hpp"

#include <openssl/sha.h>

#include <array>
#include <cstdio>

namespace promptgauge {

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
    SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest.data());

    std::string hex(2 * SHA256_DIGEST_LENGTH, '\0');
    static const char* kHexDigits = "0123456789abcdef";
    for (std::size_t i = 0; i < digest.size(); ++i) {
        hex[2 * i] = kHexDigits[digest[i] >> 4];
        hex[2 * i + 1] = kHexDigits[digest[i] & 0x0f];
    }
    return hex;
}

}  // namespace promptgauge
