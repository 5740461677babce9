#include "codesift/hashing.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace codesift {

Sha256Digest sha256(std::string_view bytes) {
    Sha256Digest out{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != out.size()) {
        throw std::runtime_error("sha256: digest computation failed");
    }
    return out;
}

std::string to_hex(const Sha256Digest& digest) {
    static const char* kHex = "0123456789abcdef";
    std::string s;
    s.reserve(digest.size() * 2);
    for (unsigned char b : digest) {
        s.push_back(kHex[b >> 4]);
        s.push_back(kHex[b & 0xf]);
    }
    return s;
}

}  // namespace codesift
