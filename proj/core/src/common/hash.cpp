#include "ttm/common/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <memory>

namespace ttm {
namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
            throw RuntimeError("sha256: digest init failed");
        }
    }

    void update(const void* bytes, std::size_t n) {
        if (n == 0) return;
        if (EVP_DigestUpdate(ctx_.get(), bytes, n) != 1) throw RuntimeError("sha256: update failed");
    }

    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) {
            throw RuntimeError("sha256: final failed");
        }
        std::string out;
        out.reserve(len * 2);
        char buf[3];
        for (unsigned int i = 0; i < len; ++i) {
            std::snprintf(buf, sizeof buf, "%02x", md[i]);
            out += buf;
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_hex(std::span<const unsigned char> bytes) {
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

std::string sha256_hex(std::string_view text) {
    Sha256 h;
    h.update(text.data(), text.size());
    return h.hex();
}

template <typename T>
std::string content_hash(const Tensor<T>& t) {
    Sha256 h;
    const std::uint64_t rank = t.rank();
    h.update(&rank, sizeof rank);
    for (std::size_t d : t.shape()) {
        const std::uint64_t v = d;
        h.update(&v, sizeof v);
    }
    h.update(t.data(), t.size() * sizeof(T));
    return h.hex();
}

template std::string content_hash<float>(const Tensor<float>&);
template std::string content_hash<std::uint8_t>(const Tensor<std::uint8_t>&);

}  // namespace ttm
