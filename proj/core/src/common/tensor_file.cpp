#include "ttm/common/tensor_file.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace ttm {
namespace {

constexpr char kMagic[4] = {'T', 'T', 'M', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
constexpr std::uint8_t dtype_code() {
    return std::is_same_v<T, float> ? 0 : 1;
}

template <typename V>
void put(std::string& out, V value) {
    char buf[sizeof(V)];
    std::memcpy(buf, &value, sizeof(V));
    out.append(buf, sizeof(V));
}

template <typename V>
V take(std::string_view& in) {
    if (in.size() < sizeof(V)) throw ValidationError("tensor_file.truncated", "unexpected end of data");
    V v;
    std::memcpy(&v, in.data(), sizeof(V));
    in.remove_prefix(sizeof(V));
    return v;
}

template <typename T>
std::string encode(const Tensor<T>& t) {
    std::string out(kMagic, 4);
    put(out, kVersion);
    put(out, dtype_code<T>());
    put(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put(out, static_cast<std::uint64_t>(d));
    out.append(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(T));
    return out;
}

template <typename T>
Tensor<T> decode(std::string_view in) {
    if (in.size() < 4 || std::memcmp(in.data(), kMagic, 4) != 0) {
        throw ValidationError("tensor_file.magic", "not a tensor container");
    }
    in.remove_prefix(4);
    if (take<std::uint32_t>(in) != kVersion) {
        throw ValidationError("tensor_file.version", "unsupported tensor container version");
    }
    if (take<std::uint8_t>(in) != dtype_code<T>()) {
        throw ValidationError("tensor_file.dtype", "unexpected element type");
    }
    const auto rank = take<std::uint32_t>(in);
    if (rank > 8) throw ValidationError("tensor_file.rank", "rank too large");
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(take<std::uint64_t>(in));
    const std::size_t n = Tensor<T>::element_count(shape);
    if (in.size() != n * sizeof(T)) {
        throw ValidationError("tensor_file.truncated", "payload size does not match shape");
    }
    std::vector<T> values(n);
    std::memcpy(values.data(), in.data(), n * sizeof(T));
    return Tensor<T>(std::move(shape), std::move(values));
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void dump(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw RuntimeError("short write to " + path.string());
}

}  // namespace

std::string encode_tensor(const FloatTensor& t) { return encode(t); }
std::string encode_tensor(const MaskTensor& t) { return encode(t); }
FloatTensor decode_float_tensor(std::string_view bytes) { return decode<float>(bytes); }
MaskTensor decode_mask_tensor(std::string_view bytes) { return decode<std::uint8_t>(bytes); }

void write_tensor(const std::filesystem::path& path, const FloatTensor& t) { dump(path, encode(t)); }
void write_tensor(const std::filesystem::path& path, const MaskTensor& t) { dump(path, encode(t)); }
FloatTensor read_float_tensor(const std::filesystem::path& path) { return decode<float>(slurp(path)); }
MaskTensor read_mask_tensor(const std::filesystem::path& path) {
    return decode<std::uint8_t>(slurp(path));
}

}  // namespace ttm
