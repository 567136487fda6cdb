#include "faith/util.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "faith/error.hpp"

namespace faith {

namespace {

std::array<unsigned char, 32> sha256_raw(std::string_view data) {
    std::array<unsigned char, 32> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != digest.size()) {
        raise("sha256 digest failed");
    }
    return digest;
}

std::string to_hex(const unsigned char* bytes, std::size_t n) {
    static const char* kHex = "0123456789abcdef";
    std::string out;
    out.reserve(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(kHex[bytes[i] >> 4]);
        out.push_back(kHex[bytes[i] & 0xf]);
    }
    return out;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
    auto digest = sha256_raw(data);
    return to_hex(digest.data(), digest.size());
}

std::string sha256_file_hex(const std::filesystem::path& path) {
    return sha256_hex(read_file(path));
}

std::uint64_t stable_hash64(std::string_view data) {
    auto digest = sha256_raw(data);
    std::uint64_t value = 0;
    for (int i = 0; i < 8; ++i) {
        value = (value << 8) | digest[static_cast<std::size_t>(i)];
    }
    return value;
}

std::string base64_encode(std::string_view data) {
    static const char* kAlphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= data.size()) {
        std::uint32_t chunk = (static_cast<unsigned char>(data[i]) << 16) |
                              (static_cast<unsigned char>(data[i + 1]) << 8) |
                              static_cast<unsigned char>(data[i + 2]);
        out.push_back(kAlphabet[(chunk >> 18) & 63]);
        out.push_back(kAlphabet[(chunk >> 12) & 63]);
        out.push_back(kAlphabet[(chunk >> 6) & 63]);
        out.push_back(kAlphabet[chunk & 63]);
        i += 3;
    }
    const std::size_t rest = data.size() - i;
    if (rest == 1) {
        std::uint32_t chunk = static_cast<unsigned char>(data[i]) << 16;
        out.push_back(kAlphabet[(chunk >> 18) & 63]);
        out.push_back(kAlphabet[(chunk >> 12) & 63]);
        out.append("==");
    } else if (rest == 2) {
        std::uint32_t chunk = (static_cast<unsigned char>(data[i]) << 16) |
                              (static_cast<unsigned char>(data[i + 1]) << 8);
        out.push_back(kAlphabet[(chunk >> 18) & 63]);
        out.push_back(kAlphabet[(chunk >> 12) & 63]);
        out.push_back(kAlphabet[(chunk >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open file for reading: ", path.string());
    std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    require(!in.bad(), "error while reading file: ", path.string());
    return contents;
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), "cannot open file for writing: ", path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    require(out.good(), "error while writing file: ", path.string());
}

PngDims png_dimensions(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open image: ", path.string());
    std::array<unsigned char, 24> header{};
    in.read(reinterpret_cast<char*>(header.data()), header.size());
    require(in.gcount() == static_cast<std::streamsize>(header.size()),
            "not a PNG (truncated header): ", path.string());
    static const std::array<unsigned char, 8> kSignature = {0x89, 'P', 'N', 'G',
                                                            0x0d, 0x0a, 0x1a, 0x0a};
    require(std::equal(kSignature.begin(), kSignature.end(), header.begin()),
            "not a PNG (bad signature): ", path.string());
    require(std::memcmp(header.data() + 12, "IHDR", 4) == 0,
            "not a PNG (missing IHDR): ", path.string());
    const auto read_be32 = [&](std::size_t offset) {
        return (static_cast<long>(header[offset]) << 24) |
               (static_cast<long>(header[offset + 1]) << 16) |
               (static_cast<long>(header[offset + 2]) << 8) |
               static_cast<long>(header[offset + 3]);
    };
    PngDims dims{read_be32(16), read_be32(20)};
    require(dims.width > 0 && dims.height > 0, "PNG has empty dimensions: ", path.string());
    return dims;
}

std::uint64_t SeededRng::below(std::uint64_t bound) {
    if (bound == 0) {
        raise("SeededRng::below called with bound 0");
    }
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw;
    do {
        draw = gen_();
    } while (draw >= limit);
    return draw % bound;
}

double SeededRng::unit() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

std::string to_lower(std::string_view text) {
    std::string out(text);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return out;
}

std::string trim(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) {
        ++begin;
    }
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) {
        --end;
    }
    return std::string(text.substr(begin, end - begin));
}

std::string replace_all(std::string_view text, std::string_view from, std::string_view to) {
    if (from.empty()) {
        return std::string(text);
    }
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (true) {
        const std::size_t hit = text.find(from, pos);
        if (hit == std::string_view::npos) {
            out.append(text.substr(pos));
            return out;
        }
        out.append(text.substr(pos, hit - pos));
        out.append(to);
        pos = hit + from.size();
    }
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) {
        return 0;
    }
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc()) {
        raise("format_double failed");
    }
    return std::string(buf.data(), end);
}

std::string sanitize_token(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
        out.push_back(ok ? c : '_');
    }
    return out;
}

}  // namespace faith
