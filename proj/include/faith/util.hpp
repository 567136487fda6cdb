#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace faith {

// --- hashing ---------------------------------------------------------------

/// SHA-256 of `data`, lowercase hex.
std::string sha256_hex(std::string_view data);

/// SHA-256 of a file's contents; throws Error if the file cannot be read.
std::string sha256_file_hex(const std::filesystem::path& path);

/// First 64 bits of SHA-256(data), for seeding per-item generators.
std::uint64_t stable_hash64(std::string_view data);

// --- encoding --------------------------------------------------------------

std::string base64_encode(std::string_view data);

// --- file IO ---------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

struct PngDims {
    long width = 0;
    long height = 0;
};

/// Width and height from a PNG's IHDR chunk without decoding pixel data.
PngDims png_dimensions(const std::filesystem::path& path);

// --- deterministic randomness ----------------------------------------------

/// mt19937_64 draws are fully specified by the standard; the distribution
/// helpers below avoid std::uniform_*_distribution, whose output is
/// implementation-defined, so sequences are stable across toolchains.
class SeededRng {
  public:
    explicit SeededRng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    /// Unbiased draw in [0, bound) via rejection sampling. bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    /// Uniform double in [0, 1) with 53 bits of precision.
    double unit();

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[below(i)]);
        }
    }

  private:
    std::mt19937_64 gen_;
};

// --- small string helpers --------------------------------------------------

std::string to_lower(std::string_view text);
std::string trim(std::string_view text);
std::string replace_all(std::string_view text, std::string_view from, std::string_view to);

/// Count non-overlapping occurrences of `needle` in `haystack`.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

/// Fixed-format double for CSV/SVG output: shortest form that round-trips,
/// stable across runs.
std::string format_double(double value);

/// Filesystem-safe token: [A-Za-z0-9._-], everything else mapped to '_'.
std::string sanitize_token(std::string_view text);

}  // namespace faith
