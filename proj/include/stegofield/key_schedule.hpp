#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace stegofield {

/// Lower/upper bound (inclusive) of the secret prime pool.
inline constexpr std::uint64_t kPrimePoolMin = 10'000'000ULL;
inline constexpr std::uint64_t kPrimePoolMax = 10'000'000'000ULL;

/// One hash key: d multipliers, one per input coordinate.
struct PrimeKey {
    std::vector<std::uint64_t> primes;

    int dims() const noexcept { return static_cast<int>(primes.size()); }
    friend bool operator==(const PrimeKey&, const PrimeKey&) = default;
};

/// m keys assigned cyclically onto `levels` resolution levels.
struct KeySet {
    std::vector<PrimeKey> keys;
    int levels = 16;

    int size() const noexcept { return static_cast<int>(keys.size()); }
    int dims() const noexcept { return keys.empty() ? 0 : keys.front().dims(); }
    friend bool operator==(const KeySet&, const KeySet&) = default;
};

/// Deterministic for every 64-bit input.
bool is_probable_prime(std::uint64_t n) noexcept;

/// The standard hash multipliers {1, 2654435761, 805459861}, truncated to d.
PrimeKey default_key(int dims);

/// The key set that reproduces the standard (non-stego) encoding.
KeySet default_key_set(int dims, int levels);

PrimeKey generate_key(int dims, std::uint64_t seed);
KeySet generate_key_set(int count, int dims, int levels, std::uint64_t seed);

/// Key for a 1-based level: keys[((level - 1) mod m)].
const PrimeKey& assigned_key(const KeySet& key_set, int level);

/// Throws DataError(InvalidKey) unless every prime is prime, within the pool
/// range, and distinct across the whole set; also checks 1 <= m <= levels.
void validate_secret_key_set(const KeySet& key_set);

std::string format_key_file(const KeySet& key_set);
KeySet parse_key_file(std::string_view text);

void save_key_file(const KeySet& key_set, const std::filesystem::path& path);
KeySet load_key_file(const std::filesystem::path& path);

}  // namespace stegofield
