#include "stegofield/key_schedule.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "stegofield/error.hpp"
#include "stegofield/random.hpp"

namespace stegofield {
namespace {

using u128 = unsigned __int128;

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    std::uint64_t result = 1;
    base %= m;
    while (exp > 0) {
        if (exp & 1) result = mul_mod(result, base, m);
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    return result;
}

void check_dims(int dims) {
    if (dims != 2 && dims != 3)
        throw std::invalid_argument("unsupported key dimensionality " + std::to_string(dims) +
                                    " (expected 2 or 3)");
}

[[noreturn]] void key_error(const std::string& what) {
    throw DataError(DataError::Kind::InvalidKey, what);
}

constexpr int kMaxDraws = 1'000'000;

std::uint64_t draw_prime(Rng& rng) {
    for (int i = 0; i < kMaxDraws; ++i) {
        const std::uint64_t candidate = uniform_between(rng, kPrimePoolMin, kPrimePoolMax);
        if (is_probable_prime(candidate)) return candidate;
    }
    throw std::runtime_error("prime sampling exceeded retry cap");
}

}  // namespace

bool is_probable_prime(std::uint64_t n) noexcept {
    if (n < 2) return false;
    // These twelve bases are a complete witness set below 3.3e24.
    static constexpr std::array<std::uint64_t, 12> kBases{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (std::uint64_t p : kBases) {
        if (n % p == 0) return n == p;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (std::uint64_t a : kBases) {
        std::uint64_t x = pow_mod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mul_mod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

PrimeKey default_key(int dims) {
    check_dims(dims);
    PrimeKey key{{1ULL, 2654435761ULL, 805459861ULL}};
    key.primes.resize(static_cast<std::size_t>(dims));
    return key;
}

KeySet default_key_set(int dims, int levels) {
    if (levels < 1) throw std::invalid_argument("levels must be >= 1");
    return KeySet{{default_key(dims)}, levels};
}

PrimeKey generate_key(int dims, std::uint64_t seed) {
    check_dims(dims);
    Rng rng(seed);
    PrimeKey key;
    while (key.dims() < dims) {
        const std::uint64_t p = draw_prime(rng);
        if (std::find(key.primes.begin(), key.primes.end(), p) == key.primes.end())
            key.primes.push_back(p);
    }
    return key;
}

KeySet generate_key_set(int count, int dims, int levels, std::uint64_t seed) {
    check_dims(dims);
    if (levels < 1) throw std::invalid_argument("levels must be >= 1");
    if (count < 1 || count > levels)
        throw std::invalid_argument("key count " + std::to_string(count) + " outside [1, " +
                                    std::to_string(levels) + "]");
    if (count == 1) return KeySet{{generate_key(dims, seed)}, levels};

    Rng rng(seed);
    std::set<std::uint64_t> used;
    KeySet set{{}, levels};
    for (int k = 0; k < count; ++k) {
        PrimeKey key;
        while (key.dims() < dims) {
            const std::uint64_t p = draw_prime(rng);
            if (used.insert(p).second) key.primes.push_back(p);
        }
        set.keys.push_back(std::move(key));
    }
    return set;
}

const PrimeKey& assigned_key(const KeySet& key_set, int level) {
    if (key_set.keys.empty()) throw std::invalid_argument("empty key set");
    if (level < 1 || level > key_set.levels)
        throw std::out_of_range("level " + std::to_string(level) + " outside [1, " +
                                std::to_string(key_set.levels) + "]");
    const int m = key_set.size();
    return key_set.keys[static_cast<std::size_t>((level - 1) % m)];
}

void validate_secret_key_set(const KeySet& key_set) {
    const int m = key_set.size();
    if (m < 1 || m > key_set.levels)
        key_error("key count " + std::to_string(m) + " outside [1, " + std::to_string(key_set.levels) + "]");
    const int dims = key_set.dims();
    if (dims != 2 && dims != 3) key_error("key dimensionality must be 2 or 3");
    std::set<std::uint64_t> seen;
    for (const PrimeKey& key : key_set.keys) {
        if (key.dims() != dims) key_error("keys in a set must share one dimensionality");
        for (std::uint64_t p : key.primes) {
            if (p < kPrimePoolMin || p > kPrimePoolMax)
                key_error("key element " + std::to_string(p) + " outside [1e7, 1e10]");
            if (!is_probable_prime(p)) key_error("key element " + std::to_string(p) + " is not prime");
            if (!seen.insert(p).second) key_error("key element " + std::to_string(p) + " repeated");
        }
    }
}

std::string format_key_file(const KeySet& key_set) {
    std::ostringstream out;
    out << "d=" << key_set.dims() << " m=" << key_set.size() << " L=" << key_set.levels << '\n';
    for (const PrimeKey& key : key_set.keys) {
        for (std::size_t i = 0; i < key.primes.size(); ++i) out << (i ? " " : "") << key.primes[i];
        out << '\n';
    }
    return out.str();
}

namespace {

std::vector<std::string_view> tokens_of(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

std::uint64_t parse_u64(std::string_view text) {
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw DataError(DataError::Kind::Format, "key file: bad integer '" + std::string(text) + "'");
    return value;
}

int parse_header_field(std::string_view token, std::string_view name) {
    if (token.substr(0, name.size()) != name)
        throw DataError(DataError::Kind::Format, "key file: expected '" + std::string(name) + "'");
    return static_cast<int>(parse_u64(token.substr(name.size())));
}

}  // namespace

KeySet parse_key_file(std::string_view text) {
    std::vector<std::vector<std::string_view>> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        for (char c : line) {
            if (static_cast<unsigned char>(c) > 0x7f)
                throw DataError(DataError::Kind::Format, "key file: non-ASCII byte");
        }
        auto tokens = tokens_of(line);
        if (!tokens.empty()) lines.push_back(std::move(tokens));
        pos = end + 1;
    }
    if (lines.empty()) throw DataError(DataError::Kind::Format, "key file: missing header");

    const auto& header = lines.front();
    if (header.size() != 3) throw DataError(DataError::Kind::Format, "key file: header must be 'd=<d> m=<m> L=<L>'");
    const int dims = parse_header_field(header[0], "d=");
    const int m = parse_header_field(header[1], "m=");
    const int levels = parse_header_field(header[2], "L=");
    if (dims != 2 && dims != 3) throw DataError(DataError::Kind::Format, "key file: d must be 2 or 3");
    if (levels < 1) throw DataError(DataError::Kind::Format, "key file: L must be >= 1");
    if (m < 1 || m > levels) key_error("key file: m=" + std::to_string(m) + " outside [1, L]");
    if (static_cast<int>(lines.size()) != m + 1)
        throw DataError(DataError::Kind::Format, "key file: expected " + std::to_string(m) + " key lines, found " +
                                                      std::to_string(lines.size() - 1));

    KeySet set{{}, levels};
    for (int k = 1; k <= m; ++k) {
        const auto& row = lines[static_cast<std::size_t>(k)];
        if (static_cast<int>(row.size()) != dims)
            throw DataError(DataError::Kind::Format, "key file: line " + std::to_string(k) + " needs " +
                                                          std::to_string(dims) + " primes");
        PrimeKey key;
        for (std::string_view tok : row) key.primes.push_back(parse_u64(tok));
        set.keys.push_back(std::move(key));
    }
    validate_secret_key_set(set);
    return set;
}

void save_key_file(const KeySet& key_set, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(DataError::Kind::Io, "cannot write key file " + path.string());
    out << format_key_file(key_set);
    if (!out) throw DataError(DataError::Kind::Io, "failed writing key file " + path.string());
}

KeySet load_key_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(DataError::Kind::Io, "cannot read key file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_key_file(buffer.str());
}

}  // namespace stegofield
