#include <doctest.h>

#include <stdexcept>

#include <set>

#include "stegofield/error.hpp"
#include "stegofield/key_schedule.hpp"

using namespace stegofield;

namespace {

bool trial_division_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

}  // namespace

TEST_CASE("default key") {
    CHECK(default_key(3).primes == std::vector<std::uint64_t>{1, 2654435761ULL, 805459861ULL});
    CHECK(default_key(2).primes == std::vector<std::uint64_t>{1, 2654435761ULL});
    CHECK_THROWS_AS(default_key(5), std::invalid_argument);
    CHECK_THROWS_AS(default_key(1), std::invalid_argument);
}

TEST_CASE("primality") {
    CHECK(is_probable_prime(2654435761ULL));
    CHECK(is_probable_prime(805459861ULL));
    CHECK_FALSE(is_probable_prime(1));
    CHECK_FALSE(is_probable_prime(0));
    CHECK_FALSE(is_probable_prime(10'000'000'000ULL));
    CHECK(is_probable_prime(2));
    CHECK(is_probable_prime(18446744073709551557ULL));  // largest 64-bit prime
    CHECK_FALSE(is_probable_prime(3215031751ULL));       // strong pseudoprime to bases 2, 3, 5, 7
    CHECK_FALSE(is_probable_prime(3825123056546413051ULL));
    for (std::uint64_t n = 0; n < 20000; ++n) CHECK(is_probable_prime(n) == trial_division_prime(n));
    for (std::uint64_t n = 10'000'000; n < 10'002'000; ++n) CHECK(is_probable_prime(n) == trial_division_prime(n));
}

TEST_CASE("generate_key postconditions and determinism") {
    const PrimeKey a = generate_key(3, 42), b = generate_key(3, 42);
    CHECK(a == b);
    std::set<std::vector<std::uint64_t>> seen;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const PrimeKey k = generate_key(3, seed);
        REQUIRE(k.dims() == 3);
        for (std::uint64_t p : k.primes) {
            CHECK(p >= kPrimePoolMin);
            CHECK(p <= kPrimePoolMax);
            CHECK(is_probable_prime(p));
        }
        CHECK(std::set<std::uint64_t>(k.primes.begin(), k.primes.end()).size() == 3);
        seen.insert(k.primes);
    }
    CHECK(seen.size() == 100);
    CHECK(generate_key(2, 5).dims() == 2);
    CHECK_THROWS_AS(generate_key(4, 1), std::invalid_argument);
}

TEST_CASE("sample secret key validates") {
    KeySet ks{{PrimeKey{{54857899ULL, 1455645677ULL, 5487678709ULL}}}, 16};
    CHECK_NOTHROW(validate_secret_key_set(ks));
}

TEST_CASE("generate_key_set") {
    const KeySet one = generate_key_set(1, 3, 16, 9);
    REQUIRE(one.size() == 1);
    CHECK(one.keys[0] == generate_key(3, 9));

    const KeySet many = generate_key_set(16, 3, 16, 3);
    std::set<std::uint64_t> primes;
    for (const auto& k : many.keys) primes.insert(k.primes.begin(), k.primes.end());
    CHECK(primes.size() == 48);
    CHECK_NOTHROW(validate_secret_key_set(many));
    CHECK(generate_key_set(16, 3, 16, 3) == many);

    CHECK_THROWS_AS(generate_key_set(0, 3, 16, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_key_set(17, 3, 16, 1), std::invalid_argument);
}

TEST_CASE("assigned_key is cyclic") {
    for (int m : {1, 2, 4, 8, 16}) {
        const KeySet ks = generate_key_set(m, 3, 16, static_cast<std::uint64_t>(m));
        for (int level = 1; level <= 16; ++level)
            CHECK(assigned_key(ks, level) == ks.keys[static_cast<std::size_t>((level - 1) % m)]);
    }
    const KeySet four = generate_key_set(4, 3, 16, 1);
    CHECK(assigned_key(four, 5) == four.keys[0]);
    const KeySet two = generate_key_set(2, 3, 16, 1);
    CHECK(assigned_key(two, 4) == two.keys[1]);
    CHECK_THROWS_AS(assigned_key(two, 0), std::out_of_range);
    CHECK_THROWS_AS(assigned_key(two, 17), std::out_of_range);
}

TEST_CASE("secret key validation") {
    auto invalid = [](const KeySet& ks) {
        try {
            validate_secret_key_set(ks);
        } catch (const DataError& e) {
            return e.kind() == DataError::Kind::InvalidKey;
        }
        return false;
    };
    CHECK(invalid(KeySet{{PrimeKey{{54857899ULL, 1455645677ULL, 5487678708ULL}}}, 16}));  // composite
    CHECK_FALSE(invalid(KeySet{{PrimeKey{{54857899ULL, 1455645677ULL, 2654435761ULL}}}, 16}));
    CHECK(invalid(KeySet{{PrimeKey{{7ULL, 1455645677ULL, 5487678709ULL}}}, 16}));         // below range
    CHECK(invalid(KeySet{{PrimeKey{{54857899ULL, 54857899ULL, 5487678709ULL}}}, 16}));    // repeated
    CHECK(invalid(KeySet{{}, 16}));
}

TEST_CASE("key file round trip and errors") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const KeySet ks = generate_key_set(1 + static_cast<int>(seed % 4), seed % 2 ? 2 : 3, 16, seed);
        CHECK(parse_key_file(format_key_file(ks)) == ks);
    }
    CHECK(parse_key_file("# comment\nd=3 m=1 L=16\n54857899 1455645677 5487678709  # sample\n") ==
          KeySet{{PrimeKey{{54857899ULL, 1455645677ULL, 5487678709ULL}}}, 16});

    auto rejects = [](const std::string& text) {
        try {
            parse_key_file(text);
        } catch (const DataError&) {
            return true;
        }
        return false;
    };
    CHECK(rejects("d=3 m=1 L=16\n54857899 1455645677 5487678708\n"));  // composite
    CHECK(rejects("d=3 m=1 L=16\n54857899 1455645677 5487678709x\n"));
    CHECK(rejects("d=3 m=1 L=16\n54857899 1455645677\n"));
    CHECK(rejects("d=3 m=2 L=16\n54857899 1455645677 5487678709\n"));
    CHECK(rejects("d=3 m=1 L=16\n54857899 1455645677 5487678709\n12\n"));
    CHECK(rejects("d=3 m=1 L=16 extra\n54857899 1455645677 5487678709\n"));
    CHECK(rejects("d=3 m=1 L=16\n54857899 1455645677 5487678709 \xc3\xa9\n"));
    CHECK(rejects(""));

    std::string seventeen = "d=3 m=17 L=16\n";
    const KeySet big = generate_key_set(16, 3, 16, 77);
    for (const auto& k : big.keys) seventeen += std::to_string(k.primes[0]) + " " + std::to_string(k.primes[1]) + " " +
                                                std::to_string(k.primes[2]) + "\n";
    seventeen += "54857899 1455645677 5487678709\n";
    CHECK(rejects(seventeen));
}
