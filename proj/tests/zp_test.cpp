#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <random>

#include "forge/zp.hpp"

using namespace forge;
using boost::multiprecision::cpp_int;

static cpp_int to_cpp(u128 v) {
    return (cpp_int(u64(v >> 64)) << 64) + cpp_int(u64(v));
}

static u128 from_cpp(const cpp_int& v) {
    cpp_int lo = v & cpp_int("0xffffffffffffffff");
    cpp_int hi = v >> 64;
    return ((u128)(u64)hi << 64) | (u64)lo;
}

TEST_CASE("decimal round trip") {
    CHECK(u128_to_string(0) == "0");
    u128 big = ((u128)1234567890123456789ULL << 64) | 987654321ULL;
    CHECK(u128_from_string(u128_to_string(big)) == big);
}

TEST_CASE("arithmetic mod 3^40 against bignum oracle") {
    ZpCtx z(3, 40);
    cpp_int m = 1;
    for (int i = 0; i < 40; ++i) m *= 3;
    CHECK(to_cpp(z.modulus()) == m);

    std::mt19937_64 rng(7);
    for (int it = 0; it < 200; ++it) {
        u128 xa = ((u128)rng() << 64 | rng()) % z.modulus();
        u128 xb = ((u128)rng() << 64 | rng()) % z.modulus();
        Zp a = z.from_u128(xa), b = z.from_u128(xb);
        CHECK(z.to_u128(a) == xa);
        CHECK(to_cpp(z.to_u128(z.add(a, b))) == (to_cpp(xa) + to_cpp(xb)) % m);
        CHECK(to_cpp(z.to_u128(z.sub(a, b))) == ((to_cpp(xa) - to_cpp(xb)) % m + m) % m);
        CHECK(to_cpp(z.to_u128(z.mul(a, b))) == (to_cpp(xa) * to_cpp(xb)) % m);
    }
}

TEST_CASE("arithmetic mod 3^60 against bignum oracle") {
    ZpCtx z(3, 60);
    cpp_int m = 1;
    for (int i = 0; i < 60; ++i) m *= 3;
    std::mt19937_64 rng(13);
    for (int it = 0; it < 200; ++it) {
        u128 xa = from_cpp(cpp_int(to_cpp(((u128)rng() << 64) | rng())) % m);
        u128 xb = from_cpp(cpp_int(to_cpp(((u128)rng() << 64) | rng())) % m);
        Zp a = z.from_u128(xa), b = z.from_u128(xb);
        CHECK(to_cpp(z.to_u128(z.mul(a, b))) == (to_cpp(xa) * to_cpp(xb)) % m);
    }
}

TEST_CASE("valuation and exact division by p") {
    ZpCtx z(3, 20);
    Zp x = z.from_int(27 * 5);
    CHECK(z.val(x) == 3);
    CHECK(z.val(z.zero()) == 20);
    // result is defined mod p^(M-3); digits above that are free
    Zp y = z.div_p_exact(x, 3);
    CHECK(z.eq_mod(y, z.from_int(5), 17));
    CHECK_THROWS_AS(z.div_p_exact(z.from_int(5), 1), NotDivisible);
}

TEST_CASE("inverse") {
    ZpCtx z(3, 4); // mod 81
    Zp i2 = z.inv(z.from_int(2));
    CHECK(z.to_u128(i2) == 41);
    ZpCtx z5(5, 20);
    std::mt19937_64 rng(5);
    for (int it = 0; it < 50; ++it) {
        u128 x = (((u128)rng() << 64) | rng()) % z5.modulus();
        if (x % 5 == 0) x += 1;
        Zp a = z5.from_u128(x);
        CHECK(z5.to_u128(z5.mul(a, z5.inv(a))) == 1);
    }
    CHECK_THROWS_AS(z.inv(z.from_int(3)), NotAUnit);
}

TEST_CASE("p = 2 path") {
    ZpCtx z(2, 20);
    Zp a = z.from_int(-1);
    CHECK(z.to_u128(a) == (u128)((1u << 20) - 1));
    CHECK(z.to_u128(z.mul(a, a)) == 1);
    CHECK(z.val(z.from_int(8)) == 3);
}

TEST_CASE("negative string input") {
    ZpCtx z(3, 5); // 243
    CHECK(z.to_u128(z.from_string("-1")) == 242);
}
