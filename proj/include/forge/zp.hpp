#pragma once

#include <cstdint>
#include <string>

#include "forge/errors.hpp"

namespace forge {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

std::string u128_to_string(u128 v);
u128 u128_from_string(const std::string& s);

// A residue mod p^M. For odd p the value is kept in Montgomery form
// (R = 2^128); for p = 2 it is kept plain. Raw values only make sense
// together with the ZpCtx that produced them.
struct Zp {
    u128 v = 0;
};

class ZpCtx {
public:
    ZpCtx() = default;
    ZpCtx(u64 p, int M);

    u64 p() const { return p_; }
    int M() const { return M_; }
    u128 modulus() const { return m_; }
    u128 p_pow(int k) const; // p^k as integer, k <= M

    Zp zero() const { return {}; }
    Zp one() const { return one_; }
    Zp from_int(long long x) const;
    Zp from_u128(u128 x) const; // x taken mod p^M
    u128 to_u128(Zp a) const;   // canonical representative in [0, p^M)

    Zp add(Zp a, Zp b) const;
    Zp sub(Zp a, Zp b) const;
    Zp neg(Zp a) const;
    Zp mul(Zp a, Zp b) const;
    Zp pow(Zp a, u128 e) const;
    Zp inv(Zp a) const; // requires val(a) == 0

    bool is_zero(Zp a) const { return a.v == 0; }
    bool eq(Zp a, Zp b) const { return a.v == b.v; }
    // equality of residues mod p^k
    bool eq_mod(Zp a, Zp b, int k) const;

    // p-adic valuation of the residue, capped at M (val(0) = M)
    int val(Zp a) const;
    // exact division of the residue by p^k; caller is responsible for
    // tracking the precision drop to M - k
    Zp div_p_exact(Zp a, int k) const;

    std::string to_string(Zp a) const { return u128_to_string(to_u128(a)); }
    Zp from_string(const std::string& s) const {
        if (!s.empty() && s[0] == '-') return neg(from_u128(u128_from_string(s.substr(1))));
        return from_u128(u128_from_string(s));
    }

private:
    u64 p_ = 0;
    int M_ = 0;
    u128 m_ = 0;   // p^M
    bool pow2_ = false;
    u64 mp64_ = 0; // -m^{-1} mod 2^64 (odd p)
    u128 r2_ = 0;  // R^2 mod m (odd p)
    Zp one_{};

    u128 redc(const u64 t_in[4]) const;
    u128 mont_mul(u128 a, u128 b) const;
};

} // namespace forge
