#include "forge/zp.hpp"

namespace forge {

std::string u128_to_string(u128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
        s.push_back(char('0' + (unsigned)(v % 10)));
        v /= 10;
    }
    return {s.rbegin(), s.rend()};
}

u128 u128_from_string(const std::string& s) {
    u128 v = 0;
    size_t i = 0;
    if (i < s.size() && s[i] == '+') ++i;
    if (i == s.size()) throw BadInput("empty integer literal");
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') throw BadInput("bad integer literal: " + s);
        v = v * 10 + (u128)(s[i] - '0');
    }
    return v;
}

static void mul_128_128(u128 a, u128 b, u64 out[4]) {
    u64 a0 = (u64)a, a1 = (u64)(a >> 64);
    u64 b0 = (u64)b, b1 = (u64)(b >> 64);
    u128 p00 = (u128)a0 * b0;
    u128 p01 = (u128)a0 * b1;
    u128 p10 = (u128)a1 * b0;
    u128 p11 = (u128)a1 * b1;
    out[0] = (u64)p00;
    u128 mid = (p00 >> 64) + (u64)p01 + (u64)p10;
    out[1] = (u64)mid;
    u128 hi = (mid >> 64) + (p01 >> 64) + (p10 >> 64) + (u64)p11;
    out[2] = (u64)hi;
    out[3] = (u64)(hi >> 64) + (u64)(p11 >> 64);
}

// inverse of odd x mod 2^64
static u64 inv64(u64 x) {
    u64 y = 1;
    for (int i = 0; i < 6; ++i) y *= 2 - x * y;
    return y;
}

ZpCtx::ZpCtx(u64 p, int M) : p_(p), M_(M) {
    if (p < 2 || M < 1) throw BadInput("ZpCtx: need p >= 2, M >= 1");
    // m = p^M, checked to stay below 2^127 so products fit the REDC path
    u128 lim = ((u128)1 << 127);
    u128 m = 1;
    for (int i = 0; i < M; ++i) {
        if (m > lim / p) throw BadInput("ZpCtx: p^M exceeds 127 bits");
        m *= p;
    }
    m_ = m;
    pow2_ = (p == 2);
    if (pow2_) {
        if (M > 62) throw BadInput("ZpCtx: p = 2 supports M <= 62");
        one_ = Zp{1};
        return;
    }
    mp64_ = (u64)(0 - inv64((u64)m));
    // r2 = 2^256 mod m, by doubling 2^128 mod m another 128 times
    u128 r = ((u128)0 - m) % m; // 2^128 mod m
    for (int i = 0; i < 128; ++i) {
        r <<= 1;
        if (r >= m_) r -= m_;
    }
    r2_ = r;
    one_ = from_u128(1);
}

u128 ZpCtx::p_pow(int k) const {
    u128 r = 1;
    for (int i = 0; i < k; ++i) r *= p_;
    return r;
}

u128 ZpCtx::redc(const u64 t_in[4]) const {
    u64 t[5] = {t_in[0], t_in[1], t_in[2], t_in[3], 0};
    u64 m0 = (u64)m_, m1 = (u64)(m_ >> 64);
    for (int i = 0; i < 2; ++i) {
        u64 mi = t[i] * mp64_;
        u128 x = (u128)mi * m0 + t[i];
        u128 c = x >> 64;
        x = (u128)mi * m1 + t[i + 1] + c;
        t[i + 1] = (u64)x;
        c = x >> 64;
        for (int j = i + 2; j < 5 && c; ++j) {
            x = (u128)t[j] + c;
            t[j] = (u64)x;
            c = x >> 64;
        }
    }
    u128 r = ((u128)t[3] << 64) | t[2];
    if (t[4] || r >= m_) r -= m_;
    return r;
}

u128 ZpCtx::mont_mul(u128 a, u128 b) const {
    u64 t[4];
    mul_128_128(a, b, t);
    return redc(t);
}

Zp ZpCtx::from_u128(u128 x) const {
    x %= m_;
    if (pow2_) return Zp{x};
    return Zp{mont_mul(x, r2_)};
}

Zp ZpCtx::from_int(long long x) const {
    if (x >= 0) return from_u128((u128)x);
    u128 mag = (u128)(-(x + 1)) + 1;
    return neg(from_u128(mag));
}

u128 ZpCtx::to_u128(Zp a) const {
    if (pow2_) return a.v;
    u64 t[4] = {(u64)a.v, (u64)(a.v >> 64), 0, 0};
    return redc(t);
}

Zp ZpCtx::add(Zp a, Zp b) const {
    u128 s = a.v + b.v;
    if (s >= m_ || s < a.v) s -= m_;
    return Zp{s};
}

Zp ZpCtx::sub(Zp a, Zp b) const {
    return Zp{a.v >= b.v ? a.v - b.v : a.v + (m_ - b.v)};
}

Zp ZpCtx::neg(Zp a) const {
    return Zp{a.v == 0 ? (u128)0 : m_ - a.v};
}

Zp ZpCtx::mul(Zp a, Zp b) const {
    if (pow2_) return Zp{(a.v * b.v) % m_};
    return Zp{mont_mul(a.v, b.v)};
}

Zp ZpCtx::pow(Zp a, u128 e) const {
    Zp r = one_, base = a;
    while (e) {
        if (e & 1) r = mul(r, base);
        base = mul(base, base);
        e >>= 1;
    }
    return r;
}

Zp ZpCtx::inv(Zp a) const {
    if (val(a) != 0) throw NotAUnit("inverse of a non-unit");
    // x^(phi - 1), phi = p^(M-1) (p - 1)
    u128 phi = p_pow(M_ - 1) * (p_ - 1);
    return pow(a, phi - 1);
}

bool ZpCtx::eq_mod(Zp a, Zp b, int k) const {
    if (k <= 0) return true;
    if (k >= M_) return a.v == b.v;
    Zp d = sub(a, b);
    return d.v % p_pow(k) == 0;
}

int ZpCtx::val(Zp a) const {
    if (a.v == 0) return M_;
    // valuation of the stored form equals the valuation of the value
    // (the Montgomery factor R is prime to p)
    int v = 0;
    u128 x = a.v;
    while (v < M_ && x % p_ == 0) {
        x /= p_;
        ++v;
    }
    return v;
}

Zp ZpCtx::div_p_exact(Zp a, int k) const {
    u128 pk = p_pow(k);
    if (a.v % pk != 0) throw NotDivisible("div_p_exact: residue not divisible");
    return Zp{a.v / pk};
}

} // namespace forge
