#include "forge/okring.hpp"

#include <algorithm>

namespace forge {

namespace {

// F_p[x] helpers for the irreducibility check on m mod p
using Fpoly = std::vector<u64>;

Fpoly fp_trim(Fpoly a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
    return a;
}

Fpoly fp_mulmod(const Fpoly& a, const Fpoly& b, const Fpoly& m, u64 p) {
    std::vector<u64> acc(a.size() + b.size(), 0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            acc[i + j] = (acc[i + j] + a[i] * b[j]) % p;
    // m is monic
    size_t d = m.size() - 1;
    for (size_t i = acc.size(); i-- > d;) {
        u64 c = acc[i] % p;
        if (!c) continue;
        for (size_t j = 0; j < d; ++j)
            acc[i - d + j] = (acc[i - d + j] + (p - m[j] % p) * c) % p;
        acc[i] = 0;
    }
    acc.resize(d);
    return acc;
}

Fpoly fp_powmod_x(u128 e, const Fpoly& m, u64 p) {
    Fpoly r = {1}, b = {0, 1};
    while (e) {
        if (e & 1) r = fp_mulmod(r, b, m, p);
        b = fp_mulmod(b, b, m, p);
        e >>= 1;
    }
    return r;
}

u64 fp_inv(u64 a, u64 p) {
    u64 r = 1, b = a % p, e = p - 2;
    while (e) {
        if (e & 1) r = r * b % p;
        b = b * b % p;
        e >>= 1;
    }
    return r;
}

Fpoly fp_gcd(Fpoly a, Fpoly b, u64 p) {
    a = fp_trim(a);
    b = fp_trim(b);
    while (!b.empty()) {
        // a mod b
        u64 lead = fp_inv(b.back(), p);
        while (a.size() >= b.size()) {
            u64 c = a.back() * lead % p;
            size_t off = a.size() - b.size();
            for (size_t j = 0; j < b.size(); ++j)
                a[off + j] = (a[off + j] + (p - b[j] * c % p)) % p;
            a = fp_trim(a);
            if (a.empty()) break;
        }
        std::swap(a, b);
    }
    return a;
}

bool fp_irreducible(const Fpoly& m, u64 p) {
    int d = (int)m.size() - 1;
    if (d < 1) return false;
    if (d == 1) return true;
    // x^{p^d} = x mod m, and gcd(x^{p^{d/l}} - x, m) = 1 for prime l | d
    u128 pd = 1;
    for (int i = 0; i < d; ++i) pd *= p;
    Fpoly xq = fp_powmod_x(pd, m, p);
    Fpoly x = {0, 1};
    Fpoly diff(std::max(xq.size(), x.size()), 0);
    for (size_t i = 0; i < xq.size(); ++i) diff[i] = xq[i];
    for (size_t i = 0; i < x.size(); ++i) diff[i] = (diff[i] + p - x[i]) % p;
    if (!fp_trim(diff).empty()) return false;
    for (int l = 2; l <= d; ++l) {
        if (d % l) continue;
        bool lprime = true;
        for (int t = 2; t * t <= l; ++t)
            if (l % t == 0) lprime = false;
        if (!lprime) continue;
        u128 pe = 1;
        for (int i = 0; i < d / l; ++i) pe *= p;
        Fpoly xe = fp_powmod_x(pe, m, p);
        Fpoly g(std::max(xe.size(), x.size()), 0);
        for (size_t i = 0; i < xe.size(); ++i) g[i] = xe[i];
        for (size_t i = 0; i < x.size(); ++i) g[i] = (g[i] + p - x[i]) % p;
        Fpoly gg = fp_gcd(g, m, p);
        if (!(gg.size() == 1)) return false;
    }
    return true;
}

} // namespace

OKRing::OKRing(const OKConfig& cfg) : cfg_(cfg), z_(cfg.p, cfg.M) {
    int d = cfg.f_K;
    if (d < 1) throw BadInput("OKRing: f_K must be >= 1");
    if ((int)cfg.m.size() != d + 1 || cfg.m[d] != 1)
        throw BadInput("OKRing: m must be monic of degree f_K");
    Fpoly mbar(d + 1);
    for (int i = 0; i <= d; ++i) {
        long long c = cfg.m[i] % (long long)cfg.p;
        if (c < 0) c += (long long)cfg.p;
        mbar[i] = (u64)c;
    }
    if (!fp_irreducible(mbar, cfg.p))
        throw BadInput("OKRing: m is reducible mod p");
    if (cfg.pi_unit % (long long)cfg.p == 0)
        throw BadInput("OKRing: pi_unit must be a unit of Z_p");

    q_ = 1;
    for (int i = 0; i < d; ++i) q_ *= cfg.p;

    mred_.resize(d);
    for (int i = 0; i < d; ++i) mred_[i] = z_.neg(z_.from_int(cfg.m[i]));

    u_ = from_int(cfg.pi_unit);
    pi_ = mul_int(u_, (long long)cfg.p);
    uinv_ = inv(u_);

    digits_.reserve((size_t)q_);
    std::vector<long long> coords(d, 0);
    for (u128 idx = 0; idx < q_; ++idx) {
        u128 t = idx;
        for (int i = 0; i < d; ++i) {
            coords[i] = (long long)(t % cfg.p);
            t /= cfg.p;
        }
        digits_.push_back(from_coords(coords));
    }
}

OKElem OKRing::zero() const {
    return OKElem{std::vector<Zp>(deg()), M()};
}

OKElem OKRing::one() const {
    OKElem r = zero();
    r.c[0] = z_.one();
    return r;
}

OKElem OKRing::from_int(long long x) const {
    OKElem r = zero();
    r.c[0] = z_.from_int(x);
    return r;
}

OKElem OKRing::from_coords(const std::vector<long long>& coords) const {
    if ((int)coords.size() > deg()) throw BadInput("from_coords: too many coordinates");
    OKElem r = zero();
    for (size_t i = 0; i < coords.size(); ++i) r.c[i] = z_.from_int(coords[i]);
    return r;
}

OKElem OKRing::q_elem() const {
    if (deg() >= M()) return zero(); // q = 0 mod p^M, degenerate configs
    OKElem r = zero();
    r.c[0] = z_.from_u128(z_.p_pow(deg()));
    return r;
}

OKElem OKRing::pi_pow(int k) const {
    OKElem r = one();
    for (int i = 0; i < k; ++i) r = mul(r, pi_);
    return r;
}

OKElem OKRing::add(const OKElem& a, const OKElem& b) const {
    OKElem r = zero();
    for (int i = 0; i < deg(); ++i) r.c[i] = z_.add(a.c[i], b.c[i]);
    r.prec = std::min(a.prec, b.prec);
    return r;
}

OKElem OKRing::sub(const OKElem& a, const OKElem& b) const {
    OKElem r = zero();
    for (int i = 0; i < deg(); ++i) r.c[i] = z_.sub(a.c[i], b.c[i]);
    r.prec = std::min(a.prec, b.prec);
    return r;
}

OKElem OKRing::neg(const OKElem& a) const {
    OKElem r = zero();
    for (int i = 0; i < deg(); ++i) r.c[i] = z_.neg(a.c[i]);
    r.prec = a.prec;
    return r;
}

void OKRing::reduce(std::vector<Zp>& acc) const {
    int d = deg();
    for (int i = (int)acc.size(); i-- > d;) {
        Zp c = acc[i];
        if (z_.is_zero(c)) continue;
        for (int j = 0; j < d; ++j)
            acc[i - d + j] = z_.add(acc[i - d + j], z_.mul(c, mred_[j]));
        acc[i] = Zp{};
    }
    acc.resize(d);
}

void OKRing::mul_raw(const Zp* a, const Zp* b, Zp* out, Zp* scratch) const {
    int d = deg();
    if (d == 1) {
        out[0] = z_.mul(a[0], b[0]);
        return;
    }
    // scratch must hold 2d-1 entries
    for (int i = 0; i < 2 * d - 1; ++i) scratch[i] = Zp{};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            scratch[i + j] = z_.add(scratch[i + j], z_.mul(a[i], b[j]));
    for (int i = 2 * d - 2; i >= d; --i) {
        Zp c = scratch[i];
        if (z_.is_zero(c)) continue;
        for (int j = 0; j < d; ++j)
            scratch[i - d + j] = z_.add(scratch[i - d + j], z_.mul(c, mred_[j]));
    }
    for (int i = 0; i < d; ++i) out[i] = scratch[i];
}

OKElem OKRing::mul(const OKElem& a, const OKElem& b) const {
    OKElem r = zero();
    std::vector<Zp> scratch(2 * deg());
    mul_raw(a.c.data(), b.c.data(), r.c.data(), scratch.data());
    // uncertainty is always integral, so a junk factor (prec <= 0) still
    // contributes at worst a unit-sized error
    int va = vfloor(a), vb = vfloor(b);
    int pa = std::max(a.prec, 0), pb = std::max(b.prec, 0);
    r.prec = std::min({pa + vb, pb + va, M()});
    return r;
}

OKElem OKRing::mul_int(const OKElem& a, long long k) const {
    return mul(a, from_int(k));
}

OKElem OKRing::pow(const OKElem& a, u128 e) const {
    OKElem r = one(), base = a;
    while (e) {
        if (e & 1) r = mul(r, base);
        base = mul(base, base);
        e >>= 1;
    }
    return r;
}

std::optional<int> OKRing::valuation(const OKElem& x) const {
    int v = M();
    for (int i = 0; i < deg(); ++i) v = std::min(v, z_.val(x.c[i]));
    if (v >= x.prec) return std::nullopt;
    return v;
}

int OKRing::vfloor(const OKElem& x) const {
    int v = M();
    for (int i = 0; i < deg(); ++i) v = std::min(v, z_.val(x.c[i]));
    return std::min(v, std::max(x.prec, 0));
}

OKElem OKRing::div_by_pi(const OKElem& x, int k) const {
    if (k == 0) return x;
    if (k < 0) throw BadInput("div_by_pi: negative exponent");
    if (x.prec - k <= 0)
        throw PrecisionExhausted("div_by_pi: no precision left");
    int v = M();
    for (int i = 0; i < deg(); ++i) v = std::min(v, z_.val(x.c[i]));
    if (v < k) throw NotDivisible("div_by_pi: valuation too small");
    OKElem r = zero();
    for (int i = 0; i < deg(); ++i) r.c[i] = z_.div_p_exact(x.c[i], k);
    r.prec = x.prec - k;
    OKElem ui = pow(uinv_, (u128)k);
    r = mul(r, ui);
    r.prec = x.prec - k;
    return r;
}

OKElem OKRing::div_by_pi_relaxed(const OKElem& x, int k) const {
    if (k <= 0) return x;
    int v = M();
    for (int i = 0; i < deg(); ++i) v = std::min(v, z_.val(x.c[i]));
    if (v >= k) {
        OKElem r = zero();
        for (int i = 0; i < deg(); ++i) r.c[i] = z_.div_p_exact(x.c[i], k);
        r = mul(r, pow(uinv_, (u128)k));
        r.prec = x.prec - k;
        return r;
    }
    if (x.prec <= k) {
        OKElem r = zero();
        r.prec = x.prec - k;
        return r;
    }
    throw NotDivisible("div_by_pi: valuation too small at working precision");
}

OKElem OKRing::inv(const OKElem& x) const {
    int v = M();
    for (int i = 0; i < deg(); ++i) v = std::min(v, z_.val(x.c[i]));
    if (v > 0 || x.prec <= 0) throw NotAUnit("inv: not a unit at this precision");
    // start from the residue-field inverse x^{q-2}, then Hensel lifting
    OKElem y = pow(x, q_ >= 2 ? q_ - 2 : 0);
    OKElem two = from_int(2);
    for (int precision = 1; precision < M(); precision *= 2) {
        OKElem t = sub(two, mul(x, y));
        y = mul(y, t);
    }
    y.prec = x.prec;
    return y;
}

bool OKRing::is_zero_mod(const OKElem& x, int k) const {
    if (k <= 0) return true;
    for (int i = 0; i < deg(); ++i)
        if (z_.val(x.c[i]) < std::min(k, M())) return false;
    return true;
}

bool OKRing::is_zero_at_prec(const OKElem& x) const {
    return is_zero_mod(x, x.prec);
}

bool OKRing::eq(const OKElem& a, const OKElem& b) const {
    int prec = std::min(a.prec, b.prec);
    if (prec <= 0)
        throw PrecisionExhausted("eq: comparison below working precision");
    return is_zero_mod(sub(a, b), prec);
}

std::vector<OKElem> OKRing::digit_reps() const {
    return digits_;
}

size_t OKRing::residue_index(const OKElem& x) const {
    size_t idx = 0, mult = 1;
    for (int i = 0; i < deg(); ++i) {
        u64 r = (u64)(z_.to_u128(x.c[i]) % p());
        idx += (size_t)r * mult;
        mult *= (size_t)p();
    }
    return idx;
}

const OKElem& OKRing::digit_for(const OKElem& x) const {
    return digits_[residue_index(x)];
}

} // namespace forge
