#pragma once

#include <optional>
#include <vector>

#include "forge/zp.hpp"

namespace forge {

// Coefficient ring O_K for K/Q_p unramified of degree f_K, modeled as
// Z[t]/(p^M, m(t)) with m monic and irreducible mod p. The uniformizer is
// pi = u*p for a unit u of Z_p, so the p-adic valuation is the pi-adic one.
struct OKConfig {
    u64 p = 3;
    int f_K = 1;
    std::vector<long long> m = {0, 1}; // coefficients, degree f_K, monic
    long long pi_unit = 1;
    int M = 24;
};

// prec: the value is determined mod p^prec. Coordinates are definite
// residues mod p^M; digits above prec carry no information.
struct OKElem {
    std::vector<Zp> c;
    int prec = 0;
};

class OKRing {
public:
    explicit OKRing(const OKConfig& cfg);

    const OKConfig& cfg() const { return cfg_; }
    const ZpCtx& zctx() const { return z_; }
    u64 p() const { return z_.p(); }
    int M() const { return z_.M(); }
    int deg() const { return cfg_.f_K; }
    u128 q() const { return q_; }

    OKElem zero() const;
    OKElem one() const;
    OKElem from_int(long long x) const;
    OKElem from_coords(const std::vector<long long>& coords) const;
    OKElem pi() const { return pi_; }
    OKElem pi_unit() const { return u_; }      // u with pi = u * p
    OKElem pi_unit_inv() const { return uinv_; }
    OKElem q_elem() const;                     // q = p^{f_K}
    OKElem pi_pow(int k) const;

    OKElem add(const OKElem& a, const OKElem& b) const;
    OKElem sub(const OKElem& a, const OKElem& b) const;
    OKElem neg(const OKElem& a) const;
    OKElem mul(const OKElem& a, const OKElem& b) const;
    OKElem mul_int(const OKElem& a, long long k) const;
    OKElem pow(const OKElem& a, u128 e) const;

    // min p-adic valuation over coordinates; nullopt when x = 0 mod p^prec
    std::optional<int> valuation(const OKElem& x) const;
    // lower bound min(valuation, prec) used by precision tracking
    int vfloor(const OKElem& x) const;

    // y with pi^k y = x; prec drops by k
    OKElem div_by_pi(const OKElem& x, int k) const;
    // as div_by_pi, but a coefficient with no information below pi^k becomes
    // a junk zero (negative precision) instead of raising
    OKElem div_by_pi_relaxed(const OKElem& x, int k) const;
    OKElem inv(const OKElem& x) const;

    bool is_zero_at_prec(const OKElem& x) const;   // x = 0 mod p^prec(x)
    bool is_zero_mod(const OKElem& x, int k) const; // x = 0 mod p^k
    // equality at the lower of the two precisions; raises PrecisionExhausted
    // when that precision is <= 0
    bool eq(const OKElem& a, const OKElem& b) const;

    // q representatives of O_K/pi: zero plus q-1 units, coordinates in
    // {0,...,p-1}, pairwise distinct mod pi
    std::vector<OKElem> digit_reps() const;
    // index into digit_reps() of the class of x mod pi
    size_t residue_index(const OKElem& x) const;
    const OKElem& digit_for(const OKElem& x) const;

    // raw (montgomery-form) coordinate access for kernels
    static int rank(const OKRing& r) { return r.cfg_.f_K; }
    void mul_raw(const Zp* a, const Zp* b, Zp* out, Zp* scratch) const;
    void set_prec_cap(OKElem& x) const { if (x.prec > M()) x.prec = M(); }

private:
    OKConfig cfg_;
    ZpCtx z_;
    u128 q_ = 0;
    std::vector<Zp> mred_; // m(t) = t^d - mred_ as low-degree tail
    OKElem pi_, u_, uinv_;
    std::vector<OKElem> digits_;

    void reduce(std::vector<Zp>& acc) const; // degree < 2d-1 -> degree < d
};

} // namespace forge
