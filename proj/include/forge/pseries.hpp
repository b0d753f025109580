#pragma once

#include <functional>

#include "forge/kernels.hpp"

namespace forge {

constexpr int TAIL_EXACT = 1 << 26;

inline int sat_add(int a, int b) {
    long long s = (long long)a + b;
    if (s >= TAIL_EXACT) return TAIL_EXACT;
    if (s < -TAIL_EXACT) return -TAIL_EXACT;
    return (int)s;
}

// A ring element together with its absolute precision (lattice units).
struct Val {
    std::vector<Zp> b;
    int prec = 0;
};

// Truncated power series over R. Coefficient i is stored as a block of
// R->rank() scalars with an absolute precision prec[i] and a valuation floor
// vfl[i], both in R's lattice units. Coefficients with index >= n are not
// stored: they are exactly zero when tail_vfl == TAIL_EXACT (a polynomial),
// otherwise unknown with valuation >= tail_vfl.
struct PSeries {
    const Ring* R = nullptr;
    int n = 0;
    std::vector<Zp> c;
    std::vector<int> prec;
    std::vector<int> vfl;
    int tail_vfl = TAIL_EXACT;

    Zp* at(int i) { return c.data() + (size_t)i * R->rank(); }
    const Zp* at(int i) const { return c.data() + (size_t)i * R->rank(); }
    // precision of the (possibly virtual) coefficient i
    int cprec(int i) const {
        return i < n ? prec[i] : (tail_vfl >= TAIL_EXACT ? R->prec_cap() : std::max(tail_vfl, 0));
    }
    int cvfl(int i) const { return i < n ? vfl[i] : std::min(tail_vfl, R->prec_cap()); }
    bool exact_poly() const { return tail_vfl >= TAIL_EXACT; }
};

PSeries ps_zero(const Ring& R, int n);
PSeries ps_one(const Ring& R, int n);
PSeries ps_x(const Ring& R, int n);
PSeries ps_monomial_ok(const Ring& R, int n, const OKElem& a, int deg);
PSeries ps_from_ok(const Ring& R, int n, const std::vector<OKElem>& coeffs);
PSeries ps_resize(const PSeries& f, int n); // extend (virtual coeffs) or truncate
// extend with exact-zero coefficients (for degree-by-degree constructions
// whose higher coefficients are pending, not unknown)
PSeries ps_extend_exact(const PSeries& f, int n);

void ps_set_ok(PSeries& f, int i, const OKElem& a);
OKElem ps_get_ok(const PSeries& f, int i); // only for series over O_K
void ps_refresh_meta(PSeries& f);          // clamp vfl against stored values

PSeries ps_add(const PSeries& a, const PSeries& b);
PSeries ps_sub(const PSeries& a, const PSeries& b);
PSeries ps_neg(const PSeries& a);
PSeries ps_mul(const PSeries& a, const PSeries& b, int nout, MulPath path = MulPath::Auto);
PSeries ps_scale_ok(const PSeries& a, const OKElem& s);
PSeries ps_scale_int(const PSeries& a, long long k);
PSeries ps_shift_x(const PSeries& a, int k, int nout);     // multiply by x^k
PSeries ps_div_x_exact(const PSeries& a, int k);           // divide by x^k
PSeries ps_div_pi(const PSeries& a, int k);                // divide by pi^k
PSeries ps_derivative(const PSeries& a);

// x-adic valuation of the stored part (index of first coefficient that is
// nonzero at its own precision); returns n when all stored vanish
int ps_xval(const PSeries& a);
// series has every coefficient divisible by pi^k (at available precision)
bool ps_divisible_pi(const PSeries& a, int k);
bool ps_is_zero(const PSeries& a); // zero at per-coefficient precision
// largest d such that coefficients 0..d-1 all carry positive precision
int ps_effective_len(const PSeries& a);
// least precision among the first len coefficients
int ps_min_prec(const PSeries& a, int len);

// composition f(g); requires vfl(g_0) >= 1 unless f is an exact polynomial
PSeries ps_compose(const PSeries& f, const PSeries& g, int nout);
// compositional inverse: g with f(g) = g(f) = x mod x^nout; f(0) = 0 and
// f'(0) != 0. A non-unit f'(0) costs pi-divisions that are tracked and raise
// PrecisionExhausted once the budget is gone.
PSeries ps_comp_inverse(const PSeries& f, int nout);
// multiplicative inverse of a series with unit constant term
PSeries ps_inverse(const PSeries& f, int nout);
// solve q * b = a given b... exact division by a unit-constant-term series
PSeries ps_div(const PSeries& a, const PSeries& b, int nout);

// Horner evaluation at a point of positive valuation (or any point when f is
// an exact polynomial)
Val ps_eval(const PSeries& f, const Val& point, const Ring& R);
Val val_from_ok(const Ring& R, const OKElem& a);
OKElem ok_from_val(const Ring& R, const Val& v); // R must be O_K itself

enum class GainKind { XAdic, PiAdic };
// returns the stabilized series and writes the number of steps taken;
// throws NoConvergence when the declared per-step gain is violated
PSeries converge_detect(const std::vector<PSeries>& seq, GainKind kind, int gain,
                        int* steps_out = nullptr);

// ---------------------------------------------------------------------------
// bivariate series over O_K truncated by total degree (the F(x,y) tables)

struct BiSeries {
    const OKRing* R = nullptr;
    int NF = 0;
    std::vector<Zp> c;
    std::vector<int> prec;
    std::vector<int> vfl;

    size_t tri() const { return (size_t)NF * (NF + 1) / 2; }
    size_t idx(int i, int j) const { return (size_t)i * NF - (size_t)i * (i - 1) / 2 + j; }
    Zp* at(int i, int j) { return c.data() + idx(i, j) * R->deg(); }
    const Zp* at(int i, int j) const { return c.data() + idx(i, j) * R->deg(); }
};

BiSeries bi_zero(const OKRing& R, int NF);
void bi_set(BiSeries& F, int i, int j, const OKElem& a);
OKElem bi_get(const BiSeries& F, int i, int j);
BiSeries bi_add(const BiSeries& a, const BiSeries& b);
BiSeries bi_sub(const BiSeries& a, const BiSeries& b);
BiSeries bi_mul(const BiSeries& a, const BiSeries& b);
// substitute univariate series for one variable of a univariate polynomial:
// p(F) where p has OK coefficients
BiSeries bi_compose_poly(const std::vector<OKElem>& p, const BiSeries& F);
// F(f(x), g(x)) truncated to nout coefficients, over the ring of f and g
PSeries bi_substitute(const BiSeries& F, const PSeries& f, const PSeries& g, int nout);
// F(a, b) for ring values of positive valuation
Val bi_eval(const BiSeries& F, const Val& a, const Val& b, const Ring& R);
// formal group sum of a list of series (left fold of bi_substitute)
PSeries lt_sum(const BiSeries& F, const std::vector<PSeries>& terms, int nout);
Val lt_sum_vals(const BiSeries& F, const std::vector<Val>& terms, const Ring& R);

// ---------------------------------------------------------------------------
// series with K-coefficients, each stored as pi^e * num with an O_K mantissa

struct KElem {
    OKElem num;
    int e = 0;
};

// Bound on the unstored coefficients of a K-series: for n >= n0 (the stored
// length), val(c_n) >= -(beta + alpha*(n - n0)) with alpha = alpha_num/alpha_den.
// exact = true means they are exactly zero (a polynomial). Compositions with a
// pi-divisible inner series gain at least one unit of valuation per power, so
// any alpha <= 1 keeps tails summable.
struct KTail {
    bool exact = false;
    bool valid = false;
    int alpha_num = 0, alpha_den = 1;
    int beta = 0;

    static KTail poly() { return KTail{true, true, 0, 1, 0}; }
    static KTail floor(int val_floor) { return KTail{false, true, 0, 1, -val_floor}; }
    static KTail none() { return KTail{}; }
};

struct KSeries {
    const OKRing* R = nullptr;
    int n = 0;
    std::vector<KElem> c;
    KTail tail;
};

KElem k_of(const OKRing& R, const OKElem& a);
KElem k_zero(const OKRing& R);
void k_normalize(const OKRing& R, KElem& x);
KElem k_add(const OKRing& R, const KElem& a, const KElem& b);
KElem k_sub(const OKRing& R, const KElem& a, const KElem& b);
KElem k_mul(const OKRing& R, const KElem& a, const KElem& b);
KElem k_inv(const OKRing& R, const KElem& a);
int k_vfloor(const OKRing& R, const KElem& a);  // absolute valuation floor
int k_prec(const OKRing& R, const KElem& a);    // absolute precision

KSeries ks_zero(const OKRing& R, int n);
KSeries ks_from_ps(const PSeries& f); // f over O_K
KSeries ks_add(const KSeries& a, const KSeries& b);
KSeries ks_sub(const KSeries& a, const KSeries& b);
KSeries ks_mul(const KSeries& a, const KSeries& b, int nout);
KSeries ks_scale(const KSeries& a, const KElem& s);
KSeries ks_derivative(const KSeries& a);
// f(g) for g over O_K with vfl(g_0) >= 1 (or f an exact polynomial); terms
// whose valuation floor reaches the precision cap are exact zeros mod p^M and
// are skipped rather than letting them drag the precision down
KSeries ks_compose_ps(const KSeries& f, const PSeries& g, int nout);
// Horner composition f(g) for K-coefficient inner series with g(0) = 0
KSeries ks_compose_ks(const KSeries& f, const KSeries& g, int nout);
// multiplicative inverse, unit constant term
KSeries ks_inverse(const KSeries& f, int nout);
// coefficients must be integral at available precision
PSeries ks_to_ps(const KSeries& f, const Ring& R, const std::string& what);
// Horner-style evaluation at a value in a (possibly larger) ring; den_scale
// converts pi-powers of the coefficient into lattice units of R
Val ks_eval(const KSeries& f, const Val& point, const Ring& R);

} // namespace forge
