#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "forge/pseries.hpp"

namespace forge {

// Truncation plan for a formal-group session: NF bounds the bivariate law
// table by total degree, J is the working degree for univariate machinery
// (endomorphisms, log', the Coleman apparatus), Dexp the degree of exp_F.
struct LTParams {
    int NF = 24;
    int J = 64;
    int Dexp = 64;
};

struct RpiqPoly {
    std::vector<OKElem> g;
};

// accepts iff g is monic of degree q, g = pi x mod x^2, g = x^q mod pi
RpiqPoly validate_rpiq(const OKRing& R, const std::vector<OKElem>& g);

class FormalGroup {
public:
    // seed must be a polynomial of degree q with f = pi x mod deg 2 and
    // f = x^q mod pi (monic); this covers pi x + x^q, all of R(pi, q) and the
    // multiplicative law's (1+x)^p - 1 when pi = p
    FormalGroup(const OKRing& R, std::vector<OKElem> seed, LTParams prm);

    const OKRing& okr() const { return *R_; }
    const OkAsRing& ring() const { return A_; }
    const LTParams& params() const { return prm_; }
    const std::vector<OKElem>& seed() const { return seed_; }
    const BiSeries& law() const { return F_; }
    const PSeries& log_deriv() const { return logp_; }  // integral series
    const KSeries& log_series() const { return log_; }
    const KSeries& exp_series() const { return exp_; }

    PSeries seed_ps(int n) const;
    // [a](x) mod x^n; built degree-by-degree and cached
    PSeries endo(const OKElem& a, int n) const;
    // [pi^k](x) mod x^n by iterating the seed
    PSeries pi_iterate(int k, int n) const;
    // the inversion series i_F with F(x, i_F(x)) = 0
    PSeries inv_series(int n) const { return endo(R_->from_int(-1), n); }

    PSeries oplus(const PSeries& a, const PSeries& b, int n) const;
    PSeries ominus(const PSeries& a, const PSeries& b, int n) const;
    Val oplus_val(const Val& a, const Val& b, const Ring& R) const;

    // log_F(h) as an integral series, for pi | h(0)
    PSeries log_compose(const PSeries& h, int n) const;
    // exp_F(h) for pi-divisible h
    PSeries exp_compose(const PSeries& h, int n) const;

    // apply a polynomial with O_K coefficients to a series
    static PSeries apply_poly(const std::vector<OKElem>& poly, const PSeries& s, int n);

private:
    const OKRing* R_;
    OkAsRing A_;
    LTParams prm_;
    std::vector<OKElem> seed_;
    BiSeries F_;
    PSeries u_;    // dF/dy(x, 0) extended to degree J by u(f) = (f'/pi) u
    PSeries logp_; // 1/u
    KSeries log_, exp_;

    mutable std::mutex cache_mu_;
    mutable std::map<std::string, PSeries> endo_cache_;

    void build_table();
    void build_log_exp();
    PSeries endo_build(const OKElem& a, int n) const;
};

// the isomorphism i: F_f -> F_g with i = x mod deg 2 and g(i) = i(f), solved
// degree by degree; exp_g(log_f) agrees with it where that route has precision
PSeries iso(const FormalGroup& Gf, const FormalGroup& Gg, int n);

} // namespace forge
