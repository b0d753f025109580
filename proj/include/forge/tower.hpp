#pragma once

#include "forge/lubin_tate.hpp"

namespace forge {

// Quotient-ring model of O_{K_n}: level 0 is O_K[z0]/(Phi0) with
// Phi0 = f(z)/z (Eisenstein of degree q-1), level 1 is R0[z1]/(f(z1) - z0).
// Both are discrete valuation rings; Val.prec carries the lattice precision
// (u_n-adic exponent, ram() lattice units per pi).
class TowerRing final : public Ring {
public:
    using Ring::sub;

    TowerRing(const FormalGroup& G, int level);

    int level() const { return level_; }
    const FormalGroup& group() const { return *G_; }
    const Ring& subring() const { return *sub_; } // coefficient ring of the model
    const TowerRing* lower() const { return low_.get(); } // null at level 0
    int sub_deg() const { return deg_; }           // rank over sub()

    // Ring interface
    int rank() const override { return deg_ * sub_->rank(); }
    const OKRing& okr() const override { return G_->okr(); }
    int ram() const override { return ram_; }
    int scratch() const override { return 0; }
    void mul(const Zp* a, const Zp* b, Zp* out, Zp* scratch) const override;
    void embed_ok(const OKElem& a, Zp* out) const override;
    void mul_ok(const Zp* a, const OKElem& s, Zp* out) const override;
    int vfloor_raw(const Zp* a) const override;
    bool zero_mod(const Zp* a, int lattice_prec) const override;
    void div_by_pi_raw(Zp* a, int k) const override;
    void inv_raw(const Zp* a, Zp* out) const override;

    // values
    Val zero_val() const;
    Val one_val() const;
    Val gen() const; // the torsion generator u_n
    Val embed_lower(const Val& x) const; // level 1 only
    Val add_val(const Val& a, const Val& b) const;
    Val sub_val(const Val& a, const Val& b) const;
    Val neg_val(const Val& a) const;
    Val mul_val(const Val& a, const Val& b) const;
    Val mul_ok_val(const Val& a, const OKElem& s) const;
    Val inv_val(const Val& a) const;
    Val pow_val(const Val& a, u128 e) const;
    // exact division by gen^k / by pi^k / by an arbitrary y with val(x) >= val(y)
    Val div_gen(const Val& x, int k) const;
    Val div_pi_val(const Val& x, int k) const;
    Val div_val(const Val& x, const Val& y) const;

    int val_lattice(const Val& x) const; // min(actual, prec)
    bool is_zero_val(const Val& x) const;
    bool eq_val(const Val& a, const Val& b) const;

    // canonical O_K digit of the residue class mod the maximal ideal
    OKElem residue_digit(const Val& x) const;
    // u_n-adic digit expansion with digits lifted to O_K (units and zero)
    std::vector<OKElem> digits_of(const Val& x, int count) const;

    // trace/norm of multiplication down to the immediate lower ring; results
    // are values of sub() (level 0: an O_K block of rank f_K)
    Val trace(const Val& x) const;
    Val norm(const Val& x) const;
    // some z with trace(z) = target (target in the lower ring)
    Val find_trace_preimage(const Val& target) const;

    const std::vector<Val>& mod_power_sums() const { return psums_; }

private:
    const FormalGroup* G_;
    int level_;
    std::unique_ptr<TowerRing> low_;
    std::unique_ptr<OkAsRing> ok_;
    const Ring* sub_;
    int deg_ = 0, ram_ = 1;
    std::vector<std::vector<Zp>> mod_; // non-leading modulus coefficients over sub
    std::vector<Val> psums_;           // power sums of the modulus roots, in sub

    void reduce(std::vector<Zp>& acc) const;
};

struct TorsionSet {
    std::vector<Val> pts; // q points including 0, in the level-0 ring
};

// kernel of [pi] inside the level-0 ring: zero plus the Hensel-lifted roots
// of Phi0 tagged by their residue digits
TorsionSet torsion_points(const FormalGroup& G, const TowerRing& T0);

// formal-group sum of the Galois conjugates (positive valuation required)
Val lt_trace(const FormalGroup& G, const TowerRing& T, const Val& x,
             const TorsionSet& tor);

// Galois conjugate by a torsion translate: level 1 sends u1 to u1 + z for
// z in the torsion set, level 0 sends u0 to the torsion point itself
Val galois_conj(const FormalGroup& G, const TowerRing& T, const Val& x, const Val& z);

// evaluate a series over O_K at a tower value
Val eval_at(const PSeries& f, const TowerRing& T, const Val& x);

// u1 + z assembled from the law table without full-ring products
Val translate_gen(const FormalGroup& G, const TowerRing& T1, const Val& z0elem);

// Lemma-style finite interpolation: f in O_K[[x]] (degree < L) with
// f(u_i) = alpha_i for i = 0..n and f(0) = 0; alpha_i must lie in
// pi^{n-i} p_0 O_{K_i}
PSeries finite_interpolate(const FormalGroup& G,
                           const std::vector<const TowerRing*>& towers,
                           const std::vector<Val>& alphas, int L);

// g_{n,k} auxiliary series: zero at u_i (i != k), pi^{n-k} u_0 at u_k
PSeries interp_basis(const FormalGroup& G, int n, int k, int L);

} // namespace forge
