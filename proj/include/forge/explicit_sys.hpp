#pragma once

#include "forge/coleman.hpp"

namespace forge {

// Joint-work section: explicit norm-compatible systems from isomorphisms of
// group laws, and the idempotent calculus of Z_p[Delta] for Delta cyclic of
// order p-1.

// the p-1 solutions of x^{p-1} = 1 in Z_p at precision p^M, Hensel-lifted
std::vector<Zp> roots_of_unity(const ZpCtx& z);

// group ring Z_p[Delta], Delta = <delta> cyclic of order p-1; an element is
// the coefficient vector of 1, delta, ..., delta^{p-2}
class GroupRing {
public:
    GroupRing(u64 p, int M);
    const ZpCtx& zctx() const { return z_; }
    int order() const { return n_; }

    using Elem = std::vector<Zp>;
    Elem zero() const { return Elem(n_); }
    Elem one() const;
    Elem add(const Elem& a, const Elem& b) const;
    Elem mul(const Elem& a, const Elem& b) const; // cyclic convolution
    bool eq(const Elem& a, const Elem& b) const;

    // the character group: psi_j sends delta to omega^j for a fixed
    // generator omega of mu_{p-1}
    int characters() const { return n_; }
    Zp character_value(int j, int delta_power) const;
    // e_psi = (1/(p-1)) sum_g psi(g^{-1}) g
    Elem idempotent(int j) const;

private:
    ZpCtx z_;
    int n_;
    std::vector<Zp> omega_pow_; // omega^0..omega^{n-1}
};

// Product of the torsion translates of r over the law of Gg, computed two
// independent ways: expanding over the level-0 tower of Gg, and as the
// determinant of multiplication by F_g(y, T) on O_K[[y]][T]/(g(T)). Both must
// equal (-1)^{p-1} g(r(y)).
bool torsion_product_check(const FormalGroup& Gg, const TowerRing& T0g,
                           const PSeries& r, int nout);
// the determinant route alone: prod_z (y + z) as a series in y
PSeries resultant_product(const FormalGroup& Gg, int nout);

// Prop-4.2-style check: N_f(i) = (-1)^{p-1} i for i = iso(Gf, Gg)
bool norm_system_check(const ColemanContext& Cf, const PSeries& i, int nout);

// e_psi acting multiplicatively on a principal unit of the level-0 tower;
// delta acts through the order-(p-1) subgroup of the torsion action
Val eigen_decompose(const FormalGroup& G, const TowerRing& T0, const GroupRing& GR,
                    int psi_index, const Val& u);

} // namespace forge
