#include "forge/ring.hpp"

namespace forge {

void Ring::add(const Zp* a, const Zp* b, Zp* out) const {
    const ZpCtx& zc = z();
    for (int i = 0; i < rank(); ++i) out[i] = zc.add(a[i], b[i]);
}

void Ring::sub(const Zp* a, const Zp* b, Zp* out) const {
    const ZpCtx& zc = z();
    for (int i = 0; i < rank(); ++i) out[i] = zc.sub(a[i], b[i]);
}

void Ring::neg(const Zp* a, Zp* out) const {
    const ZpCtx& zc = z();
    for (int i = 0; i < rank(); ++i) out[i] = zc.neg(a[i]);
}

void Ring::set_zero(Zp* out) const {
    for (int i = 0; i < rank(); ++i) out[i] = Zp{};
}

void Ring::copy(const Zp* a, Zp* out) const {
    for (int i = 0; i < rank(); ++i) out[i] = a[i];
}

bool Ring::is_zero_raw(const Zp* a) const {
    for (int i = 0; i < rank(); ++i)
        if (a[i].v != 0) return false;
    return true;
}

void Ring::mul_acc(const Zp* a, const Zp* b, Zp* out, Zp* scratch) const {
    // scratch must hold scratch() + rank() scalars
    Zp* prod = scratch;
    Zp* s = scratch + rank();
    mul(a, b, prod, s);
    add(out, prod, out);
}

int OkAsRing::vfloor_raw(const Zp* a) const {
    const ZpCtx& zc = z();
    int v = zc.M();
    for (int i = 0; i < rank(); ++i) v = std::min(v, zc.val(a[i]));
    return v;
}

bool OkAsRing::zero_mod(const Zp* a, int lattice_prec) const {
    const ZpCtx& zc = z();
    int k = std::min(lattice_prec, zc.M());
    if (k <= 0) return true;
    for (int i = 0; i < rank(); ++i)
        if (zc.val(a[i]) < k) return false;
    return true;
}

void OkAsRing::div_by_pi_raw(Zp* a, int k) const {
    const ZpCtx& zc = z();
    for (int i = 0; i < rank(); ++i) a[i] = zc.div_p_exact(a[i], k);
    if (k > 0) {
        OKElem ui = r_->pow(r_->pi_unit_inv(), (u128)k);
        std::vector<Zp> out(rank()), scratch(2 * rank());
        r_->mul_raw(a, ui.c.data(), out.data(), scratch.data());
        for (int i = 0; i < rank(); ++i) a[i] = out[i];
    }
}

void OkAsRing::inv_raw(const Zp* a, Zp* out) const {
    OKElem x = r_->zero();
    for (int i = 0; i < rank(); ++i) x.c[i] = a[i];
    OKElem y = r_->inv(x);
    for (int i = 0; i < rank(); ++i) out[i] = y.c[i];
}

} // namespace forge
