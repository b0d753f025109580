#pragma once

#include "forge/okring.hpp"

namespace forge {

// Coefficient ring seen as a free Z/p^M-module: every element is a contiguous
// block of rank() Zp scalars, addition is pointwise. Precision attached to
// elements of a ring is an integer in that ring's own lattice units: pi-units
// for O_K itself, u_n-units for the quotient rings of the tower (ram() many
// lattice units per factor of pi).
class Ring {
public:
    virtual ~Ring() = default;

    virtual int rank() const = 0;
    virtual const OKRing& okr() const = 0;
    virtual int ram() const = 0;
    int prec_cap() const { return ram() * okr().M(); }
    const ZpCtx& z() const { return okr().zctx(); }

    void add(const Zp* a, const Zp* b, Zp* out) const;
    void sub(const Zp* a, const Zp* b, Zp* out) const;
    void neg(const Zp* a, Zp* out) const;
    void set_zero(Zp* out) const;
    void copy(const Zp* a, Zp* out) const;
    bool is_zero_raw(const Zp* a) const;

    virtual int scratch() const = 0;
    virtual void mul(const Zp* a, const Zp* b, Zp* out, Zp* scratch) const = 0;
    // out += a * b
    void mul_acc(const Zp* a, const Zp* b, Zp* out, Zp* scratch) const;
    virtual void embed_ok(const OKElem& a, Zp* out) const = 0;
    virtual void mul_ok(const Zp* a, const OKElem& s, Zp* out) const = 0;
    // lattice valuation lower bound of the block, capped at prec_cap()
    virtual int vfloor_raw(const Zp* a) const = 0;
    virtual bool zero_mod(const Zp* a, int lattice_prec) const = 0;
    virtual void div_by_pi_raw(Zp* a, int k) const = 0;
    virtual void inv_raw(const Zp* a, Zp* out) const = 0;

    std::vector<Zp> make_elem() const { return std::vector<Zp>(rank()); }
    std::vector<Zp> make_scratch() const { return std::vector<Zp>(scratch()); }
};

// O_K itself through the Ring interface
class OkAsRing final : public Ring {
public:
    explicit OkAsRing(const OKRing& r) : r_(&r) {}
    int rank() const override { return r_->deg(); }
    const OKRing& okr() const override { return *r_; }
    int ram() const override { return 1; }
    int scratch() const override { return 2 * r_->deg(); }
    void mul(const Zp* a, const Zp* b, Zp* out, Zp* scratch) const override {
        r_->mul_raw(a, b, out, scratch);
    }
    void embed_ok(const OKElem& a, Zp* out) const override {
        for (int i = 0; i < r_->deg(); ++i) out[i] = a.c[i];
    }
    void mul_ok(const Zp* a, const OKElem& s, Zp* out) const override {
        std::vector<Zp> scratch(2 * r_->deg());
        r_->mul_raw(a, s.c.data(), out, scratch.data());
    }
    int vfloor_raw(const Zp* a) const override;
    bool zero_mod(const Zp* a, int lattice_prec) const override;
    void div_by_pi_raw(Zp* a, int k) const override;
    void inv_raw(const Zp* a, Zp* out) const override;

private:
    const OKRing* r_;
};

} // namespace forge
