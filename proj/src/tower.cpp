#include "forge/tower.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace forge {

TowerRing::TowerRing(const FormalGroup& G, int level) : G_(&G), level_(level) {
    const OKRing& R = G.okr();
    int q = (int)R.q();
    if (level == 0) {
        ok_ = std::make_unique<OkAsRing>(R);
        sub_ = ok_.get();
        deg_ = q - 1;
        ram_ = q - 1;
        // Phi0 = f(z)/z, Eisenstein by the seed shape
        mod_.resize(deg_);
        for (int i = 0; i < deg_; ++i) {
            mod_[i] = sub_->make_elem();
            sub_->embed_ok(G.seed()[i + 1], mod_[i].data());
        }
    } else if (level == 1) {
        low_ = std::make_unique<TowerRing>(G, 0);
        sub_ = low_.get();
        deg_ = q;
        ram_ = q * (q - 1);
        // Phi1 = f(z1) - z0
        mod_.resize(deg_);
        for (int i = 0; i < deg_; ++i) {
            mod_[i] = sub_->make_elem();
            sub_->embed_ok(G.seed()[i], mod_[i].data());
        }
        // subtract the generator of the lower ring from the constant term
        Val g = low_->gen();
        std::vector<Zp> negg(low_->rank());
        low_->neg(g.b.data(), negg.data());
        low_->add(mod_[0].data(), negg.data(), mod_[0].data());
    } else {
        throw BadInput("TowerRing: only levels 0 and 1 are modeled");
    }

    // power sums of the modulus roots via Newton's identities (division-free)
    psums_.resize(std::max(deg_ + 1, 2));
    Val one;
    one.b = sub_->make_elem();
    sub_->embed_ok(R.one(), one.b.data());
    one.prec = sub_->prec_cap();
    psums_[0].b = sub_->make_elem();
    sub_->embed_ok(R.from_int(deg_), psums_[0].b.data());
    psums_[0].prec = sub_->prec_cap();
    // e_i = (-1)^i [z^{deg-i}] Phi
    std::vector<std::vector<Zp>> e(deg_ + 1);
    e[0] = one.b;
    for (int i = 1; i <= deg_; ++i) {
        e[i] = sub_->make_elem();
        sub_->copy(mod_[deg_ - i].data(), e[i].data());
        if (i % 2) sub_->neg(e[i].data(), e[i].data());
    }
    std::vector<Zp> scratch(sub_->scratch() + sub_->rank()), prod(sub_->rank());
    for (int k = 1; k <= deg_; ++k) {
        // p_k = e1 p_{k-1} - e2 p_{k-2} + ... + (-1)^{k-1} k e_k
        std::vector<Zp> acc = sub_->make_elem();
        for (int i = 1; i < k; ++i) {
            sub_->mul(e[i].data(), psums_[k - i].b.data(), prod.data(), scratch.data());
            if (i % 2)
                sub_->add(acc.data(), prod.data(), acc.data());
            else
                sub_->sub(acc.data(), prod.data(), acc.data());
        }
        std::vector<Zp> ke = sub_->make_elem();
        OKElem kk = R.from_int((k % 2) ? k : -k);
        sub_->mul_ok(e[k].data(), kk, ke.data());
        sub_->add(acc.data(), ke.data(), acc.data());
        psums_[k].b = acc;
        psums_[k].prec = sub_->prec_cap();
    }
}

void TowerRing::reduce(std::vector<Zp>& acc) const {
    const int bs = sub_->rank();
    std::vector<Zp> prod(bs), scratch(sub_->scratch() + bs);
    int terms = (int)(acc.size() / bs);
    for (int i = terms - 1; i >= deg_; --i) {
        Zp* ci = acc.data() + (size_t)i * bs;
        if (sub_->is_zero_raw(ci)) continue;
        for (int j = 0; j < deg_; ++j) {
            if (sub_->is_zero_raw(mod_[j].data())) continue;
            sub_->mul(ci, mod_[j].data(), prod.data(), scratch.data());
            Zp* dst = acc.data() + (size_t)(i - deg_ + j) * bs;
            sub_->sub(dst, prod.data(), dst);
        }
        sub_->set_zero(ci);
    }
    acc.resize((size_t)deg_ * bs);
}

void TowerRing::mul(const Zp* a, const Zp* b, Zp* out, Zp*) const {
    const int bs = sub_->rank();
    std::vector<Zp> acc((size_t)(2 * deg_ - 1) * bs);
    poly_mul_trunc(*sub_, a, deg_, b, deg_, acc.data(), 2 * deg_ - 1);
    reduce(acc);
    std::copy(acc.begin(), acc.end(), out);
}

void TowerRing::embed_ok(const OKElem& a, Zp* out) const {
    set_zero(out);
    sub_->embed_ok(a, out);
}

void TowerRing::mul_ok(const Zp* a, const OKElem& s, Zp* out) const {
    const int bs = sub_->rank();
    for (int i = 0; i < deg_; ++i) sub_->mul_ok(a + (size_t)i * bs, s, out + (size_t)i * bs);
}

int TowerRing::vfloor_raw(const Zp* a) const {
    const int bs = sub_->rank();
    int v = prec_cap();
    for (int i = 0; i < deg_; ++i) {
        int sv = sub_->vfloor_raw(a + (size_t)i * bs);
        v = std::min(v, i + (ram_ / sub_->ram()) * sv);
    }
    return std::min(v, prec_cap());
}

bool TowerRing::zero_mod(const Zp* a, int lattice_prec) const {
    const int bs = sub_->rank();
    int k = std::min(lattice_prec, prec_cap());
    if (k <= 0) return true;
    int scale = ram_ / sub_->ram();
    for (int i = 0; i < deg_; ++i) {
        // the i-th monomial contributes at lattice level i + scale * subval
        int need = (k - i + scale - 1) / scale;
        if (!sub_->zero_mod(a + (size_t)i * bs, need)) return false;
    }
    return true;
}

void TowerRing::div_by_pi_raw(Zp* a, int k) const {
    const int bs = sub_->rank();
    for (int i = 0; i < deg_; ++i) sub_->div_by_pi_raw(a + (size_t)i * bs, k);
}

void TowerRing::inv_raw(const Zp* a, Zp* out) const {
    if (vfloor_raw(a) != 0) throw NotAUnit("tower inverse of a non-unit");
    // residue field is O_K/pi for both levels: start from the inverse of the
    // constant coordinate and Newton-lift
    const OKRing& R = okr();
    OKElem c0 = R.zero();
    {
        // constant-coefficient coordinate of the nested polynomial
        const Zp* p = a;
        for (int i = 0; i < R.deg(); ++i) c0.c[i] = p[i];
    }
    OKElem c0inv = R.inv(c0);
    std::vector<Zp> y = make_elem(), t = make_elem(), two = make_elem();
    embed_ok(c0inv, y.data());
    embed_ok(R.from_int(2), two.data());
    int have = 1;
    std::vector<Zp> prod = make_elem();
    while (have < prec_cap()) {
        mul(a, y.data(), prod.data(), nullptr);
        sub(two.data(), prod.data(), t.data());
        mul(y.data(), t.data(), prod.data(), nullptr);
        y = prod;
        have *= 2;
    }
    copy(y.data(), out);
}

Val TowerRing::zero_val() const {
    Val v;
    v.b = make_elem();
    v.prec = prec_cap();
    return v;
}

Val TowerRing::one_val() const {
    Val v = zero_val();
    embed_ok(okr().one(), v.b.data());
    return v;
}

Val TowerRing::gen() const {
    Val v = zero_val();
    const int bs = sub_->rank();
    sub_->embed_ok(okr().one(), v.b.data() + bs);
    return v;
}

Val TowerRing::embed_lower(const Val& x) const {
    if (level_ != 1) throw BadInput("embed_lower: level-1 ring required");
    Val v = zero_val();
    std::copy(x.b.begin(), x.b.end(), v.b.begin());
    v.prec = std::min(prec_cap(), (ram_ / sub_->ram()) * x.prec);
    return v;
}

Val TowerRing::add_val(const Val& a, const Val& b) const {
    Val r = zero_val();
    add(a.b.data(), b.b.data(), r.b.data());
    r.prec = std::min(a.prec, b.prec);
    return r;
}

Val TowerRing::sub_val(const Val& a, const Val& b) const {
    Val r = zero_val();
    sub(a.b.data(), b.b.data(), r.b.data());
    r.prec = std::min(a.prec, b.prec);
    return r;
}

Val TowerRing::neg_val(const Val& a) const {
    Val r = a;
    neg(a.b.data(), r.b.data());
    return r;
}

Val TowerRing::mul_val(const Val& a, const Val& b) const {
    Val r = zero_val();
    mul(a.b.data(), b.b.data(), r.b.data(), nullptr);
    int va = std::min(vfloor_raw(a.b.data()), std::max(a.prec, 0));
    int vb = std::min(vfloor_raw(b.b.data()), std::max(b.prec, 0));
    r.prec = std::min(sat_add(std::max(a.prec, 0), vb), sat_add(std::max(b.prec, 0), va));
    r.prec = std::min(r.prec, prec_cap());
    return r;
}

Val TowerRing::mul_ok_val(const Val& a, const OKElem& s) const {
    Val r = zero_val();
    mul_ok(a.b.data(), s, r.b.data());
    int vs = okr().vfloor(s);
    int va = std::min(vfloor_raw(a.b.data()), std::max(a.prec, 0));
    r.prec = std::min(sat_add(std::max(a.prec, 0), ram_ * vs),
                      sat_add(ram_ * std::max(s.prec, 0), va));
    r.prec = std::min(r.prec, prec_cap());
    return r;
}

Val TowerRing::inv_val(const Val& a) const {
    Val r = zero_val();
    inv_raw(a.b.data(), r.b.data());
    r.prec = a.prec;
    return r;
}

Val TowerRing::pow_val(const Val& a, u128 e) const {
    Val r = one_val(), base = a;
    while (e) {
        if (e & 1) r = mul_val(r, base);
        base = mul_val(base, base);
        e >>= 1;
    }
    return r;
}

Val TowerRing::div_gen(const Val& x, int k) const {
    Val r = x;
    const int bs = sub_->rank();
    for (int rep = 0; rep < k; ++rep) {
        // solve z*y = r: y_{d-1} = -r_0 / mod_0, y_{i-1} = r_i + y_{d-1} mod_i
        std::vector<Zp> yd = sub_->make_elem(), prod(bs);
        std::vector<Zp> scratch(sub_->scratch() + bs);
        // divide r_0 by the constant modulus coefficient (valuation 1 in sub)
        {
            Val c0;
            c0.b.assign(r.b.begin(), r.b.begin() + bs);
            c0.prec = sub_->prec_cap();
            Val m0;
            m0.b = mod_[0];
            m0.prec = sub_->prec_cap();
            // c0 / m0 inside the sub ring (a DVR below us, or O_K)
            int vm = sub_->vfloor_raw(m0.b.data());
            std::vector<Zp> num = c0.b, den = m0.b;
            if (level_ == 0) {
                sub_->div_by_pi_raw(num.data(), vm);
                sub_->div_by_pi_raw(den.data(), vm);
            } else {
                Val nv{num, sub_->prec_cap()}, dv{den, sub_->prec_cap()};
                nv = low_->div_gen(nv, vm);
                dv = low_->div_gen(dv, vm);
                num = nv.b;
                den = dv.b;
            }
            std::vector<Zp> di = sub_->make_elem();
            sub_->inv_raw(den.data(), di.data());
            sub_->mul(num.data(), di.data(), yd.data(), scratch.data());
            sub_->neg(yd.data(), yd.data());
        }
        std::vector<Zp> out((size_t)deg_ * bs);
        for (int i = 1; i < deg_; ++i) {
            sub_->mul(yd.data(), mod_[i].data(), prod.data(), scratch.data());
            sub_->add(r.b.data() + (size_t)i * bs, prod.data(),
                      out.data() + (size_t)(i - 1) * bs);
        }
        std::copy(yd.begin(), yd.end(), out.begin() + (size_t)(deg_ - 1) * bs);
        r.b = out;
        r.prec -= 1;
    }
    if (r.prec <= 0)
        throw PrecisionExhausted("div_gen: no lattice precision left");
    return r;
}

Val TowerRing::div_pi_val(const Val& x, int k) const {
    Val r = x;
    div_by_pi_raw(r.b.data(), k);
    r.prec = x.prec - ram_ * k;
    if (r.prec <= 0) throw PrecisionExhausted("div_pi: no precision left");
    return r;
}

Val TowerRing::div_val(const Val& x, const Val& y) const {
    int vy = std::min(vfloor_raw(y.b.data()), std::max(y.prec, 0));
    int vx = std::min(vfloor_raw(x.b.data()), std::max(x.prec, 0));
    if (vx < vy) throw NotDivisible("tower division: valuation too small");
    Val xs = div_gen(x, vy), ys = div_gen(y, vy);
    return mul_val(xs, inv_val(ys));
}

int TowerRing::val_lattice(const Val& x) const {
    return std::min(vfloor_raw(x.b.data()), std::max(x.prec, 0));
}

bool TowerRing::is_zero_val(const Val& x) const {
    return zero_mod(x.b.data(), x.prec);
}

bool TowerRing::eq_val(const Val& a, const Val& b) const {
    Val d = sub_val(a, b);
    if (d.prec <= 0)
        throw PrecisionExhausted("tower eq: comparison below working precision");
    return is_zero_val(d);
}

OKElem TowerRing::residue_digit(const Val& x) const {
    const OKRing& R = okr();
    OKElem c0 = R.zero();
    for (int i = 0; i < R.deg(); ++i) c0.c[i] = x.b[i];
    return R.digit_for(c0);
}

std::vector<OKElem> TowerRing::digits_of(const Val& x, int count) const {
    // digits are produced only as far as the lattice precision of x allows;
    // callers treat the remainder as an unknown tail
    std::vector<OKElem> out;
    Val r = x;
    for (int j = 0; j < count; ++j) {
        if (r.prec <= 1) break;
        OKElem d = residue_digit(r);
        Val e = zero_val();
        embed_ok(d, e.b.data());
        Val diff = sub_val(r, e);
        if (vfloor_raw(diff.b.data()) < 1)
            throw DigitFailure("digit expansion: residue digit did not cancel");
        r = div_gen(diff, 1);
        out.push_back(d);
    }
    return out;
}

Val TowerRing::trace(const Val& x) const {
    // trace = sum_j x_j p_j over the modulus power sums
    const int bs = sub_->rank();
    Val acc;
    acc.b = sub_->make_elem();
    acc.prec = sub_->prec_cap();
    std::vector<Zp> prod(bs), scratch(sub_->scratch() + bs);
    int scale = ram_ / sub_->ram();
    for (int j = 0; j < deg_; ++j) {
        sub_->mul(x.b.data() + (size_t)j * bs, psums_[j].b.data(), prod.data(),
                  scratch.data());
        sub_->add(acc.b.data(), prod.data(), acc.b.data());
    }
    // x known mod u^prec: each x_j known mod (sub lattice) ceil((prec-j)/scale)
    int p = sub_->prec_cap();
    for (int j = 0; j < deg_; ++j) {
        int pj = std::max((x.prec - j + scale - 1) / scale, 0);
        int vp = sub_->vfloor_raw(psums_[j].b.data());
        p = std::min(p, sat_add(pj, vp));
    }
    acc.prec = p;
    return acc;
}

namespace {

// division-free determinant (Berkowitz) over a commutative coefficient ring
std::vector<Zp> berkowitz_det(const Ring& S, const std::vector<std::vector<Zp>>& M,
                              int n) {
    const int bs = S.rank();
    std::vector<Zp> prod(bs), scratch(S.scratch() + bs);
    // vectors of polynomial coefficients, length up to n+1
    std::vector<std::vector<Zp>> C; // current characteristic vector
    C.resize(2);
    C[0] = S.make_elem();
    S.embed_ok(S.okr().from_int(-1), C[0].data());
    C[1] = S.make_elem();
    S.copy(M[0].data() + 0, C[1].data()); // a_{00}
    auto at = [&](int i, int j) { return M[i].data() + (size_t)j * bs; };
    for (int k = 1; k < n; ++k) {
        // row R = (a_{k,0..k-1}), column Cl = (a_{0..k-1,k}), corner a_{kk}
        // build Toeplitz products per Berkowitz
        std::vector<std::vector<Zp>> T(k + 2);
        // T[0] = -1, T[1] = a_kk, T[j] = R * A^{j-2} * Cl
        T[0] = S.make_elem();
        S.embed_ok(S.okr().from_int(-1), T[0].data());
        T[1] = S.make_elem();
        S.copy(at(k, k), T[1].data());
        std::vector<std::vector<Zp>> vec(k);
        for (int i = 0; i < k; ++i) {
            vec[i] = S.make_elem();
            S.copy(at(i, k), vec[i].data());
        }
        for (int j = 2; j <= k + 1; ++j) {
            // T[j] = R . vec
            T[j] = S.make_elem();
            for (int i = 0; i < k; ++i) {
                S.mul(at(k, i), vec[i].data(), prod.data(), scratch.data());
                S.add(T[j].data(), prod.data(), T[j].data());
            }
            if (j <= k) {
                // vec = A_k * vec with A_k the leading k x k block
                std::vector<std::vector<Zp>> nv(k);
                for (int i = 0; i < k; ++i) {
                    nv[i] = S.make_elem();
                    for (int l = 0; l < k; ++l) {
                        S.mul(at(i, l), vec[l].data(), prod.data(), scratch.data());
                        S.add(nv[i].data(), prod.data(), nv[i].data());
                    }
                }
                vec = nv;
            }
        }
        // C_new[i] = sum_j T[j] * C[i - j]
        std::vector<std::vector<Zp>> Cn(C.size() + 1);
        for (auto& c : Cn) c = S.make_elem();
        for (size_t i = 0; i < Cn.size(); ++i)
            for (size_t j = 0; j < T.size() && j <= i; ++j) {
                if (i - j >= C.size()) continue;
                S.mul(T[j].data(), C[i - j].data(), prod.data(), scratch.data());
                S.add(Cn[i].data(), prod.data(), Cn[i].data());
            }
        C = Cn;
    }
    // with the leading entry -1, the final vector ends in the determinant
    return C.back();
}

} // namespace

Val TowerRing::norm(const Val& x) const {
    const int bs = sub_->rank();
    // multiplication matrix columns: x * z^j reduced
    std::vector<std::vector<Zp>> cols(deg_);
    std::vector<Zp> cur(x.b);
    for (int j = 0; j < deg_; ++j) {
        cols[j] = cur;
        if (j + 1 < deg_) {
            // multiply by z: shift then reduce
            std::vector<Zp> shifted((size_t)(deg_ + 1) * bs);
            std::copy(cur.begin(), cur.end(), shifted.begin() + bs);
            reduce(shifted);
            cur = shifted;
        }
    }
    // rows of the matrix: M[i][j] = coefficient i of x * z^j
    std::vector<std::vector<Zp>> M(deg_);
    for (int i = 0; i < deg_; ++i) {
        M[i].assign((size_t)deg_ * bs, Zp{});
        for (int j = 0; j < deg_; ++j)
            std::copy(cols[j].begin() + (size_t)i * bs,
                      cols[j].begin() + (size_t)(i + 1) * bs,
                      M[i].begin() + (size_t)j * bs);
    }
    Val r;
    r.b = berkowitz_det(*sub_, M, deg_);
    int vx = std::min(vfloor_raw(x.b.data()), std::max(x.prec, 0));
    int scale = ram_ / sub_->ram();
    // |d(det)| <= deg * |x|^{deg-1} |dx| in lattice terms
    r.prec = std::min(sub_->prec_cap(),
                      (sat_add(x.prec, (deg_ - 1) * vx) + scale - 1) / scale);
    return r;
}

Val TowerRing::find_trace_preimage(const Val& target) const {
    // solve trace(z) = target with z = a * z^i for the best pivot power sum
    int best = -1, bestv = sub_->prec_cap();
    for (int j = 0; j < deg_; ++j) {
        int v = sub_->vfloor_raw(psums_[j].b.data());
        if (v < bestv) {
            bestv = v;
            best = j;
        }
    }
    int vt = std::min(sub_->vfloor_raw(target.b.data()), std::max(target.prec, 0));
    if (best < 0 || vt < bestv)
        throw NoSolutionAtPrecision("find_trace_preimage: target valuation too small");
    // a = target / p_best inside sub
    Val num = target;
    Val den;
    den.b = psums_[best].b;
    den.prec = sub_->prec_cap();
    std::vector<Zp> a(sub_->rank());
    if (level_ == 0) {
        // sub = O_K: unit-scaled pi-power division
        std::vector<Zp> nn = num.b, dd = den.b;
        sub_->div_by_pi_raw(nn.data(), bestv);
        sub_->div_by_pi_raw(dd.data(), bestv);
        std::vector<Zp> di = sub_->make_elem(), scratch(sub_->scratch() + sub_->rank());
        sub_->inv_raw(dd.data(), di.data());
        sub_->mul(nn.data(), di.data(), a.data(), scratch.data());
    } else {
        Val q = low_->div_val(num, den);
        a = q.b;
    }
    Val z = zero_val();
    const int bs = sub_->rank();
    std::copy(a.begin(), a.end(), z.b.begin() + (size_t)best * bs);
    z.prec = prec_cap();
    return z;
}

TorsionSet torsion_points(const FormalGroup& G, const TowerRing& T0) {
    const OKRing& R = G.okr();
    if (T0.level() != 0) throw BadInput("torsion_points: level-0 ring required");
    int q = (int)R.q();
    TorsionSet S;
    S.pts.push_back(T0.zero_val());
    // initial approximations [c](u0) from short endomorphism series, then
    // Hensel against Phi0 (simple Newton in the DVR)
    int L0 = 2 * (q - 1) + 4;
    auto digits = R.digit_reps();
    std::vector<OKElem> phi0(G.seed().begin() + 1, G.seed().end());
    std::vector<OKElem> phi0p(phi0.size() - 1);
    for (size_t i = 1; i < phi0.size(); ++i)
        phi0p[i - 1] = R.mul_int(phi0[i], (long long)i);
    for (size_t di = 1; di < digits.size(); ++di) {
        PSeries ec = G.endo(digits[di], L0);
        Val z = eval_at(ec, T0, T0.gen());
        // Newton: z <- z - Phi0(z)/Phi0'(z)
        for (int it = 0; it < 40; ++it) {
            Val N = T0.zero_val(), D = T0.zero_val();
            // Horner with O_K coefficients
            auto horner = [&](const std::vector<OKElem>& poly) {
                Val acc = T0.zero_val();
                for (int k = (int)poly.size() - 1; k >= 0; --k) {
                    acc = T0.mul_val(acc, z);
                    Val c = T0.zero_val();
                    T0.embed_ok(poly[k], c.b.data());
                    acc = T0.add_val(acc, c);
                }
                return acc;
            };
            N = horner(phi0);
            if (T0.val_lattice(N) >= T0.prec_cap() - (q - 1)) break;
            D = horner(phi0p);
            Val step = T0.div_val(N, D);
            z = T0.sub_val(z, step);
            z.prec = T0.prec_cap();
        }
        z.prec = T0.prec_cap() - 2 * (q - 1); // residual-based accuracy floor
        S.pts.push_back(z);
    }
    // annihilation and pairwise distinctness
    for (size_t a = 1; a < S.pts.size(); ++a) {
        Val fz = eval_at(G.seed_ps((int)G.seed().size()), T0, S.pts[a]);
        if (!T0.is_zero_val(Val{fz.b, std::min(fz.prec, T0.prec_cap() - (q - 1))}))
            throw DistinctnessFailure("torsion point not annihilated by f");
    }
    for (size_t a = 0; a < S.pts.size(); ++a)
        for (size_t b = a + 1; b < S.pts.size(); ++b) {
            Val d = T0.sub_val(S.pts[a], S.pts[b]);
            int v = T0.vfloor_raw(d.b.data());
            if (v != 1)
                throw DistinctnessFailure("torsion points not pairwise distinct");
        }
    return S;
}

Val eval_at(const PSeries& f, const TowerRing& T, const Val& x) {
    return ps_eval(f, x, T);
}

Val translate_gen(const FormalGroup& G, const TowerRing& T1, const Val& z0elem) {
    if (T1.level() != 1) throw BadInput("translate_gen: level-1 ring required");
    const TowerRing& T0 = *T1.lower();
    const BiSeries& F = G.law();
    // u1 + z = sum_i row_i(z) u1^i with row_i = sum_j a_ij z^j
    int NF = F.NF;
    std::vector<Val> rows(NF);
    std::vector<Val> zpow(NF);
    zpow[0] = T0.one_val();
    for (int j = 1; j < NF; ++j) zpow[j] = T0.mul_val(zpow[j - 1], z0elem);
    for (int i = 0; i < NF; ++i) {
        Val acc = T0.zero_val();
        for (int j = 0; i + j < NF; ++j) {
            OKElem a = bi_get(F, i, j);
            if (G.okr().is_zero_mod(a, G.okr().M()) && a.prec >= G.okr().M()) continue;
            acc = T0.add_val(acc, T0.mul_ok_val(zpow[j], a));
        }
        rows[i] = acc;
    }
    // Horner in the generator
    Val g = T1.gen();
    Val acc = T1.zero_val();
    for (int i = NF - 1; i >= 0; --i) {
        acc = T1.mul_val(acc, g);
        acc = T1.add_val(acc, T1.embed_lower(rows[i]));
    }
    // dropped table monomials a_ij u1^i z^j (i + j >= NF, j >= 1 by the unit
    // law) sit at u1-valuation >= NF
    acc.prec = std::min(acc.prec, NF);
    return acc;
}

Val galois_conj(const FormalGroup& G, const TowerRing& T, const Val& x, const Val& z) {
    if (T.level() == 1) {
        Val image = translate_gen(G, T, z);
        // substitute the conjugate generator into the polynomial coordinates
        const TowerRing& T0 = *T.lower();
        const int bs = T0.rank();
        Val acc = T.zero_val();
        for (int j = T.sub_deg() - 1; j >= 0; --j) {
            acc = T.mul_val(acc, image);
            Val cj;
            cj.b.assign(x.b.begin() + (size_t)j * bs, x.b.begin() + (size_t)(j + 1) * bs);
            cj.prec = T0.prec_cap();
            acc = T.add_val(acc, T.embed_lower(cj));
        }
        acc.prec = std::min(acc.prec, x.prec);
        return acc;
    }
    // level 0: u0 -> z directly
    const OKRing& R = G.okr();
    const int bs = R.deg();
    Val acc = T.zero_val();
    for (int j = T.sub_deg() - 1; j >= 0; --j) {
        acc = T.mul_val(acc, z);
        OKElem cj = R.zero();
        for (int i = 0; i < bs; ++i) cj.c[i] = x.b[(size_t)j * bs + i];
        Val c = T.zero_val();
        T.embed_ok(cj, c.b.data());
        acc = T.add_val(acc, c);
    }
    acc.prec = std::min(acc.prec, x.prec);
    return acc;
}

Val lt_trace(const FormalGroup& G, const TowerRing& T, const Val& x,
             const TorsionSet& tor) {
    if (T.val_lattice(x) < 1)
        throw BadInput("lt_trace: argument must have positive valuation");
    std::vector<Val> conj(tor.pts.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
    for (int i = 0; i < (int)tor.pts.size(); ++i)
        conj[i] = galois_conj(G, T, x, tor.pts[i]);
    return lt_sum_vals(G.law(), conj, T);
}

PSeries interp_basis(const FormalGroup& G, int n, int k, int L) {
    // g_{n,k} = ([pi^{n-k}](y)/y at y = [pi^{k+1}]) * [pi^k]
    const OkAsRing& A = G.ring();
    PSeries top = G.pi_iterate(n - k, L + 1);
    PSeries quot = ps_div_x_exact(top, 1); // [pi^{n-k}](y)/y
    quot.tail_vfl = 0;
    PSeries inner = G.pi_iterate(k + 1, L);
    PSeries comp = ps_compose(quot, inner, L);
    PSeries pik = G.pi_iterate(k, L);
    PSeries r = ps_mul(comp, pik, L);
    (void)A;
    return r;
}

PSeries finite_interpolate(const FormalGroup& G,
                           const std::vector<const TowerRing*>& towers,
                           const std::vector<Val>& alphas, int L) {
    const OKRing& R = G.okr();
    int n = (int)alphas.size() - 1;
    if (n < 0 || towers.size() != alphas.size())
        throw BadInput("finite_interpolate: level/value mismatch");
    PSeries f = ps_zero(G.ring(), L);
    f.tail_vfl = 0;
    for (int i = 0; i <= n; ++i) {
        const TowerRing& Ti = *towers[i];
        // alpha_i must lie in pi^{n-i} p_0 O_{K_i}
        int v_u0 = Ti.ram() / (int)(R.q() - 1); // valuation of u0 in K_i units
        int need = (n - i) * Ti.ram() + v_u0;
        if (Ti.val_lattice(alphas[i]) < need)
            throw DivisibilityViolation("finite_interpolate: value not in pi^{n-i} p0 O_Ki");
        if (Ti.is_zero_val(alphas[i])) continue;
        // beta = alpha_i / (pi^{n-i} u0)
        Val beta = alphas[i];
        if (n - i > 0) beta = Ti.div_pi_val(beta, n - i);
        // divide by u0 (one generator division at level 0, q of them... use
        // exact division by the embedded u0)
        Val u0i = Ti.level() == 0 ? Ti.gen() : Ti.embed_lower(Ti.lower()->gen());
        beta = Ti.div_val(beta, u0i);
        // f_i from the u_i-adic digits of beta (unknown beyond beta's precision)
        std::vector<OKElem> digs = Ti.digits_of(beta, L);
        PSeries fi = ps_from_ok(G.ring(), L, digs);
        for (int j = (int)digs.size(); j < L; ++j) {
            OKElem junk = G.okr().zero();
            junk.prec = 0;
            ps_set_ok(fi, j, junk);
        }
        fi.tail_vfl = 0;
        PSeries gi = interp_basis(G, n, i, L);
        f = ps_add(f, ps_mul(fi, gi, L));
    }
    return f;
}

} // namespace forge
