#include "forge/explicit_sys.hpp"

namespace forge {

std::vector<Zp> roots_of_unity(const ZpCtx& z) {
    if (z.p() == 2) throw BadInput("roots_of_unity: odd p required");
    u64 p = z.p();
    std::vector<Zp> out;
    for (u64 a = 1; a < p; ++a) {
        // Newton on x^{p-1} - 1 from the residue a
        Zp x = z.from_u128(a);
        for (int it = 0; it < z.M() + 2; ++it) {
            Zp xp2 = z.pow(x, p - 2);
            Zp f = z.sub(z.mul(xp2, x), z.one()); // x^{p-1} - 1
            if (z.val(f) >= z.M()) break;
            Zp fp = z.mul(z.from_u128(p - 1), xp2); // (p-1) x^{p-2}
            x = z.sub(x, z.mul(f, z.inv(fp)));
        }
        out.push_back(x);
    }
    return out;
}

GroupRing::GroupRing(u64 p, int M) : z_(p, M), n_((int)p - 1) {
    auto roots = roots_of_unity(z_);
    // pick a generator of mu_{p-1}: a root whose powers exhaust the set
    for (const Zp& w : roots) {
        std::vector<Zp> pows(n_);
        Zp cur = z_.one();
        bool gen = true;
        for (int i = 0; i < n_; ++i) {
            pows[i] = cur;
            if (i > 0 && z_.eq(cur, z_.one())) gen = false;
            cur = z_.mul(cur, w);
        }
        if (gen) {
            omega_pow_ = pows;
            return;
        }
    }
    throw Error("GroupRing: no generator of mu_{p-1} found");
}

GroupRing::Elem GroupRing::one() const {
    Elem e(n_);
    e[0] = z_.one();
    return e;
}

GroupRing::Elem GroupRing::add(const Elem& a, const Elem& b) const {
    Elem r(n_);
    for (int i = 0; i < n_; ++i) r[i] = z_.add(a[i], b[i]);
    return r;
}

GroupRing::Elem GroupRing::mul(const Elem& a, const Elem& b) const {
    Elem r(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
            int k = (i + j) % n_;
            r[k] = z_.add(r[k], z_.mul(a[i], b[j]));
        }
    return r;
}

bool GroupRing::eq(const Elem& a, const Elem& b) const {
    for (int i = 0; i < n_; ++i)
        if (!z_.eq(a[i], b[i])) return false;
    return true;
}

Zp GroupRing::character_value(int j, int delta_power) const {
    int e = (int)(((long long)j * delta_power) % n_);
    if (e < 0) e += n_;
    return omega_pow_[e];
}

GroupRing::Elem GroupRing::idempotent(int j) const {
    Elem e(n_);
    Zp inv_n = z_.inv(z_.from_int(n_));
    for (int i = 0; i < n_; ++i) {
        // coefficient of delta^i is psi(delta^{-i})/(p-1)
        int ex = (int)(((long long)j * (n_ - i)) % n_);
        e[i] = z_.mul(inv_n, omega_pow_[ex]);
    }
    return e;
}

PSeries resultant_product(const FormalGroup& Gg, int nout) {
    // det of multiplication by F_g(y, T) on O_K[[y]][T]/(g(T)); the roots of
    // g(T) are 0 and the nonzero torsion points, so the determinant equals
    // y * prod_{z != 0} (y + z) shifted by the law... g(T) includes T = 0,
    // hence det = prod over all q torsion points of (y + z)
    const OKRing& R = Gg.okr();
    const OkAsRing& A = Gg.ring();
    int q = (int)R.q();
    const BiSeries& F = Gg.law();
    // rows of F(y, T) as a vector over the T-basis, entries series in y;
    // T-degrees of the table beyond q-1 fold down through the monic relation
    // T^q = -sum_{i<q} g_i T^i
    std::vector<PSeries> full((size_t)F.NF, ps_zero(A, nout));
    for (int j = 0; j < F.NF; ++j) {
        PSeries row = ps_zero(A, nout);
        for (int i = 0; i + j < F.NF; ++i)
            if (i < nout) ps_set_ok(row, i, bi_get(F, i, j));
        // table truncation: coefficients beyond NF are unknown integrals
        row.tail_vfl = 0;
        full[j] = row;
    }
    for (int j = F.NF - 1; j >= q; --j) {
        PSeries top = full[j];
        if (ps_is_zero(top)) continue;
        for (int i = 0; i < q; ++i)
            full[j - q + i] = ps_sub(full[j - q + i], ps_scale_ok(top, Gg.seed()[i]));
        full[j] = ps_zero(A, nout);
    }
    std::vector<PSeries> rep(full.begin(), full.begin() + q);
    // monomials a_{i,j} with i + j >= NF are missing from the table; they
    // fold into row t with at least ceil((NF - i - t)/(q - 1)) factors of pi
    for (int t = 0; t < q; ++t)
        for (int i = 0; i < nout; ++i) {
            long long gap = (long long)F.NF - i - t;
            if (gap <= 0) {
                rep[t].prec[i] = std::min(rep[t].prec[i], 0);
            } else {
                int pol = (int)((gap + q - 2) / (q - 1));
                rep[t].prec[i] = std::min(rep[t].prec[i], pol);
            }
        }
    for (int t = 0; t < q; ++t) ps_refresh_meta(rep[t]);
    // multiplication matrix columns: rep * T^k mod g(T)
    std::vector<std::vector<PSeries>> M((size_t)q,
                                        std::vector<PSeries>((size_t)q, ps_zero(A, nout)));
    std::vector<PSeries> cur = rep;
    for (int k = 0; k < q; ++k) {
        for (int i = 0; i < q; ++i) M[i][k] = cur[i];
        if (k + 1 < q) {
            std::vector<PSeries> nr((size_t)q, ps_zero(A, nout));
            PSeries top = cur[q - 1];
            for (int i = q - 1; i >= 1; --i) nr[i] = cur[i - 1];
            for (int i = 0; i < q; ++i)
                nr[i] = ps_sub(nr[i], ps_scale_ok(top, Gg.seed()[i]));
            cur = nr;
        }
    }
    // division-free determinant (same scheme as the norm operator)
    std::vector<PSeries> C(2, ps_zero(A, nout));
    C[0] = ps_scale_int(ps_one(A, nout), -1);
    C[1] = M[0][0];
    for (int k = 1; k < q; ++k) {
        std::vector<PSeries> T(k + 2, ps_zero(A, nout));
        T[0] = ps_scale_int(ps_one(A, nout), -1);
        T[1] = M[k][k];
        std::vector<PSeries> vec(k, ps_zero(A, nout));
        for (int i = 0; i < k; ++i) vec[i] = M[i][k];
        for (int j = 2; j <= k + 1; ++j) {
            for (int i = 0; i < k; ++i) T[j] = ps_add(T[j], ps_mul(M[k][i], vec[i], nout));
            if (j <= k) {
                std::vector<PSeries> nv(k, ps_zero(A, nout));
                for (int i = 0; i < k; ++i)
                    for (int l = 0; l < k; ++l)
                        nv[i] = ps_add(nv[i], ps_mul(M[i][l], vec[l], nout));
                vec = nv;
            }
        }
        std::vector<PSeries> Cn(C.size() + 1, ps_zero(A, nout));
        for (size_t i = 0; i < Cn.size(); ++i)
            for (size_t j = 0; j < T.size() && j <= i; ++j) {
                if (i - j >= C.size()) continue;
                Cn[i] = ps_add(Cn[i], ps_mul(T[j], C[i - j], nout));
            }
        C = Cn;
    }
    return C.back();
}

bool torsion_product_check(const FormalGroup& Gg, const TowerRing& T0g,
                           const PSeries& r, int nout) {
    const OKRing& R = Gg.okr();
    if (r.n > 0 && !R.is_zero_mod(ps_get_ok(r, 0), std::max(ps_get_ok(r, 0).prec, 1)))
        throw BadInput("torsion_product_check: r(0) = 0 required");
    // tower route: expand the product over the torsion points of Gg
    TorsionSet S = torsion_points(Gg, T0g);
    PSeries prod = ps_one(T0g, nout);
    PSeries remb = ps_zero(T0g, r.n);
    for (int i = 0; i < r.n; ++i) ps_set_ok(remb, i, ps_get_ok(r, i));
    remb.tail_vfl = r.tail_vfl;
    for (const auto& z : S.pts) {
        PSeries zc = ps_zero(T0g, 1);
        T0g.copy(z.b.data(), zc.at(0));
        zc.prec[0] = z.prec;
        ps_refresh_meta(zc);
        PSeries translated = bi_substitute(Gg.law(), remb, zc, nout);
        prod = ps_mul(prod, translated, nout);
    }
    // descend: the product has O_K coefficients
    PSeries descended = ps_zero(Gg.ring(), nout);
    for (int i = 0; i < nout; ++i) {
        OKElem c0 = R.zero();
        for (int k = 0; k < R.deg(); ++k) c0.c[k] = prod.at(i)[k];
        c0.prec = std::min(prod.prec[i] / (int)(R.q() - 1), R.M());
        // the non-constant tower coordinates must vanish
        std::vector<Zp> rest(prod.at(i) + R.deg(), prod.at(i) + T0g.rank());
        for (const Zp& t : rest)
            if (R.zctx().val(t) < std::max(std::min(prod.prec[i] / (int)(R.q() - 1),
                                                    R.M()), 0))
                throw DescentFailure("torsion product did not descend to O_K");
        ps_set_ok(descended, i, c0);
    }
    // the closed form (-1)^{p-1} g(r(y))
    PSeries gr = FormalGroup::apply_poly(Gg.seed(), ps_resize(r, nout), nout);
    if (R.p() % 2 == 0) gr = ps_neg(gr); // (-1)^{p-1}
    PSeries d1 = ps_sub(descended, gr);
    if (!ps_is_zero(d1)) return false;
    // determinant route composed with r
    PSeries detres = resultant_product(Gg, nout);
    PSeries composed = ps_compose(detres, ps_resize(r, nout), nout);
    PSeries d2 = ps_sub(composed, gr);
    return ps_is_zero(d2);
}

bool norm_system_check(const ColemanContext& Cf, const PSeries& i, int nout) {
    const OKRing& R = Cf.group().okr();
    PSeries nm = Cf.norm_op(ps_resize(i, std::max(i.n, nout)), nout);
    PSeries rhs = ps_resize(i, nout);
    if (R.p() % 2 == 0) rhs = ps_neg(rhs);
    return ps_is_zero(ps_sub(nm, rhs));
}

Val eigen_decompose(const FormalGroup& G, const TowerRing& T0, const GroupRing& GR,
                    int psi_index, const Val& u) {
    const OKRing& R = G.okr();
    // u must be a principal unit: residue digit 1
    OKElem res = T0.residue_digit(u);
    if (!R.eq(res, R.one()))
        throw BadInput("eigen_decompose: principal unit required");
    // generator of the order-(p-1) subgroup of the torsion action: the
    // Teichmueller lift of a residue generator, acting by u0 -> [c](u0)
    int n = GR.order();
    OKElem c = R.zero();
    {
        // find a digit of multiplicative order exactly p-1 mod pi
        auto reps = R.digit_reps();
        for (size_t idx = 1; idx < reps.size(); ++idx) {
            OKElem cand = reps[idx];
            // order divides q-1; want exactly p-1
            bool ok = true;
            OKElem pw = R.one();
            for (int e = 1; e < n; ++e) {
                pw = R.mul(pw, cand);
                if (R.is_zero_mod(R.sub(pw, R.one()), 1)) ok = false;
            }
            pw = R.mul(pw, cand);
            if (!R.is_zero_mod(R.sub(pw, R.one()), 1)) ok = false;
            if (ok) {
                // Teichmueller lift by iterating the q-power map
                OKElem t = cand;
                for (int it = 0; it < R.M() + 2; ++it) t = R.pow(t, R.q());
                c = t;
                break;
            }
        }
        if (R.is_zero_mod(c, R.M())) throw Error("eigen_decompose: no generator found");
    }
    // conjugates delta^i(u) via the torsion substitution u0 -> [c^i](u0)
    std::vector<Val> conj(n);
    conj[0] = u;
    OKElem ci = R.one();
    int L = 2 * (int)(R.q() - 1) * R.M() / std::max((int)R.q() - 1, 1) + 8;
    L = std::min(L, 4 * R.M());
    for (int i = 1; i < n; ++i) {
        ci = R.mul(ci, c);
        PSeries e = G.endo(ci, L);
        Val pt = eval_at(e, T0, T0.gen());
        conj[i] = galois_conj(G, T0, u, pt);
    }
    // multiplicative action: prod_i conj_i(u)^{t_i}, with Z_p exponents
    // realized through the p-adic digit chain u^t = prod_j (u^{p^j})^{t_j};
    // each factor approaches 1, so the product stabilizes
    auto unit_pow = [&](const Val& base, Zp expo) -> Val {
        Val acc = T0.one_val();
        Val b = base;
        u128 t = R.zctx().to_u128(expo);
        u64 p = R.p();
        for (int j = 0; j < R.M(); ++j) {
            u64 digit = (u64)(t % p);
            t /= p;
            for (u64 rep2 = 0; rep2 < digit; ++rep2) acc = T0.mul_val(acc, b);
            Val dm = T0.sub_val(b, T0.one_val());
            if (T0.val_lattice(dm) >= T0.prec_cap()) break;
            b = T0.pow_val(b, p);
        }
        return acc;
    };
    GroupRing::Elem e = GR.idempotent(psi_index);
    Val out = T0.one_val();
    for (int i = 0; i < n; ++i) out = T0.mul_val(out, unit_pow(conj[i], e[i]));
    return out;
}

} // namespace forge
