#include "forge/interp.hpp"

namespace forge {

namespace {

// constant-term side of the A relation: sum^{LT}_z f(z) = [q/pi](f(0)),
// evaluated in the level-0 tower (the log transport cannot see it)
bool constant_relation(const ColemanContext& C, const PSeries& f, bool want_zero) {
    const FormalGroup& G = C.group();
    const TowerRing& T0 = C.tower0();
    TorsionSet S = torsion_points(G, T0);
    std::vector<Val> vals;
    for (const auto& z : S.pts) vals.push_back(ps_eval(f, z, T0));
    Val lhs = lt_sum_vals(G.law(), vals, T0);
    Val rhs = T0.zero_val();
    if (!want_zero) {
        const OKRing& R = G.okr();
        OKElem qpi = R.div_by_pi(R.q_elem(), 1);
        PSeries e = G.endo(qpi, std::min(C.J(), 2 * R.M()));
        Val f0 = ps_eval(f, T0.zero_val(), T0);
        rhs = ps_eval(e, f0, T0);
    }
    Val d = T0.sub_val(lhs, rhs);
    d.prec = std::min(d.prec, G.law().NF);
    return T0.is_zero_val(d);
}

} // namespace

Membership check_membership(const ColemanContext& C, ModuleTag tag, const PSeries& f,
                            int nout) {
    const FormalGroup& G = C.group();
    const OKRing& R = G.okr();
    Membership m;
    switch (tag) {
        case ModuleTag::C:
        case ModuleTag::CPrime: {
            if (!ps_divisible_pi(f, 1)) {
                m.ok = false;
                m.residual = ps_resize(f, nout);
                return m;
            }
            m.residual = C.trace_op(f, nout);
            m.ok = ps_is_zero(m.residual);
            if (tag == ModuleTag::CPrime && m.ok) {
                OKElem f1 = ps_get_ok(f, 1);
                m.ok = R.is_zero_mod(f1, std::min(f1.prec, R.M()));
            }
            return m;
        }
        case ModuleTag::D: {
            if (R.q() <= 2) throw QTooSmall("membership in D is only checked for q > 2");
            if (!ps_divisible_pi(f, 1)) {
                m.ok = false;
                m.residual = ps_resize(f, nout);
                return m;
            }
            PSeries lg = G.log_compose(f, std::min(f.n, C.J()));
            m.residual = C.trace_op(lg, nout);
            m.ok = ps_is_zero(m.residual) && constant_relation(C, f, true);
            return m;
        }
        case ModuleTag::A: {
            if (R.q() <= 2) throw QTooSmall("membership in A is only checked for q > 2");
            if (f.n > 0 && f.cvfl(0) < 1)
                throw BadInput("membership in A requires |f(0)| < 1");
            // log transport: f in A iff L(log f) = (q/pi) log f, plus the
            // constant-term relation in the tower
            KSeries lg = ks_compose_ps(G.log_series(), f, std::min(std::max(f.n, nout), C.J()));
            int emax = 0;
            for (const auto& c : lg.c) emax = std::max(emax, -c.e);
            KElem sc{R.pi_pow(std::min(emax, R.M())), 0};
            KSeries scaled = ks_scale(lg, sc);
            PSeries g = ks_to_ps(scaled, G.ring(), "A membership: pi^e log(f)");
            PSeries lhs = C.trace_op(g, nout);
            OKElem qpi = R.div_by_pi(R.q_elem(), 1);
            PSeries rhs = ps_scale_ok(ps_resize(g, nout), qpi);
            m.residual = ps_sub(lhs, rhs);
            m.ok = ps_is_zero(m.residual) && constant_relation(C, f, false);
            return m;
        }
        case ModuleTag::EndF: {
            OKElem lam = lambda_of(G, f);
            PSeries e = G.endo(lam, std::max(f.n, nout));
            PSeries d = G.ominus(ps_resize(f, nout), ps_resize(e, nout), nout);
            m.residual = d;
            m.ok = ps_is_zero(d);
            return m;
        }
    }
    throw BadInput("unknown module tag");
}

PSeries phi(const FormalGroup& G, const PSeries& f, int n) {
    const OKRing& R = G.okr();
    if (f.n > 0 && f.cvfl(0) < 1)
        throw BadInput("phi: |f(0)| < 1 required");
    PSeries A = FormalGroup::apply_poly(G.seed(), ps_resize(f, n), n);
    PSeries B = ps_compose(ps_resize(f, n), G.seed_ps(n), n);
    PSeries r = G.ominus(A, B, n);
    if (!ps_divisible_pi(r, 1))
        throw IdentityViolation("phi(f) is not divisible by pi");
    // the q-power Frobenius congruence makes every coefficient of phi(f)
    // divisible by pi, including the ones beyond the truncation
    r.tail_vfl = std::max(std::min(r.tail_vfl, TAIL_EXACT), std::min(1, r.tail_vfl + 1));
    if (r.tail_vfl < 1) r.tail_vfl = 1;
    OKElem f1 = ps_get_ok(f, 1);
    if (R.is_zero_mod(f1, std::min(f1.prec, R.M())) && f.n > 1) {
        OKElem r1 = ps_get_ok(r, 1);
        if (!R.is_zero_mod(r1, std::min(r1.prec, R.M())))
            throw IdentityViolation("phi(f) has a nonzero linear term although f'(0) = 0");
    }
    return r;
}

PSeries solve_phi(const FormalGroup& G, const PSeries& g, int n) {
    const OKRing& R = G.okr();
    const OkAsRing& Aring = G.ring();
    if (!ps_divisible_pi(g, 1)) throw BadInput("solve_phi: pi | g required");
    {
        OKElem g1 = ps_get_ok(g, 1);
        if (!R.is_zero_mod(g1, std::min(g1.prec, R.M())))
            throw BadInput("solve_phi: g'(0) = 0 required");
    }
    // constant term: [1/(pi-1)](g(0))
    OKElem pim1 = R.inv(R.sub(R.pi(), R.one()));
    PSeries e = G.endo(pim1, std::min(4 * R.M(), std::max(n, 8)));
    Val a0v = ps_eval(e, val_from_ok(Aring, ps_get_ok(g, 0)), Aring);
    OKElem a0 = ok_from_val(Aring, a0v);

    // derivative tables of the law for the linearized lift
    const BiSeries& F = G.law();
    BiSeries Fx = bi_zero(R, F.NF), Fy = bi_zero(R, F.NF);
    for (int i = 1; i < F.NF; ++i)
        for (int j = 0; i + j < F.NF; ++j)
            bi_set(Fx, i - 1, j, R.mul_int(bi_get(F, i, j), i));
    for (int i = 0; i < F.NF; ++i)
        for (int j = 1; i + j < F.NF; ++j)
            bi_set(Fy, i, j - 1, R.mul_int(bi_get(F, i, j), j));

    std::vector<OKElem> fprime, iprime_poly;
    for (size_t i = 1; i < G.seed().size(); ++i)
        fprime.push_back(R.mul_int(G.seed()[i], (long long)i));

    PSeries f = ps_zero(Aring, 2);
    ps_set_ok(f, 0, a0);
    f.tail_vfl = 0;
    PSeries gfull = ps_resize(g, n);
    PSeries fser = G.seed_ps(n);
    PSeries iser = G.inv_series(n);
    PSeries ideriv = ps_derivative(iser);
    int m = 2;
    while (m < n) {
        int m2 = std::min(2 * m, n);
        f = ps_extend_exact(f, m2);
        f.tail_vfl = 0;
        PSeries A = FormalGroup::apply_poly(G.seed(), f, m2); // [pi](f)
        PSeries Bc = ps_compose(f, fser, m2);                 // f([pi])
        PSeries B = ps_compose(iser, Bc, m2);                 // i(f([pi]))
        PSeries cur = bi_substitute(F, A, B, m2);             // phi(f_partial)
        PSeries E = ps_sub(ps_resize(gfull, m2), cur);
        // linearization: W1 delta + W2 (delta o [pi]) = E with
        // W1 = F_x(A,B) [pi]'(f), W2 = F_y(A,B) i'(f([pi]))
        PSeries W1 = ps_mul(bi_substitute(Fx, A, B, m2),
                            FormalGroup::apply_poly(fprime, f, m2), m2);
        PSeries W2 = ps_mul(bi_substitute(Fy, A, B, m2),
                            ps_compose(ideriv, Bc, m2), m2);
        // ascending solve for the coefficients of delta
        PSeries cross1 = ps_zero(Aring, m2), cross2 = ps_zero(Aring, m2);
        PSeries fpow = ps_one(Aring, m2);
        for (int i = 0; i < m; ++i) fpow = ps_mul(fpow, fser, m2);
        std::vector<OKElem> delta(m2, R.zero());
        OKElem W10 = ps_get_ok(W1, 0), W20 = ps_get_ok(W2, 0);
        for (int t = m; t < m2; ++t) {
            if (t > m) fpow = ps_mul(fpow, fser, m2);
            OKElem num = ps_get_ok(E, t);
            num = R.sub(num, ps_get_ok(cross1, t));
            num = R.sub(num, ps_get_ok(cross2, t));
            // coefficient of delta_t: W1(0) + W2(0) pi^t = pi (1 + pi z)
            OKElem coef = R.add(W10, R.mul(W20, R.pi_pow(t)));
            OKElem unit = R.div_by_pi(coef, 1);
            OKElem qt = R.div_by_pi_relaxed(num, 1);
            OKElem dt = R.mul(qt, R.inv(unit));
            dt.prec = qt.prec;
            delta[t] = dt;
            if (!R.is_zero_mod(dt, std::max(dt.prec, 1))) {
                cross1 = ps_add(cross1, ps_scale_ok(ps_shift_x(W1, t, m2), dt));
                cross2 = ps_add(cross2, ps_scale_ok(ps_mul(W2, fpow, m2), dt));
            }
        }
        for (int t = m; t < m2; ++t) ps_set_ok(f, t, delta[t]);
        m = m2;
    }
    return f;
}

OKElem lambda_of(const FormalGroup& G, const PSeries& f) {
    const OKRing& R = G.okr();
    const OkAsRing& A = G.ring();
    if (f.n > 0 && f.cvfl(0) < 1)
        throw BadInput("lambda_of: |f(0)| < 1 required");
    Val lp = ps_eval(G.log_deriv(), val_from_ok(A, ps_get_ok(f, 0)), A);
    OKElem lam = R.mul(ok_from_val(A, lp), ps_get_ok(f, 1));
    // the linear term of f - [lambda] vanishes
    PSeries e = G.endo(lam, 4);
    PSeries d = G.ominus(ps_resize(f, 4), e, 4);
    OKElem d1 = ps_get_ok(d, 1);
    if (!R.is_zero_mod(d1, std::min(d1.prec, R.M()) - 1))
        throw IdentityViolation("lambda extraction left a linear term");
    return lam;
}

PSeries a_to_cprime(const ColemanContext& C, const PSeries& f, int n) {
    const FormalGroup& G = C.group();
    PSeries h = phi(G, f, n);
    PSeries c = G.log_compose(h, n);
    return c;
}

PSeries cprime_to_a(const ColemanContext& C, const PSeries& c, int n) {
    const FormalGroup& G = C.group();
    PSeries h = G.exp_compose(ps_resize(c, n), n);
    return solve_phi(G, h, n);
}

PSeries log_D_to_C(const ColemanContext& C, const PSeries& h, int n) {
    const FormalGroup& G = C.group();
    Membership m = check_membership(C, ModuleTag::D, h, std::min(n, 16));
    if (!m.ok) throw IdentityViolation("log_D_to_C: input is not in D");
    return G.log_compose(ps_resize(h, n), n);
}

} // namespace forge
