#include "forge/eigenspace.hpp"

namespace forge {

EigenContext::EigenContext(const ColemanContext& C) : C_(&C) {
    const OKRing& R = C.group().okr();
    lambda_ = R.div_by_pi(R.q_elem(), 1);
    auto vq = R.valuation(R.q_elem());
    pi3_ = vq.has_value() && *vq >= 3;
}

PSeries EigenContext::T_op(const PSeries& f, int nout) const {
    PSeries lf = C_->trace_op(f, nout);
    PSeries scaled = ps_scale_ok(ps_resize(f, nout), lambda_);
    return ps_sub(lf, scaled);
}

PSeries EigenContext::build_eigenvector(const PSeries& f0, int steps) const {
    require_pi3();
    const OKRing& R = C_->group().okr();
    if (ps_divisible_pi(f0, 1))
        throw BadInput("build_eigenvector: f0 must be nonzero mod pi");
    {
        PSeries l0 = C_->trace_op(f0, std::min(f0.n, 16));
        if (!ps_is_zero(l0))
            throw NotInKernel("build_eigenvector: f0 is not in the trace kernel");
    }
    OKElem qpi3 = R.div_by_pi(R.q_elem(), 3);
    int J = C_->J();
    PSeries f = ps_resize(f0, J);
    PSeries fi = ps_resize(f0, J);
    for (int i = 1; i <= steps; ++i) {
        fi = C_->preimage(ps_scale_ok(fi, qpi3));
        f = ps_add(f, ps_scale_ok(fi, R.pi_pow(i)));
    }
    return f;
}

PSeries EigenContext::rho(const PSeries& f, const OKElem& lambda) const {
    const OKRing& R = C_->group().okr();
    auto v = R.valuation(lambda);
    if (!v.has_value() || *v < 1)
        throw LambdaNotDivisible("rho: pi | lambda required");
    OKElem lp = R.div_by_pi(lambda, 1);
    PSeries corr = ps_scale_ok(C_->preimage(ps_resize(f, C_->J())), lp);
    return ps_sub(ps_resize(f, C_->J()), corr);
}

PSeries EigenContext::rho_inverse(const PSeries& h, const OKElem& lambda,
                                  int* steps) const {
    {
        PSeries lh = C_->trace_op(h, std::min(h.n, 12));
        if (!ps_is_zero(lh))
            throw NotInKernel("rho_inverse: input is not in the trace kernel");
    }
    int J = C_->J();
    const int q1 = (int)C_->group().okr().q() - 1;
    PSeries G = ps_resize(h, J); // g_1 = h
    int count = 1;
    for (;;) {
        PSeries next = ps_sub(ps_resize(h, J), rho(G, lambda));
        int xv = ps_xval(next);
        if (xv >= J) break;
        if (xv < count * q1)
            throw NoConvergence("rho_inverse: x-adic gain violated");
        G = ps_add(G, next);
        ++count;
        if (count > J) throw NoConvergence("rho_inverse: failed to stabilize");
    }
    if (steps) *steps = count;
    return G;
}

PSeries EigenContext::div_pi_iterate(const PSeries& S, int k) const {
    // ascending exact division by [pi^k](x) = pi^k x + ...
    const FormalGroup& G = C_->group();
    const OKRing& R = G.okr();
    const OkAsRing& A = G.ring();
    int n = S.n;
    if (k == 0) return S;
    PSeries it = G.pi_iterate(k, n);
    PSeries quot = ps_zero(A, std::max(n - 1, 1));
    quot.tail_vfl = std::min(S.tail_vfl, 0);
    PSeries rs = S;
    // leading coefficient of [pi^k] at x^1 is pi^k
    int piv = 0;
    {
        auto v = R.valuation(ps_get_ok(it, 1));
        if (!v.has_value()) throw DivisibilityViolation("div_pi_iterate: degenerate iterate");
        piv = *v;
    }
    OKElem lead_unit = R.inv(R.div_by_pi(ps_get_ok(it, 1), piv));
    {
        OKElem c0 = ps_get_ok(rs, 0);
        if (!R.is_zero_mod(c0, std::min(c0.prec, R.M())))
            throw DivisibilityViolation("div_pi_iterate: nonzero constant term");
    }
    for (int d = 0; d + 1 < n; ++d) {
        OKElem num = ps_get_ok(rs, d + 1);
        OKElem td = R.mul(R.div_by_pi_relaxed(num, piv), lead_unit);
        ps_set_ok(quot, d, td);
        // subtract td x^d * [pi^k]
        PSeries term = ps_shift_x(ps_scale_ok(it, td), d, n);
        rs = ps_sub(rs, term);
    }
    return quot;
}

PSeries EigenContext::solve_eigen_divisible(const PSeries& j, int n, int steps) const {
    require_pi3();
    const FormalGroup& G = C_->group();
    const OKRing& R = G.okr();
    if (!ps_divisible_pi(j, 1)) throw BadInput("solve_eigen_divisible: pi | j required");
    int J = C_->J();
    OKElem qpi2 = R.div_by_pi(R.q_elem(), 2);
    PSeries h = ps_zero(G.ring(), J);
    h.tail_vfl = 0;
    PSeries hi = C_->preimage(ps_div_pi(ps_resize(j, J), 1)); // L(h_1) = j
    for (int i = 1; i <= steps; ++i) {
        // L(h_{i+1}) = (q/pi) h_i, so h_{i+1} = preimage((q/pi^2) h_i)
        if (i > 1) hi = C_->preimage(ps_scale_ok(hi, qpi2));
        PSeries iter = G.pi_iterate(n + i, J);
        h = ps_add(h, ps_mul(iter, hi, J));
    }
    return h;
}

Prop312Result prop312_pipeline(const EigenContext& ec,
                               const std::vector<const TowerRing*>& towers,
                               const Val& z, int n) {
    ec.require_pi3();
    const ColemanContext& C = ec.coleman();
    const FormalGroup& G = C.group();
    const OKRing& R = G.okr();
    if (n < 0 || n >= (int)towers.size())
        throw BadInput("prop312: tower level unavailable");
    const TowerRing& Tn = *towers[n];
    if (Tn.val_lattice(z) < 1) throw BadInput("prop312: z must be in the maximal ideal");
    int J = C.J();

    // additive targets: y_n = log(z), Tr(y_i) = (q/pi) y_{i-1}
    std::vector<Val> y(n + 1);
    y[n] = ks_eval(G.log_series(), z, Tn);
    for (int i = n; i >= 1; --i) {
        // y_{i-1} = (pi/q) Tr_{K_i/K_{i-1}}(y_i)
        Val tr = towers[i]->trace(y[i]);
        const TowerRing& Tl = *towers[i - 1];
        Val trv{tr.b, tr.prec};
        // multiply by pi/q: divide by q/pi = pi^{f_K - 1} unit
        OKElem qpi = R.div_by_pi(R.q_elem(), 1);
        auto vq = R.valuation(qpi);
        int vv = vq ? *vq : 0;
        Val scaled = Tl.div_pi_val(trv, vv);
        OKElem unit = R.inv(R.div_by_pi(qpi, vv));
        y[i - 1] = Tl.mul_ok_val(scaled, unit);
    }

    // minimal l: pi^l log(z) in pi O_{K_n} and pi^l y_i in pi^{n+1-i} O_{K_i}
    int l = 0;
    {
        int vlog = Tn.val_lattice(y[n]);
        int need = Tn.ram(); // one factor of pi
        if (vlog < need) l = std::max(l, (need - vlog + Tn.ram() - 1) / Tn.ram());
        for (int i = 0; i < n; ++i) {
            int vi = towers[i]->val_lattice(y[i]);
            int ni = (n + 1 - i) * towers[i]->ram();
            if (vi < ni) l = std::max(l, (ni - vi + towers[i]->ram() - 1) / towers[i]->ram());
        }
    }

    // alpha_i = pi^l y_i; Lemma-style interpolation wants alpha_i in
    // pi^{n-i} p_0 O_{K_i}
    std::vector<Val> alphas(n + 1);
    OKElem pil = R.pi_pow(l);
    for (int i = 0; i <= n; ++i) alphas[i] = towers[i]->mul_ok_val(y[i], pil);
    std::vector<const TowerRing*> tw(towers.begin(), towers.begin() + n + 1);
    PSeries f = finite_interpolate(G, tw, alphas, J);

    // constant-term correction: F = f - c + f0 with
    // c = (1 - q/pi)^{-1} Tr_{K_0/K}(f(u_0))
    const TowerRing& T0 = *towers[0];
    Val fu0 = eval_at(f, T0, T0.gen());
    Val trv = T0.trace(fu0);
    OKElem tr0 = ok_from_val(OkAsRing(R), Val{trv.b, trv.prec});
    OKElem qpi = R.div_by_pi(R.q_elem(), 1);
    OKElem c = R.mul(R.inv(R.sub(R.one(), qpi)), tr0);
    std::vector<Val> cvals(n + 1);
    for (int i = 0; i <= n; ++i) cvals[i] = val_from_ok(*towers[i], c);
    PSeries f0 = finite_interpolate(G, tw, cvals, J);
    PSeries F = ps_add(ps_sub(f, ps_monomial_ok(G.ring(), J, c, 0)), f0);

    // kill the remaining eigen-defect: T(F) = [pi^n] jj with pi | jj
    PSeries W = ec.T_op(F, J);
    PSeries jj = W;
    for (int i = 0; i < n; ++i) jj = ec.div_pi_iterate(jj, 1);
    jj = ps_resize(jj, J);
    int steps = std::max(8, std::min(R.M() / 2, 26));
    PSeries h = ec.solve_eigen_divisible(jj, n, steps);
    PSeries f1 = ps_sub(F, h);

    Prop312Result out;
    out.l = l;
    out.f1 = f1;
    out.fstar = G.exp_compose(ps_scale_ok(f1, R.pi()), J);
    return out;
}

Counterexample build_counterexample(const EigenContext& ec, const TowerRing& T1,
                                    int eps_valuation) {
    ec.require_pi3();
    const FormalGroup& G = ec.group();
    const OKRing& R = G.okr();
    if (T1.level() != 1) throw BadInput("counterexample needs the level-1 tower");
    const TowerRing& T0 = *T1.lower();
    Counterexample out;
    // a0 = pi^eps u0: any nonzero value of valuation >= eps
    out.a0 = T0.mul_ok_val(T0.gen(), R.pi_pow(std::max(eps_valuation, 0)));
    // z with Tr_{K_1/K_0}(z) = pi
    Val target = val_from_ok(T0, R.pi());
    out.z = T1.find_trace_preimage(target);
    // a1 = z (q/pi^2) a0
    OKElem qpi2 = R.div_by_pi(R.q_elem(), 2);
    Val a0up = T1.embed_lower(out.a0);
    out.a1 = T1.mul_val(out.z, T1.mul_ok_val(a0up, qpi2));
    out.val_a0 = T0.val_lattice(out.a0);
    out.val_a1 = T1.val_lattice(out.a1);
    // exact check of the compatibility relation
    Val tr = T1.trace(out.a1);
    Val rhs = T0.mul_ok_val(out.a0, R.div_by_pi(R.q_elem(), 1));
    Val d = T0.sub_val(Val{tr.b, tr.prec}, rhs);
    if (!T0.is_zero_val(d))
        throw IdentityViolation("counterexample: trace relation failed");
    return out;
}

} // namespace forge
