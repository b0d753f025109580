#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "forge/eigenspace.hpp"
#include "forge/interp.hpp"

using namespace forge;

namespace {

// reduced q27 environment: p = 3, f_K = 3, pi = -3, with a working modulus
// and degree small enough for unit tests
struct Q27 {
    OKRing R;
    std::unique_ptr<FormalGroup> G;
    std::unique_ptr<TowerRing> T0;
    std::unique_ptr<ColemanContext> C;
    std::unique_ptr<EigenContext> E;
    int J;
    Q27(int Mwork = 40, int Jdeg = 260, int NF = 12) : R(mkcfg(Mwork)), J(Jdeg) {
        std::vector<OKElem> f(28, R.zero());
        f[1] = R.pi();
        f[27] = R.one();
        G = std::make_unique<FormalGroup>(R, f, LTParams{NF, Jdeg, 40});
        T0 = std::make_unique<TowerRing>(*G, 0);
        C = std::make_unique<ColemanContext>(*G, *T0, Jdeg);
        E = std::make_unique<EigenContext>(*C);
    }
    static OKConfig mkcfg(int M) { return OKConfig{3, 3, {-1, -1, 0, 1}, -1, M}; }
};

Q27& q27() {
    static Q27 q;
    return q;
}

} // namespace

TEST_CASE("guards: pi^3 | q only for f_K >= 3") {
    OKRing R(OKConfig{3, 1, {0, 1}, -1, 30});
    std::vector<OKElem> f = {R.zero(), R.pi(), R.zero(), R.one()};
    FormalGroup G(R, f, LTParams{8, 24, 12});
    TowerRing T0(G, 0);
    ColemanContext C(G, T0, 24);
    EigenContext E(C);
    CHECK(!E.pi3_divides_q());
    CHECK_THROWS_AS(E.build_eigenvector(C.h_n(1), 2), Pi3NotDividingQ);
    CHECK(q27().E->pi3_divides_q());
}

TEST_CASE("T on kernel elements") {
    Q27& q = q27();
    // T(f0) = -(q/pi) f0 for f0 in ker L
    PSeries h1 = q.C->h_n(1);
    PSeries t = q.E->T_op(h1, 12);
    PSeries expect = ps_scale_ok(ps_resize(h1, 12), q.R.neg(q.E->lambda()));
    CHECK(ps_is_zero(ps_sub(t, expect)));
    // T(0) = 0
    CHECK(ps_is_zero(q.E->T_op(ps_zero(q.G->ring(), 8), 8)));
}

TEST_CASE("eigenvector construction: L(f) = (q/pi) f") {
    Q27& q = q27();
    // h_1 = x for this sparse seed; iterate enough that pi^steps clears the
    // reachable precision at the reduced degree
    PSeries f = q.E->build_eigenvector(q.C->h_n(1), 9);
    PSeries resid = q.E->T_op(f, 12);
    // residual = -(q/pi) pi^9 f_9: valuation at least 2 + 9
    CHECK(ps_is_zero(ps_resize(resid, 3)));
    int p0 = ps_min_prec(ps_resize(resid, 3), 3);
    CHECK(p0 >= 4);
    // f = f0 mod pi
    PSeries d = ps_sub(ps_resize(f, 12), ps_resize(q.C->h_n(1), 12));
    CHECK(ps_divisible_pi(d, 1));
}

TEST_CASE("rho round trips on kernel samples") {
    Q27& q = q27();
    for (int n : {1, 2, 3}) {
        PSeries h = q.C->h_n(n);
        int steps = 0;
        PSeries g = q.E->rho_inverse(h, &steps);
        // rho(g) = h
        PSeries back = q.E->rho(g);
        PSeries d = ps_sub(back, ps_resize(h, q.J));
        CHECK(ps_is_zero(ps_resize(d, 60)));
        // the iteration gains q-1 degrees per step
        CHECK(steps <= (q.J + 25) / 26 + 1);
        // L(g) = lambda g at the tracked precision
        PSeries lg = q.C->trace_op(g, 3);
        PSeries rhs = ps_scale_ok(ps_resize(g, 3), q.E->lambda());
        CHECK(ps_is_zero(ps_sub(lg, rhs)));
    }
    // rho(0) = 0 and rejection of non-kernel input
    CHECK(ps_is_zero(q.E->rho(ps_zero(q.G->ring(), 8))));
    CHECK_THROWS_AS(q.E->rho_inverse(ps_one(q.G->ring(), 8), nullptr), NotInKernel);
    CHECK_THROWS_AS(q.E->rho(ps_x(q.G->ring(), 4), q.R.one()), LambdaNotDivisible);
}

TEST_CASE("solve_eigen_divisible at n = 0") {
    Q27& q = q27();
    // j = pi * (1 + x)
    PSeries j = ps_zero(q.G->ring(), 4);
    ps_set_ok(j, 0, q.R.pi());
    ps_set_ok(j, 1, q.R.pi());
    PSeries h = q.E->solve_eigen_divisible(j, 0, 7);
    // T(h) = [pi^0](x) j = x j(x): the iterate at n = 0 is the identity series
    PSeries xj = ps_shift_x(ps_resize(j, 4), 1, 5);
    PSeries resid = ps_sub(q.E->T_op(h, 5), xj);
    CHECK(ps_is_zero(ps_resize(resid, 4)));
    CHECK(ps_min_prec(ps_resize(resid, 4), 4) >= 3);
    // [pi^{1}] divides h: the quotient times [pi] gives h back
    PSeries quot = q.E->div_pi_iterate(h, 1);
    PSeries back = ps_mul(quot, q.G->pi_iterate(1, q.J), q.J);
    CHECK(ps_is_zero(ps_resize(ps_sub(back, h), 40)));
    // j = 0 gives h = 0
    CHECK(ps_is_zero(q.E->solve_eigen_divisible(ps_zero(q.G->ring(), 4), 0, 3)));
}

TEST_CASE("counterexample prefix: exact trace relation and decay") {
    Q27& q = q27();
    TowerRing T1(*q.G, 1);
    Counterexample ce = build_counterexample(*q.E, T1, 4);
    // valuation growth at least v(q) - 2 = 1 in pi-units: lattice units of
    // K1 are q(q-1) per pi, K0 has (q-1) per pi
    int v0_pi_units = ce.val_a0 / (q.R.q() > 1 ? (int)(q.R.q() - 1) : 1);
    int v1_pi_units = ce.val_a1 / (int)((q.R.q() - 1) * q.R.q());
    CHECK(v1_pi_units >= v0_pi_units + 1);
    // a0 = 0 gives the all-zero chain
    Counterexample z = build_counterexample(*q.E, T1, 0);
    CHECK(z.val_a0 >= 1);
}

TEST_CASE("prop 3.1.2 pipeline at n = 0") {
    Q27& q = q27();
    TowerRing T1(*q.G, 1);
    std::vector<const TowerRing*> towers = {q.T0.get(), &T1};
    Val z = q.T0->gen();
    Prop312Result res = prop312_pipeline(*q.E, towers, z, 0);
    CHECK(res.l >= 1);
    // T(f1) = 0 at the reachable precision
    PSeries resid = q.E->T_op(res.f1, 3);
    CHECK(ps_is_zero(ps_resize(resid, 3)));
    // f*(u0) = [pi^{l+1}](z) in the level-0 tower
    Val lhs = eval_at(res.fstar, *q.T0, q.T0->gen());
    PSeries iter = q.G->pi_iterate(res.l + 1, 40);
    Val rhs = eval_at(iter, *q.T0, z);
    Val d = q.T0->sub_val(lhs, rhs);
    CHECK(q.T0->is_zero_val(d));
    // z = 0 short-circuits to the zero series
    Prop312Result zero = prop312_pipeline(*q.E, towers, q.T0->zero_val(), 0);
    CHECK(ps_is_zero(ps_resize(zero.fstar, 12)));
}
