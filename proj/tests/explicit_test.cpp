#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "forge/explicit_sys.hpp"
#include "forge/lubin_tate.hpp"

using namespace forge;

namespace {

struct Q3 {
    OKRing R;
    std::unique_ptr<FormalGroup> Gf, Gg;
    std::unique_ptr<TowerRing> T0f, T0g;
    std::unique_ptr<ColemanContext> Cf;
    Q3() : R(OKConfig{3, 1, {0, 1}, -1, 40}) {
        std::vector<OKElem> f = {R.zero(), R.pi(), R.zero(), R.one()};
        std::vector<OKElem> g = {R.zero(), R.pi(), R.from_int(3), R.one()};
        validate_rpiq(R, g);
        LTParams prm{16, 48, 48};
        Gf = std::make_unique<FormalGroup>(R, f, prm);
        Gg = std::make_unique<FormalGroup>(R, g, prm);
        T0f = std::make_unique<TowerRing>(*Gf, 0);
        T0g = std::make_unique<TowerRing>(*Gg, 0);
        Cf = std::make_unique<ColemanContext>(*Gf, *T0f, 48);
    }
};

Q3& q3() {
    static Q3 q;
    return q;
}

} // namespace

TEST_CASE("roots of unity") {
    // p = 3: {1, -1}
    ZpCtx z3(3, 30);
    auto r3 = roots_of_unity(z3);
    REQUIRE(r3.size() == 2);
    bool has_one = false, has_minus = false;
    for (auto& r : r3) {
        if (z3.eq(r, z3.one())) has_one = true;
        if (z3.eq(r, z3.from_int(-1))) has_minus = true;
    }
    CHECK(has_one);
    CHECK(has_minus);
    // p = 5, M = 4: four roots with x^4 = 1 mod 625
    ZpCtx z5(5, 4);
    auto r5 = roots_of_unity(z5);
    REQUIRE(r5.size() == 4);
    Zp prod = z5.one();
    for (auto& r : r5) {
        CHECK(z5.eq(z5.pow(r, 4), z5.one()));
        prod = z5.mul(prod, r);
    }
    // product of all roots of unity is -1
    CHECK(z5.eq(prod, z5.from_int(-1)));
}

TEST_CASE("idempotent identities, exact at full precision") {
    for (auto [p, M] : std::vector<std::pair<u64, int>>{{3, 40}, {5, 20}}) {
        GroupRing GR(p, M);
        const ZpCtx& z = GR.zctx();
        int n = GR.order();
        GroupRing::Elem sum = GR.zero();
        for (int j = 0; j < n; ++j) {
            auto e = GR.idempotent(j);
            // e^2 = e, exactly
            CHECK(GR.eq(GR.mul(e, e), e));
            sum = GR.add(sum, e);
            for (int j2 = 0; j2 < j; ++j2) {
                auto prod = GR.mul(e, GR.idempotent(j2));
                for (auto& c : prod) CHECK(z.is_zero(c));
            }
        }
        CHECK(GR.eq(sum, GR.one()));
    }
}

TEST_CASE("p = 3 idempotents have the closed form (1 +- delta)/2") {
    GroupRing GR(3, 24);
    const ZpCtx& z = GR.zctx();
    Zp half = z.inv(z.from_int(2));
    auto e0 = GR.idempotent(0);
    CHECK(z.eq(e0[0], half));
    CHECK(z.eq(e0[1], half));
    auto e1 = GR.idempotent(1);
    CHECK(z.eq(e1[0], half));
    CHECK(z.eq(e1[1], z.neg(half)));
}

TEST_CASE("torsion product identity for r in {x, x^2}") {
    Q3& q = q3();
    PSeries x = ps_x(q.Gg->ring(), 10);
    CHECK(torsion_product_check(*q.Gg, *q.T0g, x, 10));
    PSeries x2 = ps_monomial_ok(q.Gg->ring(), 10, q.R.one(), 2);
    CHECK(torsion_product_check(*q.Gg, *q.T0g, x2, 10));
    // r = 0: both sides vanish (the z = 0 factor)
    CHECK(torsion_product_check(*q.Gg, *q.T0g, ps_zero(q.Gg->ring(), 6), 6));
}

TEST_CASE("norm-compatible system from the isomorphism") {
    Q3& q = q3();
    PSeries i = iso(*q.Gf, *q.Gg, 48);
    CHECK(norm_system_check(*q.Cf, i, 10));
    // tower witness: norm_{K1/K0} of i(u1) is i(u0) (p odd)
    TowerRing T1(*q.Gf, 1);
    Val iu1 = eval_at(i, T1, T1.gen());
    Val nm = T1.norm(iu1);
    Val iu0 = eval_at(i, *q.T0f, q.T0f->gen());
    Val d = q.T0f->sub_val(Val{nm.b, nm.prec}, iu0);
    d.prec = std::min(d.prec, 16);
    CHECK(q.T0f->is_zero_val(d));
    // norm(K0 -> K, u0) = pi for q odd
    OkAsRing A(q.R);
    CHECK(q.R.eq(ok_from_val(A, q.T0f->norm(q.T0f->gen())), q.R.pi()));
    // the identity case g = f reduces to the torsion product with r = x
    PSeries idm = iso(*q.Gf, *q.Gf, 16);
    CHECK(norm_system_check(*q.Cf, idm, 10));
}

TEST_CASE("eigen decomposition of principal units") {
    Q3& q = q3();
    GroupRing GR(3, q.R.M());
    // u = 1 + u0
    Val u = q.T0f->add_val(q.T0f->one_val(), q.T0f->gen());
    // trivial character: e_psi u has norm = norm(u)^(sum of coefficients)...
    // nontrivial character: norm(e_psi u) = 1
    for (int sample = 0; sample < 3; ++sample) {
        Val base = u;
        if (sample == 1)
            base = q.T0f->add_val(q.T0f->one_val(),
                                  q.T0f->mul_ok_val(q.T0f->gen(), q.R.from_int(4)));
        if (sample == 2)
            base = q.T0f->add_val(q.T0f->one_val(), q.T0f->mul_ok_val(
                                      q.T0f->pow_val(q.T0f->gen(), 3), q.R.from_int(2)));
        Val proj = eigen_decompose(*q.Gf, *q.T0f, GR, 1, base);
        Val nm = q.T0f->norm(proj);
        OkAsRing A(q.R);
        OKElem nval = ok_from_val(A, Val{nm.b, nm.prec});
        OKElem d = q.R.sub(nval, q.R.one());
        CHECK(q.R.is_zero_mod(d, std::min({d.prec, nm.prec / 2, 12})));
    }
    // u = 1 is fixed by every idempotent
    Val one = q.T0f->one_val();
    Val p1 = eigen_decompose(*q.Gf, *q.T0f, GR, 0, one);
    CHECK(q.T0f->eq_val(p1, one));
    // non-units rejected
    CHECK_THROWS_AS(eigen_decompose(*q.Gf, *q.T0f, GR, 1, q.T0f->gen()), BadInput);
}
