#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "forge/lubin_tate.hpp"

using namespace forge;

namespace {

struct Q3 {
    OKRing R;
    std::unique_ptr<FormalGroup> G;
    Q3(int NF = 16, int J = 32, int D = 24) : R(OKConfig{3, 1, {0, 1}, -1, 24}) {
        // f = -3x + x^3
        std::vector<OKElem> f = {R.zero(), R.pi(), R.zero(), R.one()};
        G = std::make_unique<FormalGroup>(R, f, LTParams{NF, J, D});
    }
};

std::vector<OKElem> gm_seed(const OKRing& R) {
    // (1+x)^p - 1 over Z_p with pi = p
    u64 p = R.p();
    std::vector<OKElem> f((size_t)p + 1, R.zero());
    long long binom = 1;
    for (u64 k = 1; k <= p; ++k) {
        binom = binom * (long long)(p - k + 1) / (long long)k;
        f[(size_t)k] = R.from_int(binom);
    }
    return f;
}

OKElem rnd(const OKRing& R, std::mt19937_64& rng) {
    std::vector<long long> c(R.deg());
    for (auto& x : c) x = (long long)(rng() % 100000) - 50000;
    return R.from_coords(c);
}

} // namespace

TEST_CASE("multiplicative law from (1+x)^p - 1 is x + y + xy") {
    OKRing R(OKConfig{3, 1, {0, 1}, 1, 20}); // pi = 3
    FormalGroup G(R, gm_seed(R), LTParams{12, 24, 16});
    const BiSeries& F = G.law();
    for (int i = 0; i < 12; ++i)
        for (int j = 0; i + j < 12; ++j) {
            OKElem expect = (i + j <= 1 && i + j == 1) || (i == 1 && j == 1)
                                ? R.one()
                                : R.zero();
            CHECK(R.eq(bi_get(F, i, j), expect));
        }
}

TEST_CASE("unit laws and symmetry of the constructed law") {
    Q3 q;
    const BiSeries& F = q.G->law();
    // F(x,0) = x and F(0,y) = y
    for (int i = 0; i < F.NF; ++i) {
        OKElem expect = (i == 1) ? q.R.one() : q.R.zero();
        CHECK(q.R.eq(bi_get(F, i, 0), expect));
        CHECK(q.R.eq(bi_get(F, 0, i), expect));
    }
    for (int i = 0; i < F.NF; ++i)
        for (int j = 0; i + j < F.NF; ++j) CHECK(q.R.eq(bi_get(F, i, j), bi_get(F, j, i)));
}

TEST_CASE("seed is an endomorphism of the law: f(F) = F(f,f)") {
    Q3 q(12, 24, 16);
    int n = 12;
    std::mt19937_64 rng(10);
    // substitute two series: f(F(a,b)) = F(f(a), f(b)) for random pi-divisible a, b
    PSeries a = ps_zero(q.G->ring(), n), b = ps_zero(q.G->ring(), n);
    for (int i = 0; i < n; ++i) {
        ps_set_ok(a, i, q.R.mul(q.R.pi(), rnd(q.R, rng)));
        ps_set_ok(b, i, q.R.mul(q.R.pi(), rnd(q.R, rng)));
    }
    PSeries sum = q.G->oplus(a, b, n);
    PSeries lhs = FormalGroup::apply_poly(q.G->seed(), sum, n);
    PSeries rhs = q.G->oplus(FormalGroup::apply_poly(q.G->seed(), a, n),
                             FormalGroup::apply_poly(q.G->seed(), b, n), n);
    CHECK(ps_is_zero(ps_sub(lhs, rhs)));
}

TEST_CASE("associativity and commutativity via substitution") {
    Q3 q(12, 24, 16);
    int n = 12;
    std::mt19937_64 rng(11);
    PSeries a = ps_zero(q.G->ring(), n), b = ps_zero(q.G->ring(), n), c = ps_zero(q.G->ring(), n);
    for (int i = 1; i < n; ++i) {
        ps_set_ok(a, i, rnd(q.R, rng));
        ps_set_ok(b, i, rnd(q.R, rng));
        ps_set_ok(c, i, rnd(q.R, rng));
    }
    PSeries ab = q.G->oplus(a, b, n);
    PSeries bc = q.G->oplus(b, c, n);
    CHECK(ps_is_zero(ps_sub(q.G->oplus(ab, c, n), q.G->oplus(a, bc, n))));
    CHECK(ps_is_zero(ps_sub(q.G->oplus(a, b, n), q.G->oplus(b, a, n))));
}

TEST_CASE("endomorphisms: identities and ring homomorphism") {
    Q3 q(12, 24, 16);
    int n = 16;
    // [1] = x
    CHECK(ps_is_zero(ps_sub(q.G->endo(q.R.one(), n), ps_x(q.G->ring(), n))));
    // [pi] = f
    CHECK(ps_is_zero(ps_sub(q.G->endo(q.R.pi(), n), q.G->seed_ps(n))));
    // x | [a](x)
    std::mt19937_64 rng(12);
    for (int it = 0; it < 10; ++it) {
        OKElem a = rnd(q.R, rng), b = rnd(q.R, rng);
        PSeries ea = q.G->endo(a, n), eb = q.G->endo(b, n);
        CHECK(q.R.eq(ps_get_ok(ea, 0), q.R.zero()));
        // [a][b] = [ab]
        PSeries comp = ps_compose(ea, eb, n);
        CHECK(ps_is_zero(ps_sub(comp, q.G->endo(q.R.mul(a, b), n))));
        // [a] + [b] = [a+b] under the law
        PSeries sum = q.G->oplus(ea, eb, n);
        CHECK(ps_is_zero(ps_sub(sum, q.G->endo(q.R.add(a, b), n))));
    }
    // f is an endomorphism: f([a]) = [a](f)
    OKElem a = rnd(q.R, rng);
    PSeries ea = q.G->endo(a, n);
    PSeries lhs = FormalGroup::apply_poly(q.G->seed(), ea, n);
    PSeries rhs = ps_compose(ea, q.G->seed_ps(n), n);
    CHECK(ps_is_zero(ps_sub(lhs, rhs)));
}

TEST_CASE("endo of G_m and p gives (1+x)^p - 1") {
    OKRing R(OKConfig{3, 1, {0, 1}, 1, 20});
    FormalGroup G(R, gm_seed(R), LTParams{10, 20, 12});
    PSeries ep = G.endo(R.from_int(3), 20);
    CHECK(ps_is_zero(ps_sub(ep, G.seed_ps(20))));
    // [2](x) = (1+x)^2 - 1 = 2x + x^2
    PSeries e2 = G.endo(R.from_int(2), 8);
    PSeries expect = ps_from_ok(G.ring(), 8, {R.zero(), R.from_int(2), R.one()});
    CHECK(ps_is_zero(ps_sub(e2, expect)));
}

TEST_CASE("log and exp") {
    Q3 q(16, 32, 32);
    int n = 24;
    // log' * dF/dy(x,0) = 1 and log' matches the law table slice
    const PSeries& lp = q.G->log_deriv();
    // u from the functional equation agrees with the F-table column j=1
    for (int i = 0; i + 1 < q.G->law().NF; ++i) {
        OKElem a = bi_get(q.G->law(), i, 1);
        OKElem diff = q.R.sub(a, ps_get_ok(
            ps_inverse(lp, q.G->params().J), i));
        CHECK(q.R.is_zero_mod(diff, std::min(a.prec, q.R.M())));
    }
    // exp(log(h)) = h for pi-divisible h
    std::mt19937_64 rng(13);
    PSeries h = ps_zero(q.G->ring(), n);
    for (int i = 0; i < n; ++i) ps_set_ok(h, i, q.R.mul(q.R.pi(), rnd(q.R, rng)));
    PSeries lg = q.G->log_compose(h, n);
    CHECK(ps_divisible_pi(lg, 1));
    PSeries back = q.G->exp_compose(lg, n);
    CHECK(ps_is_zero(ps_sub(back, h)));
    // log(F(x,y)) = log x + log y through series substitution
    PSeries h2 = ps_zero(q.G->ring(), n);
    for (int i = 0; i < n; ++i) ps_set_ok(h2, i, q.R.mul(q.R.pi(), rnd(q.R, rng)));
    PSeries sum = q.G->oplus(h, h2, n);
    PSeries lhs = q.G->log_compose(sum, n);
    PSeries rhs = ps_add(q.G->log_compose(h, n), q.G->log_compose(h2, n));
    CHECK(ps_is_zero(ps_sub(lhs, rhs)));
    // log([pi](h)) = pi log(h)
    PSeries pih = FormalGroup::apply_poly(q.G->seed(), h, n);
    CHECK(ps_is_zero(ps_sub(q.G->log_compose(pih, n),
                            ps_scale_ok(q.G->log_compose(h, n), q.R.pi()))));
}

TEST_CASE("classical logarithm of G_m") {
    OKRing R(OKConfig{3, 1, {0, 1}, 1, 18});
    FormalGroup G(R, gm_seed(R), LTParams{10, 16, 16});
    // log = x - x^2/2 + x^3/3 - ...: compare n * c_n = (-1)^(n-1) n / n
    const KSeries& lg = G.log_series();
    for (int nterm = 1; nterm < 12; ++nterm) {
        KElem c = lg.c[nterm];
        KElem expect = k_mul(R, k_of(R, R.from_int((nterm % 2) ? 1 : -1)),
                             k_inv(R, k_of(R, R.from_int(nterm))));
        KElem d = k_sub(R, c, expect);
        CHECK(k_vfloor(R, d) >= std::min(k_prec(R, d), 10));
    }
}

TEST_CASE("iso between the two q3 groups") {
    OKRing R(OKConfig{3, 1, {0, 1}, -1, 24});
    std::vector<OKElem> f = {R.zero(), R.pi(), R.zero(), R.one()};
    // g = -3x + 3x^2 + x^3
    std::vector<OKElem> g = {R.zero(), R.pi(), R.from_int(3), R.one()};
    validate_rpiq(R, g);
    FormalGroup Gf(R, f, LTParams{14, 28, 28});
    FormalGroup Gg(R, g, LTParams{14, 28, 28});
    int n = 20;
    PSeries i = iso(Gf, Gg, n);
    // i = x mod deg 2
    CHECK(R.eq(ps_get_ok(i, 0), R.zero()));
    CHECK(R.eq(ps_get_ok(i, 1), R.one()));
    // g(i) = i(f) mod x^10 (and beyond)
    PSeries lhs = FormalGroup::apply_poly(g, i, 10);
    PSeries rhs = ps_compose(i, Gf.seed_ps(10), 10);
    CHECK(ps_is_zero(ps_sub(lhs, rhs)));
    // i(F_f(x,y)) = F_g(i(x), i(y)) on series samples
    std::mt19937_64 rng(14);
    PSeries a = ps_zero(Gf.ring(), 12), b = ps_zero(Gf.ring(), 12);
    for (int k = 1; k < 12; ++k) {
        ps_set_ok(a, k, rnd(R, rng));
        ps_set_ok(b, k, rnd(R, rng));
    }
    PSeries l2 = ps_compose(i, Gf.oplus(a, b, 12), 12);
    PSeries r2 = Gg.oplus(ps_compose(i, a, 12), ps_compose(i, b, 12), 12);
    CHECK(ps_is_zero(ps_sub(l2, r2)));
    // iso(G, G) = x
    PSeries idm = iso(Gf, Gf, 12);
    CHECK(ps_is_zero(ps_sub(idm, ps_x(Gf.ring(), 12))));
    // inverse isomorphisms compose to x
    PSeries j = iso(Gg, Gf, n);
    CHECK(ps_is_zero(ps_sub(ps_compose(i, j, 12), ps_x(Gf.ring(), 12))));
    // agreement with exp_g(log_f) where that route has precision
    KSeries route = ks_compose_ks(Gg.exp_series(), Gf.log_series(), 12);
    PSeries route_ps = ks_to_ps(route, Gf.ring(), "exp_g(log_f)");
    PSeries diff = ps_sub(route_ps, ps_resize(i, 12));
    CHECK(ps_is_zero(diff));
}

TEST_CASE("rpiq validation") {
    OKRing R(OKConfig{3, 1, {0, 1}, -1, 24});
    // pi x + x^q accepted
    CHECK_NOTHROW(validate_rpiq(R, {R.zero(), R.pi(), R.zero(), R.one()}));
    // pi x + pi x^2 + x^q accepted
    CHECK_NOTHROW(validate_rpiq(R, {R.zero(), R.pi(), R.pi(), R.one()}));
    // x + x^q rejected: linear term is not pi
    CHECK_THROWS_AS(validate_rpiq(R, {R.zero(), R.one(), R.zero(), R.one()}), SeedInvalid);
    // non-monic rejected
    CHECK_THROWS_AS(validate_rpiq(R, {R.zero(), R.pi(), R.zero(), R.from_int(4)}), SeedInvalid);
}

TEST_CASE("compositional inverse of log is exp (classical pair)") {
    OKRing R(OKConfig{3, 1, {0, 1}, 1, 16});
    FormalGroup G(R, gm_seed(R), LTParams{10, 14, 14});
    // exp - 1 = x + x^2/2 + x^3/6 + ...: check 6 e_3 = 1
    KElem e3 = G.exp_series().c[3];
    KElem six = k_of(R, R.from_int(6));
    KElem d = k_sub(R, k_mul(R, e3, six), k_of(R, R.one()));
    CHECK(k_vfloor(R, d) >= 8);
}
