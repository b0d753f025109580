#include "forge/coleman.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <deque>

namespace forge {

using boost::multiprecision::cpp_int;

namespace {

struct Rat {
    cpp_int n{0}, d{1}; // d > 0, coprime to p by construction
};

Rat rat_add(const Rat& a, const Rat& b) {
    Rat r{a.n * b.d + b.n * a.d, a.d * b.d};
    cpp_int g = gcd(abs(r.n), r.d);
    if (g > 1) {
        r.n /= g;
        r.d /= g;
    }
    return r;
}

Rat rat_mul_int(const Rat& a, const cpp_int& k) {
    Rat r{a.n * k, a.d};
    cpp_int g = gcd(abs(r.n), r.d);
    if (g > 1) {
        r.n /= g;
        r.d /= g;
    }
    return r;
}

Rat rat_div_exact_p(const Rat& a, long long p) {
    // a must be divisible by p (denominator coprime to p)
    if (a.n % p != 0) throw DigitFailure("exact digit expansion: residue did not cancel");
    return Rat{a.n / p, a.d};
}

long long rat_mod_p(const Rat& a, long long p) {
    // a.n * a.d^{-1} mod p
    cpp_int n = a.n % p;
    if (n < 0) n += p;
    cpp_int d = a.d % p;
    long long dn = d.convert_to<long long>();
    long long inv = 1;
    for (long long e = p - 2, b = dn % p; e; e >>= 1) {
        if (e & 1) inv = inv * b % p;
        b = b * b % p;
    }
    return (n.convert_to<long long>() * inv) % p;
}

// signed small-integer coordinates of an O_K element stored mod p^M
std::vector<cpp_int> signed_coords(const OKRing& R, const OKElem& a) {
    std::vector<cpp_int> out(R.deg());
    cpp_int m = 0;
    {
        u128 mm = R.zctx().modulus();
        m = (cpp_int(u64(mm >> 64)) << 64) + cpp_int(u64(mm));
    }
    for (int i = 0; i < R.deg(); ++i) {
        u128 u = R.zctx().to_u128(a.c[i]);
        cpp_int v = (cpp_int(u64(u >> 64)) << 64) + cpp_int(u64(u));
        if (v > m / 2) v -= m;
        out[i] = v;
    }
    return out;
}

} // namespace

std::vector<OKElem> exact_ok_digit_expansion(const FormalGroup& G, long long num,
                                             long long den, int count) {
    const OKRing& R = G.okr();
    const long long p = (long long)R.p();
    const int fk = R.deg(), d = (int)R.q() - 1;
    if (den % p == 0) throw BadInput("digit expansion: denominator not prime to p");

    // exact integer coordinates of the modulus Phi0 = f(z)/z and of m(t)
    std::vector<std::vector<cpp_int>> phi(d);
    for (int j = 0; j < d; ++j) phi[j] = signed_coords(R, G.seed()[j + 1]);
    std::vector<cpp_int> mt(fk + 1);
    for (int i = 0; i <= fk; ++i) mt[i] = R.cfg().m[i];

    // O_K product of exact rational coordinate vectors, reduced mod m(t)
    auto ok_mul = [&](const std::vector<Rat>& a, const std::vector<cpp_int>& b) {
        std::vector<Rat> acc(2 * fk - 1);
        for (int i = 0; i < fk; ++i)
            for (int j = 0; j < fk; ++j)
                acc[i + j] = rat_add(acc[i + j], rat_mul_int(a[i], b[j]));
        for (int i = 2 * fk - 2; i >= fk; --i) {
            for (int j = 0; j < fk; ++j)
                acc[i - fk + j] = rat_add(acc[i - fk + j], rat_mul_int(acc[i], -mt[j]));
            acc[i] = Rat{};
        }
        acc.resize(fk);
        return acc;
    };

    // state: coordinates over the z0-basis, each an O_K vector of rationals
    std::vector<std::vector<Rat>> v(d, std::vector<Rat>(fk));
    v[0][0] = Rat{num, den};

    std::vector<OKElem> digits;
    auto reps = R.digit_reps();
    for (int step = 0; step < count; ++step) {
        // canonical digit of the residue class: coordinates of v[0] mod p
        std::vector<long long> dc(fk);
        size_t idx = 0, mult = 1;
        for (int i = 0; i < fk; ++i) {
            dc[i] = rat_mod_p(v[0][i], p);
            idx += (size_t)dc[i] * mult;
            mult *= (size_t)p;
        }
        digits.push_back(reps[idx]);
        // v := (v - digit) / z0: y_{d-1} = -(x_0 - digit)/phi_0, with
        // phi_0 = pi = pi_unit * p (a Z_p scalar by the seed shape)
        for (int i = 0; i < fk; ++i) v[0][i] = rat_add(v[0][i], Rat{-dc[i], 1});
        long long piu = 0;
        {
            auto pc = signed_coords(R, R.pi_unit());
            piu = pc[0].convert_to<long long>();
        }
        std::vector<Rat> ylast(fk);
        for (int i = 0; i < fk; ++i) {
            Rat t = rat_div_exact_p(v[0][i], p);
            // divide by the unit pi_unit: multiply by 1/piu as a rational
            t.n = -t.n;
            t.d *= piu < 0 ? -piu : piu;
            if (piu < 0) t.n = -t.n;
            cpp_int g = gcd(abs(t.n), t.d);
            if (g > 1) {
                t.n /= g;
                t.d /= g;
            }
            ylast[i] = t;
        }
        std::vector<std::vector<Rat>> nv(d, std::vector<Rat>(fk));
        for (int j = 1; j < d; ++j) {
            auto corr = ok_mul(ylast, phi[j]);
            for (int i = 0; i < fk; ++i) nv[j - 1][i] = rat_add(v[j][i], corr[i]);
        }
        nv[d - 1] = ylast;
        v = nv;
    }
    return digits;
}

ColemanContext::ColemanContext(const FormalGroup& G, const TowerRing& T0, int J)
    : G_(&G), T0_(&T0), J_(J) {
    const OKRing& R = G.okr();
    int q = (int)R.q();
    // signed symmetric-function constants for the power-sum recursion
    seed_e_.resize(q);
    for (int i = 1; i < q; ++i) seed_e_[i] = R.neg(G.seed()[q - i]);

    // k from the exact digit expansion of pi / (q - 1)
    auto piu = signed_coords(R, R.pi_unit());
    long long num = piu[0].convert_to<long long>() * (long long)R.p();
    long long den = q - 1;
    auto digits = exact_ok_digit_expansion(G, num, den, J);
    for (int n = 0; n < std::min(q - 1, J); ++n)
        if (!R.is_zero_mod(digits[n], R.M()))
            throw DigitFailure("k: expansion of pi/(q-1) has digits below q-1");
    k_ = ps_from_ok(G.ring(), J, digits);
    for (int n = 0; n < std::min(q - 1, J); ++n) ps_set_ok(k_, n, R.zero());
    k_.tail_vfl = 0;

    // w = L(k)/pi with w(0) = 1
    PSeries lk = trace_op(k_, J);
    w_ = ps_div_pi(lk, 1);
    OKElem w0 = ps_get_ok(w_, 0);
    if (!R.is_zero_mod(R.sub(w0, R.one()), std::min(w0.prec, R.M())))
        throw IdentityViolation("w(0) != 1 at working precision");
    PSeries wpi = ps_compose(w_, G.seed_ps(J), J);
    winv_pi_ = ps_inverse(wpi, J);
}

std::vector<PSeries> ColemanContext::power_sums(int count, int nout) const {
    const OKRing& R = G_->okr();
    const OkAsRing& A = G_->ring();
    int q = (int)R.q();
    std::vector<PSeries> ps;
    ps.reserve(count);
    PSeries fx = G_->seed_ps(std::min(nout, (int)G_->seed().size()));
    fx = ps_resize(fx, nout);
    for (int k = 0; k < count; ++k) {
        if (k == 0) {
            PSeries p0 = ps_zero(A, nout);
            ps_set_ok(p0, 0, R.from_int(q));
            ps.push_back(p0);
            continue;
        }
        PSeries acc = ps_zero(A, nout);
        for (int i = 1; i < std::min(k, q); ++i)
            acc = ps_add(acc, ps_scale_ok(ps[k - i], seed_e_[i]));
        if (k < q)
            acc = ps_add(acc, ps_monomial_ok(A, nout, R.mul_int(G_->seed()[q - k], -k), 0));
        else if (k == q)
            acc = ps_add(acc, ps_scale_int(fx, q));
        else
            acc = ps_add(acc, ps_mul(fx, ps[k - q], nout));
        ps.push_back(acc);
    }
    return ps;
}

PSeries ColemanContext::translate_sum(const PSeries& s, int nout) const {
    const OKRing& R = G_->okr();
    const OkAsRing& A = G_->ring();
    int q = (int)R.q();
    PSeries fx = ps_resize(G_->seed_ps(std::min(nout, (int)G_->seed().size())), nout);
    PSeries acc = ps_zero(A, nout);
    std::deque<PSeries> window; // p_{k-q} .. p_{k-1}
    for (int k = 0; k < s.n; ++k) {
        PSeries pk = ps_zero(A, nout);
        if (k == 0) {
            ps_set_ok(pk, 0, R.from_int(q));
        } else {
            for (int i = 1; i < std::min(k, q); ++i)
                pk = ps_add(pk, ps_scale_ok(window[window.size() - i], seed_e_[i]));
            if (k < q)
                pk = ps_add(pk, ps_monomial_ok(A, nout, R.mul_int(G_->seed()[q - k], -k), 0));
            else if (k == q)
                pk = ps_add(pk, ps_scale_int(fx, q));
            else
                pk = ps_add(pk, ps_mul(fx, window.front(), nout));
        }
        OKElem sk = ps_get_ok(s, k);
        if (!(R.is_zero_mod(sk, R.M()) && sk.prec >= R.M()))
            acc = ps_add(acc, ps_scale_ok(pk, sk));
        window.push_back(std::move(pk));
        if ((int)window.size() > q) window.pop_front();
    }
    if (!s.exact_poly()) {
        // tail terms s~_n p_n (n >= s.n) reach x^e with valuation at least
        // s.tail + ceil((s.n - q e)/(q - 1)): the seed's non-leading
        // coefficients are divisible by pi
        for (int e = 0; e < nout; ++e) {
            long long boost = ((long long)s.n - (long long)q * e);
            int b = boost > 0 ? (int)((boost + q - 2) / (q - 1)) : 0;
            acc.prec[e] = std::min(acc.prec[e], sat_add(s.tail_vfl, b));
        }
        ps_refresh_meta(acc);
        acc.tail_vfl = std::min(acc.tail_vfl, s.tail_vfl);
    }
    return acc;
}

PSeries ColemanContext::uncompose_pi(const PSeries& S, int nout) const {
    const OKRing& R = G_->okr();
    const OkAsRing& A = G_->ring();
    PSeries T = ps_zero(A, nout);
    T.tail_vfl = std::min(S.tail_vfl, 0);
    PSeries rs = ps_resize(S, nout);
    PSeries pipow = ps_one(A, nout);
    PSeries fser = ps_resize(G_->seed_ps((int)G_->seed().size()), nout);
    for (int d = 0; d < nout; ++d) {
        if (d > 0) pipow = ps_mul(pipow, fser, nout);
        OKElem rd = ps_get_ok(rs, d);
        OKElem td;
        int rawv = R.M();
        for (int i = 0; i < R.deg(); ++i) rawv = std::min(rawv, R.zctx().val(rd.c[i]));
        if (rawv >= d) {
            td = rd;
            if (d > 0) {
                for (int i = 0; i < R.deg(); ++i) td.c[i] = R.zctx().div_p_exact(td.c[i], d);
                td = R.mul(td, R.pow(R.pi_unit_inv(), (u128)d));
            }
            td.prec = rd.prec - d;
        } else if (rd.prec <= d) {
            td = R.zero();
            td.prec = rd.prec - d;
        } else {
            throw DescentFailure(
                "uncompose: coefficient " + std::to_string(d) +
                " of the translate sum is not divisible by pi^d at working precision");
        }
        ps_set_ok(T, d, td);
        PSeries used = ps_scale_ok(pipow, td);
        rs = ps_sub(rs, used);
    }
    return T;
}

PSeries ColemanContext::trace_op(const PSeries& s, int nout) const {
    PSeries S = translate_sum(s, nout);
    PSeries T = uncompose_pi(S, nout);
    // L(s) = 0 mod pi at every coefficient carrying precision
    if (!ps_divisible_pi(T, 1))
        throw DescentFailure("trace operator output is not divisible by pi");
    return T;
}

namespace {

// division-free determinant over truncated series (Berkowitz)
PSeries ps_berkowitz(const std::vector<std::vector<PSeries>>& M, int n, int nout) {
    const Ring& A = *M[0][0].R;
    std::vector<PSeries> C(2, ps_zero(A, nout));
    C[0] = ps_scale_int(ps_one(A, nout), -1);
    C[1] = M[0][0];
    for (int k = 1; k < n; ++k) {
        std::vector<PSeries> T(k + 2, ps_zero(A, nout));
        T[0] = ps_scale_int(ps_one(A, nout), -1);
        T[1] = M[k][k];
        std::vector<PSeries> vec(k, ps_zero(A, nout));
        for (int i = 0; i < k; ++i) vec[i] = M[i][k];
        for (int j = 2; j <= k + 1; ++j) {
            for (int i = 0; i < k; ++i)
                T[j] = ps_add(T[j], ps_mul(M[k][i], vec[i], nout));
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

} // namespace

PSeries ColemanContext::norm_op(const PSeries& s, int nout) const {
    const OKRing& R = G_->okr();
    const OkAsRing& A = G_->ring();
    int q = (int)R.q();
    // reduce s(Y) mod f(Y) - f(x): Y^q = f(x) - sum_{1<=i<q} f_i Y^i
    PSeries fx = ps_resize(G_->seed_ps((int)G_->seed().size()), nout);
    std::vector<PSeries> rep((size_t)q, ps_zero(A, nout));
    {
        std::vector<PSeries> ypow((size_t)q, ps_zero(A, nout)); // current Y^j repr of high power
        // walk down from the top coefficient, Horner style: r <- r*Y + s_d
        for (int d = s.n - 1; d >= 0; --d) {
            // r *= Y
            std::vector<PSeries> nr((size_t)q, ps_zero(A, nout));
            PSeries top = rep[q - 1];
            for (int j = q - 1; j >= 1; --j) nr[j] = rep[j - 1];
            // top * Y^q = top*(f(x) - sum f_i Y^i)
            nr[0] = ps_add(nr[0], ps_mul(top, fx, nout));
            for (int i = 1; i < q; ++i)
                nr[i] = ps_sub(nr[i], ps_scale_ok(top, G_->seed()[i]));
            rep = nr;
            OKElem sd = ps_get_ok(s, d);
            if (!(R.is_zero_mod(sd, R.M()) && sd.prec >= R.M())) {
                PSeries c = ps_zero(A, nout);
                ps_set_ok(c, 0, sd);
                c = ps_resize(c, nout);
                rep[0] = ps_add(rep[0], c);
            }
        }
    }
    // multiplication matrix of s(Y) on the basis Y^j
    std::vector<std::vector<PSeries>> Mt((size_t)q,
                                         std::vector<PSeries>((size_t)q, ps_zero(A, nout)));
    std::vector<PSeries> cur = rep;
    for (int j = 0; j < q; ++j) {
        for (int i = 0; i < q; ++i) Mt[i][j] = cur[i];
        if (j + 1 < q) {
            std::vector<PSeries> nr((size_t)q, ps_zero(A, nout));
            PSeries top = cur[q - 1];
            for (int i = q - 1; i >= 1; --i) nr[i] = cur[i - 1];
            nr[0] = ps_add(nr[0], ps_mul(top, fx, nout));
            for (int i = 1; i < q; ++i)
                nr[i] = ps_sub(nr[i], ps_scale_ok(top, G_->seed()[i]));
            cur = nr;
        }
    }
    PSeries det = ps_berkowitz(Mt, q, nout);
    if (!s.exact_poly()) {
        for (int e = 0; e < nout; ++e) {
            long long boost = ((long long)s.n - (long long)q * e);
            int b = boost > 0 ? (int)((boost + q - 2) / (q - 1)) : 0;
            det.prec[e] = std::min(det.prec[e], sat_add(s.tail_vfl, b));
        }
        ps_refresh_meta(det);
        det.tail_vfl = std::min(det.tail_vfl, 0);
    }
    return uncompose_pi(det, nout);
}

PSeries ColemanContext::preimage(const PSeries& g) const {
    PSeries gp = ps_compose(g, G_->seed_ps(J_), J_);
    PSeries t = ps_mul(k_, gp, J_);
    return ps_mul(t, winv_pi_, J_);
}

PSeries ColemanContext::h_n(int n) const {
    {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = h_cache_.find(n);
        if (it != h_cache_.end()) return it->second;
    }
    const OkAsRing& A = G_->ring();
    PSeries xn = ps_x(A, J_);
    if (n != 1) {
        xn = ps_zero(A, J_);
        ps_set_ok(xn, n, G_->okr().one());
    }
    PSeries lxn = trace_op(xn, J_);
    PSeries gn = ps_div_pi(lxn, 1);
    PSeries h = ps_sub(xn, preimage(gn));
    {
        std::lock_guard<std::mutex> lk(mu_);
        h_cache_[n] = h;
    }
    return h;
}

PSeries ColemanContext::split_t(const PSeries& g) const {
    PSeries lg = trace_op(g, J_);
    PSeries q = ps_div_pi(lg, 1);
    return ps_sub(ps_resize(g, J_), preimage(q));
}

std::vector<OKElem> ColemanContext::kernel_expand(const PSeries& f, int count) const {
    PSeries lf = trace_op(f, std::max(count, 4));
    if (!ps_is_zero(lf))
        throw NotInKernel("kernel_expand: trace operator does not vanish on the input");
    std::vector<OKElem> out;
    for (int n = 0; n < count; ++n) out.push_back(ps_get_ok(f, n));
    return out;
}

PSeries ColemanContext::split_c_prime(const PSeries& g) const {
    const OKRing& R = G_->okr();
    if (R.q() <= 2) throw QTooSmall("split_c_prime requires q > 2");
    if (!ps_divisible_pi(g, 1)) throw NotInC("split_c_prime: input is not divisible by pi");
    PSeries lg = trace_op(g, std::min(g.n, J_));
    if (!ps_is_zero(lg)) throw NotInC("split_c_prime: input is not in the trace kernel");
    OKElem g1 = ps_get_ok(g, 1);
    return ps_sub(ps_resize(g, J_), ps_scale_ok(h_n(1), g1));
}

bool ColemanContext::independence_check(const std::vector<std::pair<int, int>>& pairs) const {
    const OKRing& R = G_->okr();
    int q = (int)R.q();
    for (size_t a = 0; a < pairs.size(); ++a)
        for (size_t b = a + 1; b < pairs.size(); ++b)
            if (pairs[a] == pairs[b]) throw BadInput("independence_check: duplicate pair");
    for (auto& [m, n] : pairs) {
        if (n >= q - 1 || n < 0 || m < 0) throw BadInput("independence_check: need 0 <= n < q-1");
        if ((long long)q * m + n >= J_) throw BadInput("independence_check: qm+n beyond degree");
    }
    // leading exponents mod pi must be pairwise distinct (they are qm+n)
    std::vector<long long> lead;
    for (auto& [m, n] : pairs) lead.push_back((long long)q * m + n);
    std::sort(lead.begin(), lead.end());
    if (std::adjacent_find(lead.begin(), lead.end()) != lead.end()) return false;

    // reduction matrix over F_q and its rank
    auto reps = R.digit_reps();
    auto to_idx = [&](const OKElem& x) { return R.residue_index(x); };
    std::vector<std::vector<size_t>> rows;
    PSeries fser = G_->seed_ps(J_);
    for (auto& [m, n] : pairs) {
        PSeries t = h_n(n);
        for (int i = 0; i < m; ++i) t = ps_mul(t, fser, J_);
        std::vector<size_t> row(J_);
        for (int d = 0; d < J_; ++d) row[d] = to_idx(ps_get_ok(t, d));
        rows.push_back(row);
    }
    // Gaussian elimination over F_q via the digit inventory
    auto fq_mul = [&](size_t a, size_t b) { return to_idx(R.mul(reps[a], reps[b])); };
    auto fq_sub = [&](size_t a, size_t b) { return to_idx(R.sub(reps[a], reps[b])); };
    auto fq_inv = [&](size_t a) { return to_idx(R.pow(reps[a], R.q() - 2)); };
    size_t rank = 0;
    for (int col = 0; col < J_ && rank < rows.size(); ++col) {
        size_t pivot = rank;
        while (pivot < rows.size() && rows[pivot][col] == 0) ++pivot;
        if (pivot == rows.size()) continue;
        std::swap(rows[rank], rows[pivot]);
        size_t inv = fq_inv(rows[rank][col]);
        for (size_t r = rank + 1; r < rows.size(); ++r) {
            if (rows[r][col] == 0) continue;
            size_t factor = fq_mul(rows[r][col], inv);
            for (int d = col; d < J_; ++d)
                rows[r][d] = fq_sub(rows[r][d], fq_mul(factor, rows[rank][d]));
        }
        ++rank;
    }
    return rank == pairs.size();
}

} // namespace forge
