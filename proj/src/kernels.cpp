#include "forge/kernels.hpp"

#include <cstdlib>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace forge {

namespace {

constexpr int KARA_MIN = 24;

void school_acc(const Ring& R, const Zp* a, int na, const Zp* b, int nb,
                Zp* out, int nout, Zp* scratch) {
    const int bs = R.rank();
    for (int i = 0; i < na && i < nout; ++i) {
        const Zp* ai = a + (size_t)i * bs;
        for (int j = 0; j < nb && i + j < nout; ++j)
            R.mul_acc(ai, b + (size_t)j * bs, out + (size_t)(i + j) * bs, scratch);
    }
}

struct Arena {
    Zp* base;
    size_t size;
    size_t used = 0;
    Zp* take(size_t n) {
        if (used + n > size) throw Error("kernel arena exhausted");
        Zp* r = base + used;
        used += n;
        return r;
    }
};

void kara_acc(const Ring& R, const Zp* a, int na, const Zp* b, int nb,
              Zp* out, Arena arena, Zp* scratch) {
    const int bs = R.rank();
    if (na <= 0 || nb <= 0) return;
    if (na < KARA_MIN || nb < KARA_MIN) {
        school_acc(R, a, na, b, nb, out, na + nb - 1, scratch);
        return;
    }
    int h = (std::max(na, nb) + 1) / 2;
    if (na <= h) {
        // split the long operand into h-sized chunks
        for (int off = 0; off < nb; off += h) {
            int len = std::min(h, nb - off);
            kara_acc(R, a, na, b + (size_t)off * bs, len, out + (size_t)off * bs,
                     arena, scratch);
        }
        return;
    }
    if (nb <= h) {
        for (int off = 0; off < na; off += h) {
            int len = std::min(h, na - off);
            kara_acc(R, a + (size_t)off * bs, len, b, nb, out + (size_t)off * bs,
                     arena, scratch);
        }
        return;
    }
    const int na1 = na - h, nb1 = nb - h;
    const int sa = std::max(h, na1), sb = std::max(h, nb1);
    const ZpCtx& zc = R.z();

    Zp* asum = arena.take((size_t)sa * bs);
    Zp* bsum = arena.take((size_t)sb * bs);
    Zp* z0 = arena.take((size_t)(2 * h - 1) * bs);
    Zp* z2 = arena.take((size_t)(na1 + nb1 - 1) * bs);
    Zp* z1 = arena.take((size_t)(sa + sb - 1) * bs);

    std::memset((void*)asum, 0, (size_t)sa * bs * sizeof(Zp));
    std::memset((void*)bsum, 0, (size_t)sb * bs * sizeof(Zp));
    std::memset((void*)z0, 0, (size_t)(2 * h - 1) * bs * sizeof(Zp));
    std::memset((void*)z2, 0, (size_t)(na1 + nb1 - 1) * bs * sizeof(Zp));
    std::memset((void*)z1, 0, (size_t)(sa + sb - 1) * bs * sizeof(Zp));

    for (int i = 0; i < h; ++i)
        for (int k = 0; k < bs; ++k) asum[(size_t)i * bs + k] = a[(size_t)i * bs + k];
    for (int i = 0; i < na1; ++i)
        for (int k = 0; k < bs; ++k)
            asum[(size_t)i * bs + k] =
                zc.add(asum[(size_t)i * bs + k], a[(size_t)(h + i) * bs + k]);
    for (int i = 0; i < h; ++i)
        for (int k = 0; k < bs; ++k) bsum[(size_t)i * bs + k] = b[(size_t)i * bs + k];
    for (int i = 0; i < nb1; ++i)
        for (int k = 0; k < bs; ++k)
            bsum[(size_t)i * bs + k] =
                zc.add(bsum[(size_t)i * bs + k], b[(size_t)(h + i) * bs + k]);

    kara_acc(R, a, h, b, h, z0, arena, scratch);
    kara_acc(R, a + (size_t)h * bs, na1, b + (size_t)h * bs, nb1, z2, arena, scratch);
    kara_acc(R, asum, sa, bsum, sb, z1, arena, scratch);

    for (int i = 0; i < 2 * h - 1; ++i)
        for (int k = 0; k < bs; ++k) {
            size_t idx = (size_t)i * bs + k;
            out[idx] = zc.add(out[idx], z0[idx]);
        }
    for (int i = 0; i < na1 + nb1 - 1; ++i)
        for (int k = 0; k < bs; ++k) {
            size_t o = (size_t)(2 * h + i) * bs + k, idx = (size_t)i * bs + k;
            out[o] = zc.add(out[o], z2[idx]);
        }
    for (int i = 0; i < sa + sb - 1; ++i)
        for (int k = 0; k < bs; ++k) {
            size_t o = (size_t)(h + i) * bs + k, idx = (size_t)i * bs + k;
            Zp t = z1[idx];
            if (i < 2 * h - 1) t = zc.sub(t, z0[idx]);
            if (i < na1 + nb1 - 1) t = zc.sub(t, z2[idx]);
            out[o] = zc.add(out[o], t);
        }
}

} // namespace

bool kernels_force_serial() {
    static const bool forced = [] {
        const char* e = std::getenv("FORGE_SERIAL");
        return e && e[0] == '1';
    }();
    return forced;
}

long long poly_mul_cost(int na, int nb, int nout) {
    long long c = 0;
    for (int i = 0; i < na && i < nout; ++i)
        c += std::max(0, std::min(nb, nout - i));
    return c;
}

void poly_mul_trunc(const Ring& R, const Zp* a, int na, const Zp* b, int nb,
                    Zp* out, int nout, MulPath path) {
    const int bs = R.rank();
    std::memset((void*)out, 0, (size_t)nout * bs * sizeof(Zp));
    if (na <= 0 || nb <= 0 || nout <= 0) return;

    if (path == MulPath::Auto) {
        if (kernels_force_serial()) {
            path = MulPath::Serial;
        } else if (std::min(na, nb) >= 2 * KARA_MIN) {
            path = MulPath::Karatsuba;
        } else {
#ifdef _OPENMP
            path = poly_mul_cost(na, nb, nout) * (long long)bs * bs >= 400000
                       ? MulPath::Omp
                       : MulPath::Serial;
#else
            path = MulPath::Serial;
#endif
        }
    }

    if (path == MulPath::Karatsuba) {
        const int full = na + nb - 1;
        std::vector<Zp> tmp((size_t)full * bs);
        std::vector<Zp> arena_buf((size_t)8 * full * bs + 64);
        std::vector<Zp> scratch(R.scratch() + bs);
        Arena arena{arena_buf.data(), arena_buf.size()};
        kara_acc(R, a, na, b, nb, tmp.data(), arena, scratch.data());
        std::memcpy((void*)out, tmp.data(),
                    (size_t)std::min(nout, full) * bs * sizeof(Zp));
        return;
    }

#ifdef _OPENMP
    if (path == MulPath::Omp) {
#pragma omp parallel
        {
            std::vector<Zp> scratch(R.scratch() + bs);
#pragma omp for schedule(static)
            for (int k = 0; k < nout; ++k) {
                Zp* ok = out + (size_t)k * bs;
                int ilo = std::max(0, k - nb + 1), ihi = std::min(na - 1, k);
                for (int i = ilo; i <= ihi; ++i)
                    R.mul_acc(a + (size_t)i * bs, b + (size_t)(k - i) * bs, ok,
                              scratch.data());
            }
        }
        return;
    }
#endif

    std::vector<Zp> scratch(R.scratch() + bs);
    school_acc(R, a, na, b, nb, out, nout, scratch.data());
}

} // namespace forge
