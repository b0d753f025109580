#include "forge/io.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <fstream>
#include <sstream>

namespace forge {

Profile profile_q3() {
    Profile p;
    p.name = "q3";
    p.M_report = 40;
    p.ok = OKConfig{3, 1, {0, 1}, -1, 80};
    p.N = 24;
    p.J = 240;
    p.lt = LTParams{44, 240, 200};
    p.seed = {0, -3, 0, 1};
    return p;
}

Profile profile_q27_cubic() {
    Profile p;
    p.name = "q27-cubic";
    p.M_report = 60;
    p.ok = OKConfig{3, 3, {-1, -1, 0, 1}, -1, 72};
    p.N = 12;
    p.J = 1274;
    p.lt = LTParams{12, 1274, 72};
    p.seed.assign(28, 0);
    p.seed[1] = -3;
    p.seed[27] = 1;
    return p;
}

Profile profile_gm() {
    Profile p;
    p.name = "gm";
    p.M_report = 24;
    p.ok = OKConfig{3, 1, {0, 1}, 1, 48};
    p.N = 16;
    p.J = 64;
    p.lt = LTParams{16, 64, 48};
    p.seed = {0, 3, 3, 1};
    return p;
}

std::vector<std::string> profile_names() { return {"q3", "q27-cubic", "gm"}; }

Profile profile_by_name(const std::string& name) {
    if (name == "q3") return profile_q3();
    if (name == "q27-cubic") return profile_q27_cubic();
    if (name == "gm") return profile_gm();
    throw BadInput("unknown profile: " + name);
}

Profile profile_from_json(const json& j) {
    Profile p;
    p.name = j.value("name", "custom");
    p.ok.p = j.at("p").get<u64>();
    p.ok.f_K = j.at("f_K").get<int>();
    p.ok.m = j.at("m").get<std::vector<long long>>();
    p.ok.pi_unit = j.at("pi_unit").get<long long>();
    int M = j.at("M").get<int>();
    p.M_report = M;
    p.ok.M = j.value("M_work", std::min(2 * M, (int)(126.0 / (std::log2((double)p.ok.p)))));
    if (p.ok.M < M) p.ok.M = M;
    p.N = j.value("N", 24);
    p.J = j.value("J", std::max(2 * p.N, 4 * (int)p.ok.p));
    p.lt.NF = j.value("NF", std::max(p.N, 8));
    p.lt.J = p.J;
    p.lt.Dexp = j.value("Dexp", p.J);
    if (j.contains("seed"))
        p.seed = j.at("seed").get<std::vector<long long>>();
    else {
        u128 q = 1;
        for (int i = 0; i < p.ok.f_K; ++i) q *= p.ok.p;
        p.seed.assign((size_t)q + 1, 0);
        p.seed[1] = p.ok.pi_unit * (long long)p.ok.p;
        p.seed[(size_t)q] = 1;
    }
    return p;
}

json profile_to_json(const Profile& p) {
    json j;
    j["name"] = p.name;
    j["p"] = p.ok.p;
    j["f_K"] = p.ok.f_K;
    j["m"] = p.ok.m;
    j["pi_unit"] = p.ok.pi_unit;
    j["M"] = p.M_report;
    j["M_work"] = p.ok.M;
    j["N"] = p.N;
    j["J"] = p.J;
    j["NF"] = p.lt.NF;
    j["Dexp"] = p.lt.Dexp;
    j["seed"] = p.seed;
    return j;
}

std::vector<OKElem> build_seed(const OKRing& R, const std::vector<long long>& coeffs) {
    std::vector<OKElem> out;
    out.reserve(coeffs.size());
    for (long long c : coeffs) out.push_back(R.from_int(c));
    return out;
}

std::vector<long long> parse_seed_expr(const std::string& expr, u64 p, int f_K) {
    u128 q = 1;
    for (int i = 0; i < f_K; ++i) q *= p;
    std::string s;
    for (char c : expr)
        if (!isspace((unsigned char)c)) s.push_back(c);
    if (s == "pi*x+x^q" || s == "canonical") {
        std::vector<long long> out((size_t)q + 1, 0);
        out[1] = 1; // scaled by pi_unit * p by the caller
        out[(size_t)q] = 1;
        return out; // sentinel form: caller maps out[1] to pi
    }
    if (s == "gm") {
        // (1+x)^p - 1
        std::vector<long long> out((size_t)p + 1, 0);
        long long binom = 1;
        for (u64 k = 1; k <= p; ++k) {
            binom = binom * (long long)(p - k + 1) / (long long)k;
            out[(size_t)k] = binom;
        }
        return out;
    }
    // JSON array of coefficients
    json j = json::parse(s, nullptr, false);
    if (j.is_discarded() || !j.is_array())
        throw BadInput("seed must be \"pi*x + x^q\", \"gm\", or a JSON coefficient array");
    return j.get<std::vector<long long>>();
}

json ok_to_json(const OKRing& R, const OKElem& a) {
    json j;
    json coords = json::array();
    for (int i = 0; i < R.deg(); ++i) coords.push_back(R.zctx().to_string(a.c[i]));
    j["coords"] = coords;
    j["prec"] = a.prec;
    return j;
}

OKElem ok_from_json(const OKRing& R, const json& j) {
    OKElem a = R.zero();
    const json& coords = j.at("coords");
    if ((int)coords.size() > R.deg()) throw BadInput("element has too many coordinates");
    for (size_t i = 0; i < coords.size(); ++i) {
        if (coords[i].is_string())
            a.c[i] = R.zctx().from_string(coords[i].get<std::string>());
        else
            a.c[i] = R.zctx().from_int(coords[i].get<long long>());
    }
    a.prec = j.value("prec", R.M());
    return a;
}

json ps_to_json(const PSeries& f, const std::string& ring_name) {
    const OKRing& ok = f.R->okr();
    json j;
    j["ring"] = ring_name;
    j["N"] = f.n;
    j["minprec"] = ps_min_prec(f, f.n);
    json coeffs = json::array();
    int sub = f.R->rank() / ok.deg();
    for (int i = 0; i < f.n; ++i) {
        json c = json::array();
        for (int k = 0; k < f.R->rank(); ++k) c.push_back(ok.zctx().to_string(f.at(i)[k]));
        coeffs.push_back(c);
        (void)sub;
    }
    j["coeffs"] = coeffs;
    json precs = json::array();
    for (int i = 0; i < f.n; ++i) precs.push_back(f.prec[i]);
    j["precs"] = precs;
    j["tail_vfl"] = f.tail_vfl >= TAIL_EXACT ? json("exact") : json(f.tail_vfl);
    return j;
}

PSeries ps_from_json(const Ring& R, const json& j) {
    int n = j.at("N").get<int>();
    PSeries f = ps_zero(R, n);
    const json& coeffs = j.at("coeffs");
    for (int i = 0; i < n && i < (int)coeffs.size(); ++i) {
        const json& c = coeffs[i];
        if ((int)c.size() > R.rank()) throw BadInput("coefficient has too many coordinates");
        for (size_t k = 0; k < c.size(); ++k) {
            if (c[k].is_string())
                f.at(i)[k] = R.z().from_string(c[k].get<std::string>());
            else
                f.at(i)[k] = R.z().from_int(c[k].get<long long>());
        }
    }
    if (j.contains("precs")) {
        const json& precs = j.at("precs");
        for (int i = 0; i < n && i < (int)precs.size(); ++i) f.prec[i] = precs[i].get<int>();
    }
    if (j.contains("tail_vfl") && !j.at("tail_vfl").is_string())
        f.tail_vfl = j.at("tail_vfl").get<int>();
    ps_refresh_meta(f);
    return f;
}

json val_to_json(const Ring& R, const Val& v, const std::string& ring_name) {
    json j;
    j["ring"] = ring_name;
    json coords = json::array();
    for (int k = 0; k < R.rank(); ++k) coords.push_back(R.z().to_string(v.b[k]));
    j["coords"] = coords;
    j["prec"] = v.prec;
    return j;
}

Val val_from_json(const Ring& R, const json& j) {
    Val v;
    v.b.assign(R.rank(), Zp{});
    const json& coords = j.at("coords");
    if ((int)coords.size() > R.rank()) throw BadInput("value has too many coordinates");
    for (size_t k = 0; k < coords.size(); ++k) {
        if (coords[k].is_string())
            v.b[k] = R.z().from_string(coords[k].get<std::string>());
        else
            v.b[k] = R.z().from_int(coords[k].get<long long>());
    }
    v.prec = j.value("prec", R.prec_cap());
    return v;
}

// ---------------------------------------------------------------------------
// compact sha-256 for manifests

namespace {

struct Sha256 {
    u64 len = 0;
    uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                     0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    unsigned char buf[64];
    size_t fill = 0;

    static uint32_t rotr(uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

    void block(const unsigned char* p) {
        static const uint32_t K[64] = {
            0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
            0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
            0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
            0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
            0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
            0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
            0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
            0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
            0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
            0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
            0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};
        uint32_t w[64];
        for (int i = 0; i < 16; ++i)
            w[i] = (uint32_t)p[4 * i] << 24 | (uint32_t)p[4 * i + 1] << 16 |
                   (uint32_t)p[4 * i + 2] << 8 | p[4 * i + 3];
        for (int i = 16; i < 64; ++i) {
            uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6],
                 hh = h[7];
        for (int i = 0; i < 64; ++i) {
            uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            uint32_t ch = (e & f) ^ (~e & g);
            uint32_t t1 = hh + S1 + ch + K[i] + w[i];
            uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            uint32_t t2 = S0 + maj;
            hh = g;
            g = f;
            f = e;
            e = d + t1;
            d = c;
            c = b;
            b = a;
            a = t1 + t2;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
        h[5] += f;
        h[6] += g;
        h[7] += hh;
    }

    void update(const unsigned char* p, size_t n) {
        len += n;
        while (n) {
            size_t take = std::min(n, sizeof(buf) - fill);
            std::memcpy(buf + fill, p, take);
            fill += take;
            p += take;
            n -= take;
            if (fill == 64) {
                block(buf);
                fill = 0;
            }
        }
    }

    std::string hex() {
        u64 bits = len * 8;
        unsigned char pad = 0x80;
        update(&pad, 1);
        unsigned char zero = 0;
        while (fill != 56) update(&zero, 1);
        unsigned char lenb[8];
        for (int i = 0; i < 8; ++i) lenb[i] = (unsigned char)(bits >> (56 - 8 * i));
        update(lenb, 8);
        static const char* digits = "0123456789abcdef";
        std::string out;
        for (uint32_t x : h)
            for (int i = 28; i >= 0; i -= 4) out.push_back(digits[(x >> i) & 0xf]);
        return out;
    }
};

} // namespace

std::string sha256_hex(const std::string& data) {
    Sha256 s;
    s.update((const unsigned char*)data.data(), data.size());
    return s.hex();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BadInput("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw BadInput("cannot write " + path);
    out << data;
}

json make_manifest(const Profile& p, const std::string& command,
                   const std::vector<std::pair<std::string, std::string>>& input_digests,
                   const std::vector<std::pair<std::string, std::string>>& output_digests,
                   const json& precision_report, double wall_ms) {
    json j;
    j["command"] = command;
    j["profile"] = profile_to_json(p);
    json in = json::object(), out = json::object();
    for (auto& [k, v] : input_digests) in[k] = v;
    for (auto& [k, v] : output_digests) out[k] = v;
    j["inputs_sha256"] = in;
    j["outputs_sha256"] = out;
    j["effective_precision"] = precision_report;
    j["wall_ms"] = wall_ms;
    return j;
}

} // namespace forge
