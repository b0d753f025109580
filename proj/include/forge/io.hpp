#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "forge/lubin_tate.hpp"

namespace forge {

using nlohmann::json;

// A named run configuration. M_work is the internal arithmetic modulus
// exponent (raised above the reporting precision so the pi^d divisions of the
// trace un-composition do not eat into reported digits); J is the working
// x-degree of the series machinery; N the reporting degree.
struct Profile {
    std::string name;
    OKConfig ok;           // ok.M is the working modulus exponent
    int M_report = 0;
    int N = 0;
    int J = 0;
    LTParams lt;
    std::vector<long long> seed; // [pi](x) coefficients, constant first
};

Profile profile_q3();
Profile profile_q27_cubic();
Profile profile_gm();
Profile profile_by_name(const std::string& name);
std::vector<std::string> profile_names();

// config file: {"p":3,"f_K":1,"m":[0,1],"pi_unit":-1,"M":24} with optional
// "N","J","M_work","NF","Dexp","seed"
Profile profile_from_json(const json& j);
json profile_to_json(const Profile& p);

std::vector<OKElem> build_seed(const OKRing& R, const std::vector<long long>& coeffs);
// seed expressions: "pi*x + x^q", "gm" ((1+x)^p - 1), or a JSON array
std::vector<long long> parse_seed_expr(const std::string& expr, u64 p, int f_K);

json ok_to_json(const OKRing& R, const OKElem& a);
OKElem ok_from_json(const OKRing& R, const json& j);
json ps_to_json(const PSeries& f, const std::string& ring_name);
PSeries ps_from_json(const Ring& R, const json& j);
json val_to_json(const Ring& R, const Val& v, const std::string& ring_name);
Val val_from_json(const Ring& R, const json& j);

std::string sha256_hex(const std::string& data);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& data);

// run manifest: identical inputs reproduce identical outputs, so the digests
// make runs diffable
json make_manifest(const Profile& p, const std::string& command,
                   const std::vector<std::pair<std::string, std::string>>& input_digests,
                   const std::vector<std::pair<std::string, std::string>>& output_digests,
                   const json& precision_report, double wall_ms);

} // namespace forge
