#include "pfsim/sellmeier.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pfsim {

void SellmeierCoefficients::validate() const {
    if (!(lambda_min_m > 0.0) || !(lambda_max_m > lambda_min_m))
        throw std::runtime_error("sellmeier: invalid validity range for " + material);
    const int n_check = 64;
    for (int i = 0; i <= n_check; ++i) {
        double lam = lambda_min_m + (lambda_max_m - lambda_min_m) * i / n_check;
        double lam_um = lam * 1e6;
        double no2 = ordinary.index_squared(lam_um);
        double ne2 = extraordinary.index_squared(lam_um);
        if (!(no2 > 1.0) || !(ne2 > 1.0))
            throw std::runtime_error("sellmeier: index not real and > 1 inside validity range");
        if (!(ne2 < no2))
            throw std::runtime_error("sellmeier: material is not negative uniaxial (n_e >= n_o)");
    }
}

static void check_range(const SellmeierCoefficients& m, double lambda_m) {
    if (lambda_m < m.lambda_min_m || lambda_m > m.lambda_max_m) {
        std::ostringstream os;
        os << "wavelength " << lambda_m * 1e9 << " nm outside validity range of " << m.material;
        throw std::out_of_range(os.str());
    }
}

double index_ordinary(const SellmeierCoefficients& material, double lambda_m) {
    check_range(material, lambda_m);
    return std::sqrt(material.ordinary.index_squared(lambda_m * 1e6));
}

double index_extraordinary_principal(const SellmeierCoefficients& material, double lambda_m) {
    check_range(material, lambda_m);
    return std::sqrt(material.extraordinary.index_squared(lambda_m * 1e6));
}

double index_extraordinary(const SellmeierCoefficients& material, double lambda_m, double theta_rad) {
    check_range(material, lambda_m);
    double lam_um = lambda_m * 1e6;
    double no2 = material.ordinary.index_squared(lam_um);
    double ne2 = material.extraordinary.index_squared(lam_um);
    double ct = std::cos(theta_rad);
    double st = std::sin(theta_rad);
    // index ellipse: 1/n^2 = cos^2/n_o^2 + sin^2/n_e^2
    return 1.0 / std::sqrt(ct * ct / no2 + st * st / ne2);
}

SellmeierCoefficients load_sellmeier_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dispersion file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            size_t b = s.find_first_not_of(" \t\r");
            size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto need = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw std::runtime_error(path + ": missing key '" + key + "'");
        return it->second;
    };
    auto num = [&](const std::string& key) { return std::stod(need(key)); };

    SellmeierCoefficients m;
    m.material = need("material");
    if (need("form") != "sellmeier-1pole")
        throw std::runtime_error(path + ": unsupported dispersion form '" + need("form") + "'");
    m.ordinary = {num("ordinary.a"), num("ordinary.b"), num("ordinary.c"), num("ordinary.d")};
    m.extraordinary = {num("extraordinary.a"), num("extraordinary.b"), num("extraordinary.c"),
                       num("extraordinary.d")};
    m.lambda_min_m = num("lambda_min_um") * 1e-6;
    m.lambda_max_m = num("lambda_max_um") * 1e-6;
    if (kv.count("citation")) m.citation = kv["citation"];
    m.validate();
    return m;
}

SellmeierCoefficients constant_index_material(double n_o, double n_e) {
    SellmeierCoefficients m;
    m.material = "constant-index";
    m.ordinary = {n_o * n_o, 0.0, 0.0, 0.0};
    m.extraordinary = {n_e * n_e, 0.0, 0.0, 0.0};
    m.lambda_min_m = 1e-9;
    m.lambda_max_m = 100e-6;
    m.citation = "test material";
    return m;
}

}  // namespace pfsim
