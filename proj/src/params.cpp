#include "vpme/params.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace vpme {

double PhysicalParams::bare_collective() const { return g * std::sqrt(N); }

void PhysicalParams::validate() const {
    if (!(g > 0)) throw ParamError("g must be positive");
    if (!(N >= 2)) throw ParamError("N must be at least 2");
    if (!(T > 0)) throw ParamError("non-positive temperature");
    if (!(A >= 0)) throw ParamError("A must be non-negative");
    if (!(omega_0 > 0)) throw ParamError("omega_0 must be positive");
    if (!(p > 0)) throw ParamError("p must be positive");
}

PhysicalParams typical_params(double N) {
    PhysicalParams p;
    p.N = N;
    return p;
}

double n_for_omega_r(double omega_r, double g, double frak_b) {
    double s = omega_r / (g * frak_b);
    return s * s;
}

ResonanceConvention parse_resonance(const std::string& s) {
    if (s == "measured") return ResonanceConvention::measured;
    if (s == "bare") return ResonanceConvention::bare;
    if (s == "explicit") return ResonanceConvention::explicit_energies;
    throw ParamError("unknown resonance convention: " + s);
}

std::string to_string(ResonanceConvention c) {
    switch (c) {
        case ResonanceConvention::measured: return "measured";
        case ResonanceConvention::bare: return "bare";
        case ResonanceConvention::explicit_energies: return "explicit";
    }
    return "?";
}

static double parse_number(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ParamError("bad number for " + key + ": " + v);
    }
    if (used != v.size()) throw ParamError("bad number for " + key + ": " + v);
    return x;
}

PhysicalParams build_params(const std::map<std::string, std::string>& raw) {
    static const char* required[] = {"g_eV", "N", "T_K", "A", "p", "omega0_eV"};
    for (const char* k : required)
        if (!raw.count(k)) throw ParamError(std::string("missing key: ") + k);
    PhysicalParams p;
    p.g = parse_number("g_eV", raw.at("g_eV"));
    p.N = parse_number("N", raw.at("N"));
    p.T = parse_number("T_K", raw.at("T_K"));
    p.A = parse_number("A", raw.at("A"));
    p.p = parse_number("p", raw.at("p"));
    p.omega_0 = parse_number("omega0_eV", raw.at("omega0_eV"));
    if (raw.count("resonance")) p.resonance = parse_resonance(raw.at("resonance"));
    if (raw.count("omega_m_eV")) p.omega_m = parse_number("omega_m_eV", raw.at("omega_m_eV"));
    if (raw.count("omega_c_eV")) {
        p.omega_c = parse_number("omega_c_eV", raw.at("omega_c_eV"));
    } else if (p.resonance == ResonanceConvention::explicit_energies) {
        throw ParamError("missing key: omega_c_eV (required by resonance=explicit)");
    }
    if (p.resonance == ResonanceConvention::bare) p.omega_c = p.omega_m;
    p.validate();
    return p;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParamError("cannot open config: " + path);
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParamError("config line " + std::to_string(lineno) + ": expected key=value");
        auto trim = [](std::string s) {
            auto a = s.find_first_not_of(" \t\r");
            auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

BosePair bose_occupation(double nu, double beta) {
    if (nu == 0.0) throw std::domain_error("bose_occupation: nu = 0 is singular");
    double n = 1.0 / std::expm1(beta * nu);
    return {n, 1.0 + n};
}

double coth_half(double x) {
    // coth(x/2) = 1 + 2/(e^x - 1), stable for small and large x
    return 1.0 + 2.0 / std::expm1(x);
}

std::string to_string(RegimeTag t) {
    switch (t) {
        case RegimeTag::HighT_WeakLM: return "HighT_WeakLM";
        case RegimeTag::HighT_StrongLM: return "HighT_StrongLM";
        case RegimeTag::LowT: return "LowT";
        case RegimeTag::Transitory: return "Transitory";
    }
    return "?";
}

Regime classify_regime(const PhysicalParams& params, double omega_r, double delta,
                       const RegimeConfig& cfg) {
    const double ob = params.omega_beta();
    Regime r{};
    r.resonant = 2.0 * omega_r > cfg.resonance_factor * std::abs(delta);
    const double x = omega_r / ob;
    if (params.omega_0 >= ob)
        r.tag = RegimeTag::LowT;
    else if (x > cfg.band_lo && x < cfg.band_hi)
        r.tag = RegimeTag::Transitory;
    else if (x <= cfg.band_lo)
        r.tag = RegimeTag::HighT_WeakLM;
    else
        r.tag = RegimeTag::HighT_StrongLM;
    return r;
}

}  // namespace vpme
