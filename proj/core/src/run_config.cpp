#include "fbms/run_config.hpp"

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fbms {

ResolutionTier tier_from_string(const std::string& name) {
    if (name == "fast") return ResolutionTier::Fast;
    if (name == "standard") return ResolutionTier::Standard;
    if (name == "fine") return ResolutionTier::Fine;
    throw std::invalid_argument("unknown tier: " + name);
}

std::string tier_to_string(ResolutionTier tier) {
    switch (tier) {
        case ResolutionTier::Fast: return "fast";
        case ResolutionTier::Standard: return "standard";
        case ResolutionTier::Fine: return "fine";
    }
    return "standard";
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto is_space = [](unsigned char c) { return std::isspace(c); };
        while (!s.empty() && is_space(s.front())) s.erase(s.begin());
        while (!s.empty() && is_space(s.back())) s.pop_back();
        return s;
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": empty key or value");
        kv[key] = value;
    }
    return kv;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

RunConfig RunConfig::from_map(const std::map<std::string, std::string>& kv) {
    RunConfig config;
    for (const auto& [key, value] : kv) {
        if (key == "tier") {
            config.tier = tier_from_string(value);
        } else if (key == "seed") {
            config.seed = std::stoull(value);
        } else if (key == "out_dir") {
            config.out_dir = value;
        } else if (key == "tol.geometric") {
            config.tolerances.geometric = std::stod(value);
        } else if (key == "tol.integral") {
            config.tolerances.integral = std::stod(value);
        } else if (key == "tol.index_rel") {
            config.tolerances.index_rel = std::stod(value);
        } else {
            config.overrides[key] = std::stod(value);
        }
    }
    return config;
}

double RunConfig::override_or(const std::string& key, double fallback) const {
    auto it = overrides.find(key);
    return it == overrides.end() ? fallback : it->second;
}

SweepoutParams RunConfig::sweepout() const {
    SweepoutParams p;
    switch (tier) {
        case ResolutionTier::Fast:
            p.azimuthal = 64;
            p.rows = 16;
            p.ribbon_cols = 8;
            break;
        case ResolutionTier::Standard:
            p.azimuthal = 96;
            p.rows = 24;
            p.ribbon_cols = 12;
            break;
        case ResolutionTier::Fine:
            p.azimuthal = 192;
            p.rows = 48;
            p.ribbon_cols = 24;
            break;
    }
    p.t0 = override_or("sweepout.t0", p.t0);
    p.eps0 = override_or("sweepout.eps0", p.eps0);
    p.alpha_spec.h0 = override_or("sweepout.h0", p.alpha_spec.h0);
    return p;
}

FlowOptions RunConfig::flow() const {
    FlowOptions opts;
    switch (tier) {
        case ResolutionTier::Fast:
            opts.max_iterations = 6000;
            break;
        case ResolutionTier::Standard:
            opts.max_iterations = 25000;
            break;
        case ResolutionTier::Fine:
            opts.max_iterations = 40000;
            break;
    }
    opts.grad_tol_rel = override_or("flow.grad_tol_rel", opts.grad_tol_rel);
    opts.max_iterations =
        static_cast<int>(override_or("flow.max_iterations", opts.max_iterations));
    opts.mode_refresh = static_cast<int>(override_or("flow.mode_refresh", opts.mode_refresh));
    return opts;
}

int RunConfig::revolve_radial() const {
    switch (tier) {
        case ResolutionTier::Fast: return 64;
        case ResolutionTier::Standard: return 128;
        case ResolutionTier::Fine: return 288;
    }
    return 128;
}

int RunConfig::revolve_axial() const {
    switch (tier) {
        case ResolutionTier::Fast: return 32;
        case ResolutionTier::Standard: return 64;
        case ResolutionTier::Fine: return 144;
    }
    return 64;
}

int RunConfig::disc_rings() const {
    switch (tier) {
        case ResolutionTier::Fast: return 18;
        case ResolutionTier::Standard: return 36;
        case ResolutionTier::Fine: return 72;
    }
    return 36;
}

int RunConfig::disc_segments() const {
    switch (tier) {
        case ResolutionTier::Fast: return 72;
        case ResolutionTier::Standard: return 144;
        case ResolutionTier::Fine: return 288;
    }
    return 144;
}

int RunConfig::spectrum_count() const { return 12; }

void write_file_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << contents;
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string csv_line(const std::vector<std::string>& fields) {
    std::string line;
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        const std::string& f = fields[i];
        if (f.find_first_of(",\"\r\n") != std::string::npos) {
            line += '"';
            for (char c : f) {
                if (c == '"') line += '"';
                line += c;
            }
            line += '"';
        } else {
            line += f;
        }
    }
    line += "\r\n";
    return line;
}

std::string csv_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

} // namespace fbms
