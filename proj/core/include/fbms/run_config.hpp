#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fbms/minimize.hpp"
#include "fbms/sweepout.hpp"
#include "fbms/tolerances.hpp"

namespace fbms {

enum class ResolutionTier { Fast, Standard, Fine };

ResolutionTier tier_from_string(const std::string& name);
std::string tier_to_string(ResolutionTier tier);

// Flat key = value configuration (lines of "key = value", '#' comments).
std::map<std::string, std::string> parse_config_file(const std::string& path);
std::map<std::string, std::string> parse_config_text(const std::string& text);

struct RunConfig {
    ResolutionTier tier = ResolutionTier::Standard;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    Tolerances tolerances{};
    std::map<std::string, double> overrides; // criterion/tolerance overrides by key

    // Derived per-tier settings.
    SweepoutParams sweepout() const;
    FlowOptions flow() const;
    int revolve_radial() const;
    int revolve_axial() const;
    int disc_rings() const;
    int disc_segments() const;
    int spectrum_count() const;

    double override_or(const std::string& key, double fallback) const;
    static RunConfig from_map(const std::map<std::string, std::string>& kv);
};

// Atomic file write: temp file in the target directory, then rename.
void write_file_atomic(const std::string& path, const std::string& contents);

// RFC 4180 CSV: fields joined by commas, CRLF line endings, quoting as needed.
std::string csv_line(const std::vector<std::string>& fields);
std::string csv_number(double value);

} // namespace fbms
