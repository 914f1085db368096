#pragma once

#include <string>

#include "subexp/density.hpp"

namespace subexp {

// Density-spec documents (JSON): metadata, then segments with exact ExpReal
// endpoints and per-part payloads.  parse(serialize(d)) == d bit for bit.
std::string serialize_density(const PiecewiseDensity& f);
PiecewiseDensity parse_density(const std::string& text);

void write_density_file(const std::string& path, const PiecewiseDensity& f);
PiecewiseDensity read_density_file(const std::string& path);

}  // namespace subexp
