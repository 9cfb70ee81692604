#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "mimo/sweep.hpp"

namespace mimo {

// Flat INI text: [section] headers, key = value lines, '#' or ';' comments.
using IniData = std::map<std::string, std::map<std::string, std::string>>;

IniData parse_ini(std::istream& is);
IniData read_ini_file(const std::string& path);

// Applies recognized keys onto cfg; unknown keys raise InvalidArgument.
void apply_ini(const IniData& ini, SweepConfig& cfg);

std::vector<double> parse_double_list(const std::string& text);

}  // namespace mimo
