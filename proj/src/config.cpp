#include "mimo/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mimo {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

double parse_double(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw InvalidArgument("bad number for " + key + ": '" + text + "'");
    return v;
}

long long parse_int(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw InvalidArgument("bad integer for " + key + ": '" + text + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text)
{
    const std::string t = lower(trim(text));
    if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
    if (t == "0" || t == "false" || t == "no" || t == "off") return false;
    throw InvalidArgument("bad boolean for " + key + ": '" + text + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text)
{
    std::vector<int> out;
    for (double v : parse_double_list(text)) {
        if (v != std::floor(v)) throw InvalidArgument("expected integers for " + key);
        out.push_back(static_cast<int>(v));
    }
    return out;
}

RVec to_rvec(const std::vector<double>& v)
{
    return Eigen::Map<const RVec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::vector<double> parse_double_list(const std::string& text)
{
    std::vector<double> out;
    std::string item;
    std::stringstream ss(text);
    while (std::getline(ss, item, ',')) {
        if (trim(item).empty()) throw InvalidArgument("empty entry in list '" + text + "'");
        out.push_back(parse_double("list", item));
    }
    return out;
}

IniData parse_ini(std::istream& is)
{
    IniData data;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw InvalidArgument("line " + std::to_string(lineno) + ": unterminated section");
            section = lower(trim(line.substr(1, line.size() - 2)));
            data[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InvalidArgument("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = lower(trim(line.substr(0, eq)));
        if (key.empty()) throw InvalidArgument("line " + std::to_string(lineno) + ": empty key");
        data[section][key] = trim(line.substr(eq + 1));
    }
    return data;
}

IniData read_ini_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw InvalidArgument("cannot open config file " + path);
    return parse_ini(f);
}

void apply_ini(const IniData& ini, SweepConfig& cfg)
{
    bool weights_touched = false;
    for (const auto& [section, entries] : ini) {
        for (const auto& [key, value] : entries) {
            const std::string name = section + "." + key;
            if (section == "system") {
                if (key == "k") cfg.system.K = static_cast<int>(parse_int(name, value));
                else if (key == "n") cfg.system.N = static_cast<int>(parse_int(name, value));
                else if (key == "m") cfg.system.M = parse_int_list(name, value);
                else if (key == "s") cfg.system.S = parse_int_list(name, value);
                else if (key == "noise_ratios") cfg.noise_ratios = parse_double_list(value);
                else throw InvalidArgument("unknown config key " + name);
                weights_touched = true;
            } else if (section == "budget") {
                const double v = parse_double(name, value);
                if (key == "antenna_mw") cfg.budget.antenna_mw = v;
                else if (key == "symbol_mw") cfg.budget.symbol_mw = v;
                else if (key == "user_mw") cfg.budget.user_mw = v;
                else if (key == "entry_mw") cfg.budget.entry_mw = v;
                else if (key == "total_mw") cfg.budget.total_mw = v;
                else throw InvalidArgument("unknown config key " + name);
            } else if (section == "weights") {
                const RVec v = to_rvec(parse_double_list(value));
                if (key == "symbol") cfg.system.symbol_weights = v;
                else if (key == "user") cfg.system.user_weights = v;
                else if (key == "symbol_balance") cfg.system.symbol_balance = v;
                else if (key == "user_balance") cfg.system.user_balance = v;
                else throw InvalidArgument("unknown config key " + name);
            } else if (section == "solver") {
                if (key == "problem") {
                    const bool tp = cfg.problem.total_power;
                    cfg.problem = parse_problem(value);
                    cfg.problem.total_power = tp;
                } else if (key == "total_power") {
                    cfg.problem.total_power = parse_bool(name, value);
                } else if (key == "gp_step") {
                    cfg.duality_only = !parse_bool(name, value);
                } else if (key == "outer_tol") cfg.solve.outer_tol = parse_double(name, value);
                else if (key == "max_outer") cfg.solve.max_outer = static_cast<int>(parse_int(name, value));
                else if (key == "power_floor") cfg.solve.power_floor = parse_double(name, value);
                else if (key == "fixed_point_tol") cfg.solve.fixed_point.tol = parse_double(name, value);
                else if (key == "fixed_point_max_iter")
                    cfg.solve.fixed_point.max_iter = static_cast<int>(parse_int(name, value));
                else if (key == "switched_tol") cfg.solve.switched.tol = parse_double(name, value);
                else if (key == "switched_max_iter")
                    cfg.solve.switched.max_iter = static_cast<int>(parse_int(name, value));
                else throw InvalidArgument("unknown config key " + name);
            } else if (section == "sweep") {
                if (key == "snr_db") cfg.snr_db = parse_double_list(value);
                else if (key == "realizations") cfg.realizations = static_cast<int>(parse_int(name, value));
                else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(name, value));
                else throw InvalidArgument("unknown config key " + name);
            } else {
                throw InvalidArgument("unknown config section [" + section + "]");
            }
        }
    }
    // a changed layout invalidates default-length weights that were not given explicitly
    if (weights_touched) {
        const int St = cfg.system.total_streams();
        auto reset = [](RVec& w, int n) {
            if (w.size() != n && (w.size() == 0 || (w.array() == 1.0).all())) w.resize(0);
        };
        reset(cfg.system.symbol_weights, St);
        reset(cfg.system.symbol_balance, St);
        reset(cfg.system.user_weights, cfg.system.K);
        reset(cfg.system.user_balance, cfg.system.K);
    }
    cfg.system.fill_default_weights();
}

}  // namespace mimo
