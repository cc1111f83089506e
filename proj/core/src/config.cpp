#include "oscid/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oscid::config {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

ConfigFile ConfigFile::parse(const std::string& text) {
    ConfigFile cfg;
    std::stringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw std::runtime_error("config: malformed section at line " +
                                         std::to_string(lineno));
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config: expected key = value at line " +
                                     std::to_string(lineno));
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw std::runtime_error("config: empty key at line " + std::to_string(lineno));
        }
        cfg.kv_[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
}

bool ConfigFile::has(const std::string& key) const { return kv_.count(key) > 0; }

double ConfigFile::get_double(const std::string& key, double fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) {
        throw std::runtime_error("config: not a number: " + key + " = " + it->second);
    }
    return v;
}

int ConfigFile::get_int(const std::string& key, int fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    return std::stoi(it->second);
}

std::uint64_t ConfigFile::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    return std::stoull(it->second);
}

std::string ConfigFile::get_string(const std::string& key,
                                   const std::string& fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

std::vector<double> ConfigFile::get_doubles(const std::string& key,
                                            const std::vector<double>& fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(trim(tok)));
    return out;
}

std::vector<int> ConfigFile::get_ints(const std::string& key,
                                      const std::vector<int>& fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::vector<int> out;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(trim(tok)));
    return out;
}

model::DescriptorModel ModelParams::build(int n_nodes) const {
    return model::landau_ground_truth(sigma1, beta(), omega1, gamma, n_nodes, alpha_delta);
}

ModelParams model_params(const ConfigFile& cfg) {
    ModelParams p;
    p.sigma1 = cfg.get_double("model.sigma1", p.sigma1);
    p.r_circle = cfg.get_double("model.r_circle", p.r_circle);
    p.omega1 = cfg.get_double("model.omega1", p.omega1);
    p.gamma = cfg.get_double("model.gamma", p.gamma);
    p.alpha_delta = cfg.get_double("model.alpha_delta", p.alpha_delta);
    return p;
}

model::Contamination contamination_params(const ConfigFile& cfg) {
    model::Contamination c;
    c.second_harmonic = cfg.get_double("measurements.second_harmonic", 0.0);
    c.noise_std = cfg.get_double("measurements.noise_std", 0.0);
    c.seed = cfg.get_u64("measurements.seed", 1);
    return c;
}

optimize::IdentificationConfig identification_config(const ConfigFile& cfg) {
    optimize::IdentificationConfig c;
    c.T = cfg.get_double("measurements.T", c.T);
    c.n_t = cfg.get_int("measurements.n_t", c.n_t);
    c.n_nodes = cfg.get_int("grid.n_nodes", c.n_nodes);
    c.ell_grad = cfg.get_double("identify.ell", c.ell_grad);
    c.ell_g3 = cfg.get_double("identify.ell_g3", c.ell_g3);
    c.end_slope = cfg.get_double("identify.end_slope", c.end_slope);
    c.cg_restart = cfg.get_int("identify.restart_every", c.cg_restart);
    c.conv_tol = cfg.get_double("identify.conv_tol", c.conv_tol);
    c.max_iters = cfg.get_int("identify.max_iters", c.max_iters);
    c.min_iters = cfg.get_int("identify.min_iters", c.min_iters);
    c.line_search_tol = cfg.get_double("identify.line_search_tol", c.line_search_tol);
    c.first_step_fraction =
        cfg.get_double("identify.first_step_fraction", c.first_step_fraction);
    c.n_quad = cfg.get_int("identify.n_quad", c.n_quad);
    c.r_floor_rel = cfg.get_double("identify.r_floor_rel", c.r_floor_rel);
    c.rel_tol = cfg.get_double("ode.rel_tol", c.rel_tol);
    c.abs_tol = cfg.get_double("ode.abs_tol", c.abs_tol);

    const double r_circle = cfg.get_double("model.r_circle", 2.3);
    c.xi0 = {cfg.get_double("measurements.xi0_a1", 0.01 * r_circle),
             cfg.get_double("measurements.xi0_a2", 0.0)};
    return c;
}

ValidationParams validation_params(const ConfigFile& cfg) {
    ValidationParams p;
    std::vector<double> eps_default;
    for (int k = 0; k <= 16; ++k) eps_default.push_back(std::pow(10.0, -9.0 + 0.5 * k));
    p.epsilons = cfg.get_doubles("validate.epsilons", eps_default);
    p.n_t_list = cfg.get_ints("validate.n_t_list", p.n_t_list);
    return p;
}

}  // namespace oscid::config
