#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "oscid/model.hpp"
#include "oscid/optimize.hpp"

namespace oscid::config {

/// Flat key-value configuration with INI-style sections; keys are addressed
/// as "section.key". Lines starting with '#' or ';' are comments.
class ConfigFile {
public:
    static ConfigFile load(const std::string& path);
    static ConfigFile parse(const std::string& text);

    bool has(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::vector<double> get_doubles(const std::string& key,
                                    const std::vector<double>& fallback) const;
    std::vector<int> get_ints(const std::string& key,
                              const std::vector<int>& fallback) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

/// Ground-truth/model parameters as configured (Landau family).
struct ModelParams {
    double sigma1 = 0.151;
    double r_circle = 2.3;
    double omega1 = 0.886;
    double gamma = 0.15 / (2.3 * 2.3);
    double alpha_delta = 1.0;

    double beta() const { return sigma1 / (r_circle * r_circle); }
    model::DescriptorModel build(int n_nodes) const;
};

struct MeasurementParams {
    model::Contamination contamination;
};

ModelParams model_params(const ConfigFile& cfg);
model::Contamination contamination_params(const ConfigFile& cfg);
optimize::IdentificationConfig identification_config(const ConfigFile& cfg);

struct ValidationParams {
    std::vector<double> epsilons;  // log-spaced by default, 1e-9 .. 1e-1
    std::vector<int> n_t_list{50, 500, 5000};
};

ValidationParams validation_params(const ConfigFile& cfg);

}  // namespace oscid::config
