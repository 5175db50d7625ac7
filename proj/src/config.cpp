#include "afdecg/config.hpp"
#include "afdecg/errors.hpp"

#include "json.hpp"

#include <fstream>
#include <set>

namespace afdecg {

namespace {
using json = nlohmann::ordered_json;

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& item : j.items())
        if (!known.count(item.key()))
            throw ValidationError("unknown config key '" + item.key() + "' in " + where);
}

} // namespace

void PipelineConfig::validate() const {
    if (afd_level < 1 || afd_level > kMaxDecompositionLevel)
        throw ValidationError("afd_level must be in [1, " +
                              std::to_string(kMaxDecompositionLevel) + "]");
    if (grid_rings < 2) throw ValidationError("grid_rings must be at least 2");
    if (!(pole_radius_max > 0.0 && pole_radius_max < 1.0))
        throw ValidationError("pole_radius_max must lie in (0, 1)");
    svm.validate();
    if (lead < 0 || lead > 1) throw ValidationError("lead must be 0 or 1");
    if (sv_lead < 0 || sv_lead > 1) throw ValidationError("sv_lead must be 0 or 1");
    if (jobs < 1) throw ValidationError("jobs must be at least 1");
}

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("malformed config file " + path + ": " + e.what());
    }

    reject_unknown_keys(j, {"data_dir", "split_file", "model_file", "afd_level",
                            "grid_rings", "pole_radius_max", "svm", "lead", "two_lead",
                            "augment_sv", "sv_lead", "jobs", "seed",
                            "checksum_hard_fail"},
                        path);

    PipelineConfig cfg;
    try {
        if (j.contains("data_dir")) cfg.data_dir = j.at("data_dir").get<std::string>();
        if (j.contains("split_file")) cfg.split_file = j.at("split_file").get<std::string>();
        if (j.contains("model_file")) cfg.model_file = j.at("model_file").get<std::string>();
        if (j.contains("afd_level")) cfg.afd_level = j.at("afd_level").get<int>();
        if (j.contains("grid_rings")) cfg.grid_rings = j.at("grid_rings").get<int>();
        if (j.contains("pole_radius_max"))
            cfg.pole_radius_max = j.at("pole_radius_max").get<double>();
        if (j.contains("svm")) {
            const json& s = j.at("svm");
            reject_unknown_keys(s, {"C", "sigma", "class_weights"}, path + " (svm)");
            if (s.contains("C")) cfg.svm.C = s.at("C").get<double>();
            if (s.contains("sigma")) cfg.svm.sigma = s.at("sigma").get<double>();
            if (s.contains("class_weights")) {
                const auto w = s.at("class_weights").get<std::vector<double>>();
                if (w.size() != kNumClasses)
                    throw ValidationError("class_weights needs exactly 4 entries in " + path);
                std::copy(w.begin(), w.end(), cfg.svm.class_weights.begin());
            }
        }
        if (j.contains("lead")) cfg.lead = j.at("lead").get<int>();
        if (j.contains("two_lead")) cfg.two_lead = j.at("two_lead").get<bool>();
        if (j.contains("augment_sv")) cfg.augment_sv = j.at("augment_sv").get<bool>();
        if (j.contains("sv_lead")) cfg.sv_lead = j.at("sv_lead").get<int>();
        if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<int>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<unsigned>();
        if (j.contains("checksum_hard_fail"))
            cfg.checksum_hard_fail = j.at("checksum_hard_fail").get<bool>();
    } catch (const json::exception& e) {
        throw ValidationError("malformed config file " + path + ": " + e.what());
    }
    cfg.validate();
    return cfg;
}

} // namespace afdecg
