#pragma once

#include "afdecg/svm.hpp"

#include <string>

namespace afdecg {

// One artifact reproduces a run: every pipeline setting lives here, and CLI
// flags override individual fields after loading.
struct PipelineConfig {
    std::string data_dir;                 // env AFD_ECG_DATA_DIR overrides
    std::string split_file;
    std::string model_file;

    int afd_level = 10;
    int grid_rings = 64;
    double pole_radius_max = 0.98;

    SVMParams svm;                        // defaults: C=3, sigma=0.0006, w=(0.42,36,2.5,1.79)

    int lead = 0;
    bool two_lead = false;
    bool augment_sv = false;
    int sv_lead = 0;                      // lead used for augmentation beats

    int jobs = 1;
    unsigned seed = 0;
    bool checksum_hard_fail = false;

    void validate() const;
};

// Strict parse: unknown keys are rejected so typos cannot silently no-op.
PipelineConfig load_pipeline_config(const std::string& path);

} // namespace afdecg
