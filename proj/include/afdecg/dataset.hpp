#pragma once

#include "afdecg/config.hpp"
#include "afdecg/eval.hpp"
#include "afdecg/signal_io.hpp"

#include <string>
#include <vector>

namespace afdecg {

// Record files resolve as <data_dir>/<id>.{hea,dat,atr}, falling back to
// <data_dir>/mitdb/<id>.*; augmentation records live under <data_dir>/svdb/.
std::string resolve_record_path(const std::string& data_dir,
                                const std::string& record_id,
                                const std::string& extension);

std::vector<std::string> list_sv_records(const std::string& data_dir);

// A record with every lead at the reference rate and annotations rescaled.
struct LoadedRecord {
    std::string record_id;
    std::vector<RawRecord> leads;
    std::vector<BeatAnnotation> beats;
    int non_beat_annotations = 0;
    int unknown_beat_symbols = 0;
    std::vector<std::string> warnings;
};

LoadedRecord load_wfdb_record_resampled(const std::string& data_dir,
                                        const std::string& record_id,
                                        bool checksum_hard_fail = false);

// Beats as sample_index,symbol lines; pairs a CSV lead with beat locations.
std::vector<BeatAnnotation> read_annotation_csv(const std::string& path);

struct AssemblyCounts {
    long annotations = 0;          // beat annotations seen
    long dropped_first = 0;
    long dropped_last = 0;
    long dropped_edge = 0;         // segment window left the record
    long dropped_q = 0;            // class Q (includes unknown symbols)
    long dropped_degenerate = 0;   // feature extraction failed (flat segment)
    long kept = 0;
    std::array<long, kNumClasses> per_class{};

    void add(const AssemblyCounts& other);
};

struct AssembledBeats {
    std::vector<BeatFeatures> rows;
    AssemblyCounts counts;
    double residual_rel_mean = 0.0;  // relative residual energy after level N
    double residual_rel_max = 0.0;
    std::vector<std::string> warnings;
};

struct AssemblyOptions {
    int level = 10;
    int grid_rings = 64;
    double pole_radius_max = kDefaultPoleRadiusMax;
    int drop_first = 10;
    int drop_last = 1;
    bool two_lead = false;
    int lead = 0;                  // ignored in two-lead mode
    int jobs = 1;
    bool s_class_only = false;     // augmentation keeps only S beats
};

// Segments eligible beats, runs the decomposition per beat (parallel across
// beats), and emits one flattened feature row per kept beat.
AssembledBeats assemble_beats(const LoadedRecord& record, const AssemblyOptions& opts);

// Full-database accounting without feature extraction: class counts after
// symbol mapping, before and after the drop rule.
struct ClassCountResult {
    std::array<long, kNumClasses> kept{};
    long kept_q = 0;
    long total_beats = 0;
};

ClassCountResult count_beats(const LoadedRecord& record, int drop_first, int drop_last);

} // namespace afdecg
