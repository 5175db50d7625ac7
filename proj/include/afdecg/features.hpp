#pragma once

#include "afdecg/afd.hpp"
#include "afdecg/signal_io.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace afdecg {

inline constexpr int kSegmentLength = 301;   // 100 before R + R + 200 after
inline constexpr int kSegmentRIndex = 100;
inline constexpr int kPwaveProbeIndex = 50;  // 50 samples before R
inline constexpr int kFeatureDim = 19;

enum class AAMIClass { N, S, V, F, Q };

// The four classified classes, order N, S, V, F; Q is discarded upstream of
// both the classifier and the metrics.
inline constexpr int kNumClasses = 4;
int class_index(AAMIClass c);         // Q is an error
AAMIClass class_from_index(int idx);

char aami_class_char(AAMIClass c);
AAMIClass aami_class_from_char(char c);

// True for the 13 beat symbols covered by the class map.
bool known_beat_symbol(char symbol);

// {N,L,R,e,j}->N  {A,a,J,S}->S  {V,E}->V  {F}->F  {Q}->Q; others are an error.
AAMIClass map_aami(char symbol);

struct HeartbeatSegment {
    std::array<double, kSegmentLength> samples{};
    int r_index_in_segment = kSegmentRIndex;
    std::string record_id;
    int beat_index = 0;           // index into the record's annotation list
    AAMIClass ref_class = AAMIClass::Q;
    long r_sample_global = 0;
};

struct SegmentationResult {
    std::vector<HeartbeatSegment> segments;
    int dropped_edge = 0;         // window ran past a record boundary
};

// One segment per annotation whose window [r-100, r+200] fits in the record.
// Symbols outside the class map fall into class Q here (discarded downstream).
SegmentationResult segment(const RawRecord& record,
                           const std::vector<BeatAnnotation>& annotations);

struct RRFeatures {
    double pre_rr = 0.0;    // seconds
    double post_rr = 0.0;
    double local_rr = 0.0;  // mean of the previous 10 intervals
};

// Requires i >= 10 (ten previous intervals) and i < last (a next beat).
RRFeatures rr_features(const std::vector<BeatAnnotation>& annotations, int i);

// Width of the high-slope region around R: 5-point derivative, squared,
// 15-sample moving average, 5%-of-peak crossings, smoothing spread removed.
double qrs_duration(const HeartbeatSegment& seg);

double r_amplitude(const HeartbeatSegment& seg);

struct IFFeatures {
    std::array<double, 9> rpeak_if{};  // components 2..10 at the R sample
    std::array<double, 5> pwave_if{};  // components 2..6 at R-50
};

// Requires a level-10 decomposition on the 301-sample segment grid.
IFFeatures if_features(const AFDDecomposition& d);

struct FeatureVector {
    std::array<double, 9> rpeak_if{};
    std::array<double, 5> pwave_if{};
    double qrs_duration = 0.0;  // seconds
    double r_amplitude = 0.0;   // mV
    double pre_rr = 0.0;        // seconds
    double post_rr = 0.0;
    double local_rr = 0.0;

    std::array<double, kFeatureDim> flatten() const;
};

FeatureVector build_feature_vector(const HeartbeatSegment& seg,
                                   const AFDDecomposition& d,
                                   const std::vector<BeatAnnotation>& annotations,
                                   int i);

const std::vector<std::string>& feature_names();

// Column names for a flattened per-beat row; multi-lead repeats the base
// names with a _l<k> suffix.
std::vector<std::string> feature_column_names(std::size_t leads);

// One labelled beat with its (possibly multi-lead) flattened features.
struct BeatFeatures {
    std::string record_id;
    int beat_index = 0;
    AAMIClass ref_class = AAMIClass::Q;
    std::vector<double> values;
};

struct NormalizationStats {
    std::vector<double> mean;
    std::vector<double> stddev;
    int constant_features = 0;  // stddev 0: passed through unscaled
};

NormalizationStats fit_normalization(const std::vector<BeatFeatures>& rows);
std::vector<double> apply_normalization(const NormalizationStats& stats,
                                        const std::vector<double>& values);

// Tab-separated matrix with a header row; columns are record_id, beat_index,
// ref_class, then one column per feature name (suffixed per lead if repeated).
void write_feature_matrix(std::ostream& out, const std::vector<BeatFeatures>& rows);
std::vector<BeatFeatures> read_feature_matrix(std::istream& in);

} // namespace afdecg
