#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace afdecg {

inline constexpr double kReferenceRateHz = 360.0;

// One lead of one recording, in millivolts.
struct RawRecord {
    std::string record_id;
    std::vector<double> samples;
    double sample_rate = 0.0;
    std::string lead_name;
};

struct BeatAnnotation {
    long sample_index = 0;   // R-peak location at record scale
    char symbol = '?';       // single-character beat type
};

struct CsvSpec {
    char delimiter = ',';
    int header_rows = 0;
    int column = 0;          // 0-based
    double sample_rate = kReferenceRateHz;
    std::string record_id = "csv";
    std::string lead_name = "lead0";
};

// One sample per row; malformed cells report the 1-based row number.
RawRecord read_csv_record(const std::string& path, const CsvSpec& spec);

struct WfdbReadResult {
    std::vector<RawRecord> leads;          // in header order
    std::vector<BeatAnnotation> beats;     // beat annotations, sorted
    int non_beat_annotations = 0;
    int unknown_beat_symbols = 0;          // beat codes without a known symbol
    bool checksum_ok = true;
    std::vector<std::string> warnings;     // printed by callers, never fatal
};

struct WfdbOptions {
    bool checksum_hard_fail = false;
};

// Header format: "name nsig fs nsamples"; signal lines carry
// "file 212 gain(baseline)/units adcres adczero initval checksum ...".
// Signal data must be format 212 with both signals in one file.
WfdbReadResult read_wfdb_record(const std::string& header_path,
                                const std::string& signal_path,
                                const std::string& annotation_path,
                                const WfdbOptions& opts = {});

// Two 12-bit two's-complement samples packed per 3 bytes.
std::vector<int> decode_format212(const std::vector<std::uint8_t>& bytes, std::size_t n_samples);

// WFDB beat-annotation codes and their display symbols.
bool is_beat_code(int code);
char annotation_symbol(int code);

struct ResampleResult {
    RawRecord record;
    long up = 1;    // reduced rational ratio target/source = up/down
    long down = 1;
};

// Polyphase rational resampling with a Kaiser windowed-sinc low-pass
// (70 dB stopband). Each polyphase arm is normalized to unit DC gain so
// constants pass through exactly. Output length = ceil(len * up/down).
ResampleResult resample(const RawRecord& record, double target_rate);

// Annotation indices rescale by the same reduced ratio, rounded to nearest.
long resample_annotation_index(long index, long up, long down);

} // namespace afdecg
