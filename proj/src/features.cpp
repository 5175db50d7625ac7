#include "afdecg/features.hpp"
#include "afdecg/errors.hpp"
#include "afdecg/ifreq.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace afdecg {

namespace {

constexpr double kQrsPeakFraction = 0.05;
constexpr int kQrsScanCap = 60;          // samples searched on each side of R
// The 15-sample average and 5-point derivative widen the envelope by
// (15-1)/2 + (5-1)/2 samples per side; the crossings are pulled back by that.
constexpr int kQrsSmoothingSpread = 9;
constexpr int kQrsMinSamples = 2;
constexpr int kQrsMaxSamples = 120;

} // namespace

int class_index(AAMIClass c) {
    switch (c) {
        case AAMIClass::N: return 0;
        case AAMIClass::S: return 1;
        case AAMIClass::V: return 2;
        case AAMIClass::F: return 3;
        case AAMIClass::Q:
            throw ValidationError("class Q has no classifier index (discarded class)");
    }
    throw ValidationError("invalid class");
}

AAMIClass class_from_index(int idx) {
    switch (idx) {
        case 0: return AAMIClass::N;
        case 1: return AAMIClass::S;
        case 2: return AAMIClass::V;
        case 3: return AAMIClass::F;
        default:
            throw ValidationError("class index out of range: " + std::to_string(idx));
    }
}

char aami_class_char(AAMIClass c) {
    switch (c) {
        case AAMIClass::N: return 'N';
        case AAMIClass::S: return 'S';
        case AAMIClass::V: return 'V';
        case AAMIClass::F: return 'F';
        case AAMIClass::Q: return 'Q';
    }
    return '?';
}

AAMIClass aami_class_from_char(char c) {
    switch (c) {
        case 'N': return AAMIClass::N;
        case 'S': return AAMIClass::S;
        case 'V': return AAMIClass::V;
        case 'F': return AAMIClass::F;
        case 'Q': return AAMIClass::Q;
        default:
            throw ValidationError(std::string("unknown class letter '") + c + "'");
    }
}

bool known_beat_symbol(char symbol) {
    switch (symbol) {
        case 'N': case 'L': case 'R': case 'e': case 'j':
        case 'A': case 'a': case 'J': case 'S':
        case 'V': case 'E':
        case 'F':
        case 'Q':
            return true;
        default:
            return false;
    }
}

AAMIClass map_aami(char symbol) {
    switch (symbol) {
        case 'N': case 'L': case 'R': case 'e': case 'j':
            return AAMIClass::N;
        case 'A': case 'a': case 'J': case 'S':
            return AAMIClass::S;
        case 'V': case 'E':
            return AAMIClass::V;
        case 'F':
            return AAMIClass::F;
        case 'Q':
            return AAMIClass::Q;
        default:
            throw ValidationError(std::string("unknown beat symbol '") + symbol + "'");
    }
}

SegmentationResult segment(const RawRecord& record,
                           const std::vector<BeatAnnotation>& annotations) {
    SegmentationResult result;
    const long len = static_cast<long>(record.samples.size());
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        const long r = annotations[i].sample_index;
        if (r < kSegmentRIndex || r + (kSegmentLength - 1 - kSegmentRIndex) >= len) {
            ++result.dropped_edge;
            continue;
        }
        HeartbeatSegment seg;
        seg.record_id = record.record_id;
        seg.beat_index = static_cast<int>(i);
        seg.r_sample_global = r;
        const char sym = annotations[i].symbol;
        seg.ref_class = known_beat_symbol(sym) ? map_aami(sym) : AAMIClass::Q;
        for (int k = 0; k < kSegmentLength; ++k)
            seg.samples[k] = record.samples[r - kSegmentRIndex + k];
        result.segments.push_back(std::move(seg));
    }
    return result;
}

RRFeatures rr_features(const std::vector<BeatAnnotation>& annotations, int i) {
    const int n = static_cast<int>(annotations.size());
    if (i < 10)
        throw ValidationError("RR features need 10 previous beats, got index " +
                              std::to_string(i));
    if (i >= n - 1)
        throw ValidationError("RR features need a following beat, got index " +
                              std::to_string(i) + " of " + std::to_string(n));
    RRFeatures rr;
    rr.pre_rr = (annotations[i].sample_index - annotations[i - 1].sample_index) /
                kReferenceRateHz;
    rr.post_rr = (annotations[i + 1].sample_index - annotations[i].sample_index) /
                 kReferenceRateHz;
    double sum = 0.0;
    for (int k = 0; k < 10; ++k)
        sum += annotations[i - k].sample_index - annotations[i - k - 1].sample_index;
    rr.local_rr = sum / 10.0 / kReferenceRateHz;
    return rr;
}

double qrs_duration(const HeartbeatSegment& seg) {
    const int m = kSegmentLength;
    std::vector<double> sq(m, 0.0);
    for (int i = 2; i < m - 2; ++i) {
        const double d = (-seg.samples[i - 2] - 2.0 * seg.samples[i - 1] +
                          2.0 * seg.samples[i + 1] + seg.samples[i + 2]) / 8.0;
        sq[i] = d * d;
    }
    std::vector<double> env(m, 0.0);
    for (int i = 0; i < m; ++i) {
        double acc = 0.0;
        for (int j = std::max(0, i - 7); j <= std::min(m - 1, i + 7); ++j) acc += sq[j];
        env[i] = acc / 15.0;
    }
    const double peak = *std::max_element(env.begin(), env.end());
    if (peak <= 0.0) throw ValidationError("flat segment: QRS duration undefined");
    const double threshold = kQrsPeakFraction * peak;

    const int r = kSegmentRIndex;
    int onset = r - kQrsScanCap;
    for (int i = r; i >= r - kQrsScanCap; --i)
        if (env[i] < threshold) { onset = i; break; }
    int offset = r + kQrsScanCap;
    for (int i = r; i <= r + kQrsScanCap; ++i)
        if (env[i] < threshold) { offset = i; break; }

    const int width = std::clamp((offset - kQrsSmoothingSpread) -
                                 (onset + kQrsSmoothingSpread),
                                 kQrsMinSamples, kQrsMaxSamples);
    return width / kReferenceRateHz;
}

double r_amplitude(const HeartbeatSegment& seg) {
    return seg.samples[kSegmentRIndex];
}

IFFeatures if_features(const AFDDecomposition& d) {
    if (d.level != 10)
        throw ValidationError("IF features need decomposition level 10, got " +
                              std::to_string(d.level));
    if (d.grid_len != kSegmentLength)
        throw ValidationError("IF features need the 301-sample segment grid, got " +
                              std::to_string(d.grid_len));
    const double t_r = 2.0 * std::numbers::pi * kSegmentRIndex / kSegmentLength;
    const double t_p = 2.0 * std::numbers::pi * kPwaveProbeIndex / kSegmentLength;
    IFFeatures f;
    for (int n = 2; n <= 10; ++n)
        f.rpeak_if[n - 2] = instantaneous_frequency_at(d, n, t_r);
    for (int n = 2; n <= 6; ++n)
        f.pwave_if[n - 2] = instantaneous_frequency_at(d, n, t_p);
    return f;
}

std::array<double, kFeatureDim> FeatureVector::flatten() const {
    std::array<double, kFeatureDim> v{};
    int k = 0;
    for (double x : rpeak_if) v[k++] = x;
    for (double x : pwave_if) v[k++] = x;
    v[k++] = qrs_duration;
    v[k++] = r_amplitude;
    v[k++] = pre_rr;
    v[k++] = post_rr;
    v[k++] = local_rr;
    return v;
}

FeatureVector build_feature_vector(const HeartbeatSegment& seg,
                                   const AFDDecomposition& d,
                                   const std::vector<BeatAnnotation>& annotations,
                                   int i) {
    FeatureVector fv;
    const IFFeatures f = if_features(d);
    fv.rpeak_if = f.rpeak_if;
    fv.pwave_if = f.pwave_if;
    fv.qrs_duration = qrs_duration(seg);
    fv.r_amplitude = r_amplitude(seg);
    const RRFeatures rr = rr_features(annotations, i);
    fv.pre_rr = rr.pre_rr;
    fv.post_rr = rr.post_rr;
    fv.local_rr = rr.local_rr;
    return fv;
}

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (int n = 2; n <= 10; ++n) v.push_back("rpeak_if_" + std::to_string(n));
        for (int n = 2; n <= 6; ++n) v.push_back("pwave_if_" + std::to_string(n));
        v.insert(v.end(), {"qrs_duration", "r_amplitude", "pre_rr", "post_rr", "local_rr"});
        return v;
    }();
    return names;
}

std::vector<std::string> feature_column_names(std::size_t leads) {
    std::vector<std::string> cols;
    for (std::size_t lead = 0; lead < leads; ++lead)
        for (const std::string& name : feature_names())
            cols.push_back(leads > 1 ? name + "_l" + std::to_string(lead) : name);
    return cols;
}

NormalizationStats fit_normalization(const std::vector<BeatFeatures>& rows) {
    if (rows.empty()) throw ValidationError("cannot fit normalization on empty matrix");
    const std::size_t dim = rows[0].values.size();
    for (const BeatFeatures& row : rows)
        if (row.values.size() != dim)
            throw ValidationError("ragged feature matrix");
    NormalizationStats stats;
    stats.mean.assign(dim, 0.0);
    stats.stddev.assign(dim, 0.0);
    for (const BeatFeatures& row : rows)
        for (std::size_t j = 0; j < dim; ++j) stats.mean[j] += row.values[j];
    for (double& mu : stats.mean) mu /= static_cast<double>(rows.size());
    for (const BeatFeatures& row : rows)
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = row.values[j] - stats.mean[j];
            stats.stddev[j] += d * d;
        }
    for (std::size_t j = 0; j < dim; ++j) {
        stats.stddev[j] = std::sqrt(stats.stddev[j] / static_cast<double>(rows.size()));
        if (stats.stddev[j] == 0.0) ++stats.constant_features;
    }
    return stats;
}

std::vector<double> apply_normalization(const NormalizationStats& stats,
                                        const std::vector<double>& values) {
    if (values.size() != stats.mean.size())
        throw ValidationError("feature dimension mismatch: " +
                              std::to_string(values.size()) + " vs " +
                              std::to_string(stats.mean.size()));
    std::vector<double> out(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) {
        const double sd = stats.stddev[j];
        out[j] = sd > 0.0 ? (values[j] - stats.mean[j]) / sd : values[j];
    }
    return out;
}

void write_feature_matrix(std::ostream& out, const std::vector<BeatFeatures>& rows) {
    if (rows.empty()) throw ValidationError("refusing to write empty feature matrix");
    const std::size_t dim = rows[0].values.size();
    const std::size_t base = feature_names().size();
    if (dim % base != 0)
        throw ValidationError("feature dimension " + std::to_string(dim) +
                              " is not a multiple of " + std::to_string(base));
    const std::size_t leads = dim / base;
    out << "record_id\tbeat_index\tref_class";
    for (const std::string& name : feature_column_names(leads)) out << '\t' << name;
    out << '\n';
    out << std::setprecision(17);
    for (const BeatFeatures& row : rows) {
        if (row.values.size() != dim) throw ValidationError("ragged feature matrix");
        out << row.record_id << '\t' << row.beat_index << '\t'
            << aami_class_char(row.ref_class);
        for (double v : row.values) out << '\t' << v;
        out << '\n';
    }
}

std::vector<BeatFeatures> read_feature_matrix(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty feature matrix");
    std::vector<BeatFeatures> rows;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        BeatFeatures row;
        if (!std::getline(ss, row.record_id, '\t'))
            throw ValidationError("line " + std::to_string(lineno) + ": missing record_id");
        if (!std::getline(ss, cell, '\t'))
            throw ValidationError("line " + std::to_string(lineno) + ": missing beat_index");
        row.beat_index = std::stoi(cell);
        if (!std::getline(ss, cell, '\t') || cell.size() != 1)
            throw ValidationError("line " + std::to_string(lineno) + ": missing ref_class");
        row.ref_class = aami_class_from_char(cell[0]);
        while (std::getline(ss, cell, '\t')) {
            try {
                row.values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ValidationError("line " + std::to_string(lineno) +
                                      ": malformed value '" + cell + "'");
            }
        }
        if (row.values.empty())
            throw ValidationError("line " + std::to_string(lineno) + ": no feature values");
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace afdecg
