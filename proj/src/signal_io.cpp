#include "afdecg/signal_io.hpp"
#include "afdecg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace afdecg {

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::uint8_t> read_binary_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

// Malformed binary/record-bundle content raises IoError (exit 2); malformed
// user-authored text raises ValidationError (exit 1).
double parse_double(const std::string& tok, const std::string& where,
                    bool corrupt_file = false) {
    try {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        const std::string msg = "malformed number '" + tok + "' in " + where;
        if (corrupt_file) throw IoError(msg);
        throw ValidationError(msg);
    }
}

long parse_long(const std::string& tok, const std::string& where,
                bool corrupt_file = false) {
    try {
        std::size_t pos = 0;
        long v = std::stol(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        const std::string msg = "malformed integer '" + tok + "' in " + where;
        if (corrupt_file) throw IoError(msg);
        throw ValidationError(msg);
    }
}

// Kaiser window parameter for ~70 dB sidelobe attenuation.
double kaiser_beta() {
    const double atten_db = 70.0;
    return 0.1102 * (atten_db - 8.7);
}

double bessel_i0(double x) {
    // Power series; converges quickly for the argument range used here.
    double sum = 1.0, term = 1.0;
    const double half_x = x / 2.0;
    for (int k = 1; k < 64; ++k) {
        term *= (half_x / k) * (half_x / k);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

} // namespace

RawRecord read_csv_record(const std::string& path, const CsvSpec& spec) {
    if (spec.sample_rate <= 0.0) throw ValidationError("sample rate must be positive");
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);

    RawRecord rec;
    rec.record_id = spec.record_id;
    rec.lead_name = spec.lead_name;
    rec.sample_rate = spec.sample_rate;

    std::string line;
    long row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (row <= spec.header_rows) continue;
        if (line.empty()) continue;

        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, spec.delimiter)) cells.push_back(cell);
        if (!line.empty() && line.back() == spec.delimiter) cells.push_back("");

        if (spec.column < 0 || spec.column >= static_cast<int>(cells.size()))
            throw ValidationError("row " + std::to_string(row) + ": column " +
                                  std::to_string(spec.column) + " missing");
        double v = parse_double(cells[spec.column], "row " + std::to_string(row));
        if (!std::isfinite(v))
            throw ValidationError("row " + std::to_string(row) + ": non-finite sample");
        rec.samples.push_back(v);
    }
    if (rec.samples.empty()) throw ValidationError("empty record: " + path);
    return rec;
}

std::vector<int> decode_format212(const std::vector<std::uint8_t>& bytes, std::size_t n_samples) {
    // Byte triplet [b0 b1 b2] holds sample A = (b1 & 0x0F) << 8 | b0 and
    // sample B = (b1 & 0xF0) << 4 | b2, each 12-bit two's complement.
    const std::size_t need = (n_samples * 3 + 1) / 2;
    if (bytes.size() < need)
        throw IoError("format-212 stream truncated at byte " +
                      std::to_string(bytes.size()) + ": need " + std::to_string(need) +
                      " bytes for " + std::to_string(n_samples) + " samples");
    std::vector<int> out;
    out.reserve(n_samples);
    for (std::size_t i = 0; out.size() < n_samples; i += 3) {
        int a = ((bytes[i + 1] & 0x0F) << 8) | bytes[i];
        if (a & 0x800) a -= 0x1000;
        out.push_back(a);
        if (out.size() == n_samples) break;
        int b = ((bytes[i + 1] & 0xF0) << 4) | bytes[i + 2];
        if (b & 0x800) b -= 0x1000;
        out.push_back(b);
    }
    return out;
}

bool is_beat_code(int code) {
    switch (code) {
        case 1: case 2: case 3: case 4: case 5: case 6: case 7:
        case 8: case 9: case 10: case 11: case 12: case 13:
        case 25: case 34: case 35: case 38: case 41:
            return true;
        default:
            return false;
    }
}

char annotation_symbol(int code) {
    switch (code) {
        case 1: return 'N';   // normal
        case 2: return 'L';   // left bundle branch block
        case 3: return 'R';   // right bundle branch block
        case 4: return 'a';   // aberrated atrial premature
        case 5: return 'V';   // premature ventricular contraction
        case 6: return 'F';   // fusion of ventricular and normal
        case 7: return 'J';   // nodal (junctional) premature
        case 8: return 'A';   // atrial premature
        case 9: return 'S';   // supraventricular premature
        case 10: return 'E';  // ventricular escape
        case 11: return 'j';  // nodal (junctional) escape
        case 12: return '/';  // paced
        case 13: return 'Q';  // unclassifiable
        case 25: return 'B';  // bundle branch block (unspecified)
        case 34: return 'e';  // atrial escape
        case 35: return 'n';  // supraventricular escape
        case 38: return 'f';  // fusion of paced and normal
        case 41: return 'r';  // R-on-T premature ventricular
        default: return '?';
    }
}

namespace {

struct SignalSpec {
    std::string file;
    int format = 0;
    double gain = 200.0;
    double baseline = 0.0;
    std::string units = "mV";
    int adc_zero = 0;
    int checksum = 0;
    std::string description;
};

struct HeaderInfo {
    std::string record_id;
    int n_signals = 0;
    double sample_rate = 0.0;
    long n_samples = 0;
    std::vector<SignalSpec> signals;
};

HeaderInfo parse_header(const std::string& path) {
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    HeaderInfo hdr;
    bool have_record_line = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> tok = split_ws(line);
        if (!have_record_line) {
            if (tok.size() < 4)
                throw IoError("header record line needs 4 fields: " + path);
            hdr.record_id = tok[0].substr(0, tok[0].find('/'));
            hdr.n_signals = static_cast<int>(parse_long(tok[1], "header of " + path, true));
            hdr.sample_rate = parse_double(tok[2], "header of " + path, true);
            hdr.n_samples = parse_long(tok[3], "header of " + path, true);
            if (hdr.sample_rate <= 0.0)
                throw IoError("header declares non-positive sample rate: " + path);
            if (hdr.n_samples <= 0)
                throw IoError("header declares non-positive length: " + path);
            have_record_line = true;
            continue;
        }
        if (static_cast<int>(hdr.signals.size()) == hdr.n_signals) break;
        if (tok.size() < 2)
            throw IoError("header signal line needs at least 2 fields: " + path);
        SignalSpec sig;
        sig.file = tok[0];
        sig.format = static_cast<int>(parse_long(tok[1], "signal line of " + path, true));
        // Field 3 packs gain, optional baseline, optional units: "200(1024)/mV".
        if (tok.size() > 2) {
            std::string g = tok[2];
            std::string units;
            if (auto slash = g.find('/'); slash != std::string::npos) {
                units = g.substr(slash + 1);
                g = g.substr(0, slash);
            }
            bool have_baseline = false;
            if (auto open = g.find('('); open != std::string::npos) {
                auto close = g.find(')', open);
                if (close == std::string::npos)
                    throw IoError("unbalanced baseline in signal line of " + path);
                sig.baseline = parse_double(g.substr(open + 1, close - open - 1),
                                            "signal line of " + path, true);
                have_baseline = true;
                g = g.substr(0, open);
            }
            sig.gain = parse_double(g, "signal line of " + path, true);
            if (sig.gain == 0.0) sig.gain = 200.0;  // WFDB default for unspecified gain
            if (!units.empty()) sig.units = units;
            if (tok.size() > 4) sig.adc_zero = static_cast<int>(parse_long(tok[4], "signal line of " + path, true));
            if (!have_baseline) sig.baseline = sig.adc_zero;
            if (tok.size() > 6) sig.checksum = static_cast<int>(parse_long(tok[6], "signal line of " + path, true));
        }
        if (tok.size() > 8) {
            std::string desc = tok[8];
            for (std::size_t i = 9; i < tok.size(); ++i) desc += " " + tok[i];
            sig.description = desc;
        }
        hdr.signals.push_back(sig);
    }
    if (!have_record_line) throw IoError("empty header: " + path);
    if (static_cast<int>(hdr.signals.size()) != hdr.n_signals)
        throw IoError("header declares " + std::to_string(hdr.n_signals) +
                              " signals but lists " + std::to_string(hdr.signals.size()) +
                              ": " + path);
    return hdr;
}

std::vector<BeatAnnotation> parse_annotations(const std::string& path,
                                              long record_len,
                                              int* non_beat,
                                              int* unknown_beats,
                                              std::vector<std::string>* warnings) {
    const std::vector<std::uint8_t> bytes = read_binary_file(path);
    std::vector<BeatAnnotation> beats;
    long time = 0;
    std::size_t i = 0;
    while (i + 1 < bytes.size()) {
        const int word = bytes[i] | (bytes[i + 1] << 8);
        i += 2;
        const int code = word >> 10;
        const long interval = word & 0x3FF;
        if (code == 0 && interval == 0) break;  // end of stream
        switch (code) {
            case 59: {  // SKIP: 4-byte interval, high word first
                if (i + 3 >= bytes.size())
                    throw IoError("annotation stream truncated at byte " +
                                  std::to_string(i) + " in " + path);
                const long hi = bytes[i] | (bytes[i + 1] << 8);
                const long lo = bytes[i + 2] | (bytes[i + 3] << 8);
                i += 4;
                long skip = (hi << 16) | lo;
                if (skip & 0x80000000L) skip -= 0x100000000L;
                time += skip;
                break;
            }
            case 60:  // NUM
            case 61:  // SUB
            case 62:  // CHN
                break;
            case 63: {  // AUX: interval counts bytes, padded to even
                i += static_cast<std::size_t>(interval + (interval & 1));
                break;
            }
            default: {
                time += interval;
                if (is_beat_code(code)) {
                    if (time < 0 || time >= record_len) {
                        warnings->push_back("annotation at sample " + std::to_string(time) +
                                            " outside record; dropped");
                        break;
                    }
                    char sym = annotation_symbol(code);
                    if (sym == '?') ++*unknown_beats;
                    beats.push_back(BeatAnnotation{time, sym});
                } else {
                    ++*non_beat;
                }
                break;
            }
        }
    }
    // Times are cumulative, so order only breaks on a corrupt stream.
    for (std::size_t k = 1; k < beats.size(); ++k)
        if (beats[k].sample_index <= beats[k - 1].sample_index)
            throw IoError("annotation times not strictly increasing in " + path);
    return beats;
}

} // namespace

WfdbReadResult read_wfdb_record(const std::string& header_path,
                                const std::string& signal_path,
                                const std::string& annotation_path,
                                const WfdbOptions& opts) {
    const HeaderInfo hdr = parse_header(header_path);
    if (hdr.n_signals != 2)
        throw ValidationError("expected 2 signals, header declares " +
                              std::to_string(hdr.n_signals) + ": " + header_path);
    for (const SignalSpec& sig : hdr.signals)
        if (sig.format != 212)
            throw ValidationError("unsupported signal format " + std::to_string(sig.format) +
                                  " (only 212): " + header_path);
    if (hdr.signals[0].file != hdr.signals[1].file)
        throw ValidationError("signals must share one format-212 file: " + header_path);

    const std::vector<std::uint8_t> bytes = read_binary_file(signal_path);
    const std::size_t total = static_cast<std::size_t>(hdr.n_samples) * 2;
    std::vector<int> adc;
    try {
        adc = decode_format212(bytes, total);
    } catch (const IoError& e) {
        throw IoError(signal_path + ": " + e.what());
    }

    WfdbReadResult result;
    for (int lead = 0; lead < 2; ++lead) {
        const SignalSpec& sig = hdr.signals[lead];
        RawRecord rec;
        rec.record_id = hdr.record_id;
        rec.sample_rate = hdr.sample_rate;
        rec.lead_name = sig.description.empty() ? ("signal" + std::to_string(lead))
                                                : sig.description;
        rec.samples.resize(hdr.n_samples);
        int checksum = 0;
        for (long n = 0; n < hdr.n_samples; ++n) {
            const int v = adc[2 * n + lead];
            checksum = static_cast<std::int16_t>(checksum + v);
            rec.samples[n] = (v - sig.baseline) / sig.gain;
        }
        if (checksum != static_cast<std::int16_t>(sig.checksum)) {
            result.checksum_ok = false;
            const std::string msg = "checksum mismatch on " + hdr.record_id + " lead " +
                                    std::to_string(lead) + ": computed " +
                                    std::to_string(checksum) + ", header " +
                                    std::to_string(sig.checksum);
            if (opts.checksum_hard_fail) throw IoError(msg);
            result.warnings.push_back(msg);
        }
        result.leads.push_back(std::move(rec));
    }

    result.beats = parse_annotations(annotation_path, hdr.n_samples,
                                     &result.non_beat_annotations,
                                     &result.unknown_beat_symbols,
                                     &result.warnings);
    if (result.beats.empty())
        result.warnings.push_back("record " + hdr.record_id + " has no beat annotations");
    return result;
}

ResampleResult resample(const RawRecord& record, double target_rate) {
    if (target_rate <= 0.0) throw ValidationError("target rate must be positive");
    if (record.samples.empty()) throw ValidationError("cannot resample empty record");
    if (record.sample_rate <= 0.0) throw ValidationError("source rate must be positive");

    // Rates are rational in practice; scale to integers at millihertz resolution.
    const long src = std::lround(record.sample_rate * 1000.0);
    const long dst = std::lround(target_rate * 1000.0);
    if (src <= 0 || dst <= 0) throw ValidationError("rates too small to resolve");
    const long g = std::gcd(src, dst);
    const long up = dst / g;
    const long down = src / g;

    ResampleResult result;
    result.up = up;
    result.down = down;
    result.record = record;
    result.record.sample_rate = target_rate;
    if (up == down) return result;

    // Windowed-sinc low-pass at the tighter of source/target Nyquist,
    // expressed at the up-sampled rate.
    const long half = 10 * std::max(up, down);
    const long n_taps = 2 * half + 1;
    const double cutoff = 0.5 / static_cast<double>(std::max(up, down));
    const double beta = kaiser_beta();
    const double i0_beta = bessel_i0(beta);
    std::vector<double> taps(n_taps);
    for (long i = 0; i < n_taps; ++i) {
        const double m = static_cast<double>(i - half);
        const double x = 2.0 * cutoff * m;
        const double sinc = (m == 0.0) ? 1.0 : std::sin(M_PI * x) / (M_PI * x);
        const double w = m / static_cast<double>(half);
        taps[i] = 2.0 * cutoff * sinc * bessel_i0(beta * std::sqrt(1.0 - w * w)) / i0_beta;
    }
    // Unit DC gain per polyphase arm makes constants pass through exactly.
    for (long p = 0; p < up; ++p) {
        double sum = 0.0;
        for (long i = p; i < n_taps; i += up) sum += taps[i];
        for (long i = p; i < n_taps; i += up) taps[i] /= sum;
    }

    const long in_len = static_cast<long>(record.samples.size());
    const long out_len = (in_len * up + down - 1) / down;
    std::vector<double> out(out_len);
    for (long m = 0; m < out_len; ++m) {
        // Output sample m sits at up-rate index m*down; center the filter there.
        const long n_high = m * down + half;
        const long phase = n_high % up;
        const long base = n_high / up;
        double acc = 0.0;
        for (long i = phase, k = 0; i < n_taps; i += up, ++k) {
            // Clamp at the boundaries so each arm's unit DC sum is preserved.
            const long idx = std::clamp(base - k, 0L, in_len - 1);
            acc += taps[i] * record.samples[idx];
        }
        out[m] = acc;
    }
    result.record.samples = std::move(out);
    return result;
}

long resample_annotation_index(long index, long up, long down) {
    if (up <= 0 || down <= 0) throw ValidationError("resample ratio must be positive");
    return (index * up + down / 2) / down;
}

} // namespace afdecg
