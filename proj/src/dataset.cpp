#include "afdecg/dataset.hpp"
#include "afdecg/analytic.hpp"
#include "afdecg/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

namespace afdecg {

namespace fs = std::filesystem;

std::string resolve_record_path(const std::string& data_dir,
                                const std::string& record_id,
                                const std::string& extension) {
    const fs::path flat = fs::path(data_dir) / (record_id + extension);
    if (fs::exists(flat)) return flat.string();
    const fs::path nested = fs::path(data_dir) / "mitdb" / (record_id + extension);
    if (fs::exists(nested)) return nested.string();
    const fs::path sv = fs::path(data_dir) / "svdb" / (record_id + extension);
    if (fs::exists(sv)) return sv.string();
    throw IoError("record file not found: " + flat.string() + " (also tried mitdb/, svdb/)");
}

std::vector<std::string> list_sv_records(const std::string& data_dir) {
    const fs::path dir = fs::path(data_dir) / "svdb";
    if (!fs::is_directory(dir))
        throw IoError("augmentation database directory not found: " + dir.string());
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".hea")
            ids.push_back(entry.path().stem().string());
    std::sort(ids.begin(), ids.end());
    if (ids.empty())
        throw IoError("no records (*.hea) in " + dir.string());
    return ids;
}

LoadedRecord load_wfdb_record_resampled(const std::string& data_dir,
                                        const std::string& record_id,
                                        bool checksum_hard_fail) {
    const std::string hea = resolve_record_path(data_dir, record_id, ".hea");
    const std::string dat = resolve_record_path(data_dir, record_id, ".dat");
    const std::string atr = resolve_record_path(data_dir, record_id, ".atr");
    WfdbOptions opts;
    opts.checksum_hard_fail = checksum_hard_fail;
    WfdbReadResult raw = read_wfdb_record(hea, dat, atr, opts);

    LoadedRecord rec;
    rec.record_id = raw.leads.empty() ? record_id : raw.leads[0].record_id;
    rec.non_beat_annotations = raw.non_beat_annotations;
    rec.unknown_beat_symbols = raw.unknown_beat_symbols;
    rec.warnings = std::move(raw.warnings);

    long up = 1, down = 1;
    for (RawRecord& lead : raw.leads) {
        ResampleResult r = resample(lead, kReferenceRateHz);
        up = r.up;
        down = r.down;
        rec.leads.push_back(std::move(r.record));
    }
    rec.beats = std::move(raw.beats);
    if (up != down) {
        const long new_len = static_cast<long>(rec.leads[0].samples.size());
        for (BeatAnnotation& beat : rec.beats) {
            beat.sample_index = resample_annotation_index(beat.sample_index, up, down);
            beat.sample_index = std::min(beat.sample_index, new_len - 1);
        }
    }
    return rec;
}

std::vector<BeatAnnotation> read_annotation_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open annotation file: " + path);
    std::vector<BeatAnnotation> beats;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string idx, sym;
        if (!std::getline(ss, idx, ',') || !std::getline(ss, sym, ','))
            throw ValidationError("line " + std::to_string(lineno) +
                                  ": expected sample_index,symbol in " + path);
        BeatAnnotation beat;
        try {
            beat.sample_index = std::stol(idx);
        } catch (const std::exception&) {
            throw ValidationError("line " + std::to_string(lineno) +
                                  ": malformed sample index '" + idx + "' in " + path);
        }
        if (sym.size() != 1)
            throw ValidationError("line " + std::to_string(lineno) +
                                  ": symbol must be one character in " + path);
        beat.symbol = sym[0];
        beats.push_back(beat);
    }
    for (std::size_t k = 1; k < beats.size(); ++k)
        if (beats[k].sample_index <= beats[k - 1].sample_index)
            throw ValidationError("annotations not strictly increasing in " + path);
    return beats;
}

void AssemblyCounts::add(const AssemblyCounts& other) {
    annotations += other.annotations;
    dropped_first += other.dropped_first;
    dropped_last += other.dropped_last;
    dropped_edge += other.dropped_edge;
    dropped_q += other.dropped_q;
    dropped_degenerate += other.dropped_degenerate;
    kept += other.kept;
    for (int c = 0; c < kNumClasses; ++c) per_class[c] += other.per_class[c];
}

namespace {

void run_parallel(int jobs, long n, const std::function<void(long)>& body) {
    if (jobs <= 1 || n <= 1) {
        for (long i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::thread> workers;
    const int count = static_cast<int>(std::min<long>(jobs, n));
    workers.reserve(count);
    for (int w = 0; w < count; ++w)
        workers.emplace_back([&] {
            for (long i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    for (std::thread& t : workers) t.join();
}

} // namespace

AssembledBeats assemble_beats(const LoadedRecord& record, const AssemblyOptions& opts) {
    if (record.leads.empty()) throw ValidationError("record has no leads");
    const int needed_leads = opts.two_lead ? 2 : 1;
    if (static_cast<int>(record.leads.size()) < needed_leads)
        throw ValidationError("record " + record.record_id + " has fewer than " +
                              std::to_string(needed_leads) + " leads");
    if (!opts.two_lead && opts.lead >= static_cast<int>(record.leads.size()))
        throw ValidationError("lead " + std::to_string(opts.lead) + " not present in " +
                              record.record_id);

    std::vector<int> lead_ids;
    if (opts.two_lead) lead_ids = {0, 1};
    else lead_ids = {opts.lead};

    // The drop rule and the RR-window requirements coincide at the defaults
    // (10 before, 1 after); tighter drops still respect the RR minimums.
    const int first = std::max(opts.drop_first, 10);
    const int last_excl = static_cast<int>(record.beats.size()) - std::max(opts.drop_last, 1);

    AssembledBeats result;
    result.counts.annotations = static_cast<long>(record.beats.size());
    result.counts.dropped_first =
        std::min<long>(first, static_cast<long>(record.beats.size()));
    result.counts.dropped_last =
        std::max<long>(0, static_cast<long>(record.beats.size()) -
                              std::max(last_excl, first));

    std::vector<SegmentationResult> segmented;
    for (int lead : lead_ids)
        segmented.push_back(segment(record.leads[lead], record.beats));

    // Beats eligible on every requested lead, indexed by annotation position.
    struct Candidate {
        int beat_index;
        std::vector<const HeartbeatSegment*> segs;
    };
    std::vector<Candidate> candidates;
    for (int i = first; i < last_excl; ++i) {
        const char sym = record.beats[i].symbol;
        const AAMIClass cls = known_beat_symbol(sym) ? map_aami(sym) : AAMIClass::Q;
        if (cls == AAMIClass::Q) {
            ++result.counts.dropped_q;
            continue;
        }
        if (opts.s_class_only && cls != AAMIClass::S) continue;
        Candidate cand;
        cand.beat_index = i;
        bool complete = true;
        for (const SegmentationResult& sr : segmented) {
            const auto it = std::find_if(sr.segments.begin(), sr.segments.end(),
                                         [&](const HeartbeatSegment& s) {
                                             return s.beat_index == i;
                                         });
            if (it == sr.segments.end()) {
                complete = false;
                break;
            }
            cand.segs.push_back(&*it);
        }
        if (!complete) {
            ++result.counts.dropped_edge;
            continue;
        }
        candidates.push_back(std::move(cand));
    }

    const SearchGrid grid =
        SearchGrid::uniform(opts.grid_rings, opts.pole_radius_max, kSegmentLength);

    result.rows.resize(candidates.size());
    std::vector<double> residual_rel(candidates.size(), 0.0);
    std::vector<std::string> errors(candidates.size());
    run_parallel(opts.jobs, static_cast<long>(candidates.size()), [&](long k) {
        const Candidate& cand = candidates[k];
        try {
            BeatFeatures row;
            row.record_id = record.record_id;
            row.beat_index = cand.beat_index;
            row.ref_class = cand.segs[0]->ref_class;
            double rel = 0.0;
            for (const HeartbeatSegment* seg : cand.segs) {
                RealSignal s(seg->samples.begin(), seg->samples.end());
                const ComplexSignal s_plus = analytic_signal(s);
                const AFDDecomposition d =
                    decompose(s_plus, opts.level, grid, true, mean_coefficient(s));
                const FeatureVector fv =
                    build_feature_vector(*seg, d, record.beats, cand.beat_index);
                const auto flat = fv.flatten();
                row.values.insert(row.values.end(), flat.begin(), flat.end());
                if (d.source_energy > 0.0)
                    rel = std::max(rel, d.residual_energies.back() / d.source_energy);
            }
            residual_rel[k] = rel;
            result.rows[k] = std::move(row);
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    });

    // Degenerate beats (flat segments) are dropped with a warning, not fatal.
    std::vector<BeatFeatures> kept;
    double rel_sum = 0.0;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (!errors[k].empty()) {
            result.warnings.push_back("beat " + std::to_string(candidates[k].beat_index) +
                                      " of " + record.record_id + " skipped: " + errors[k]);
            ++result.counts.dropped_degenerate;
            continue;
        }
        rel_sum += residual_rel[k];
        result.residual_rel_max = std::max(result.residual_rel_max, residual_rel[k]);
        kept.push_back(std::move(result.rows[k]));
    }
    result.rows = std::move(kept);
    if (!result.rows.empty())
        result.residual_rel_mean = rel_sum / static_cast<double>(result.rows.size());
    for (const BeatFeatures& row : result.rows)
        ++result.counts.per_class[class_index(row.ref_class)];
    result.counts.kept = static_cast<long>(result.rows.size());
    return result;
}

ClassCountResult count_beats(const LoadedRecord& record, int drop_first, int drop_last) {
    ClassCountResult out;
    out.total_beats = static_cast<long>(record.beats.size());
    const long last_excl = out.total_beats - drop_last;
    for (long i = drop_first; i < last_excl; ++i) {
        const char sym = record.beats[i].symbol;
        const AAMIClass cls = known_beat_symbol(sym) ? map_aami(sym) : AAMIClass::Q;
        if (cls == AAMIClass::Q) ++out.kept_q;
        else ++out.kept[class_index(cls)];
    }
    return out;
}

} // namespace afdecg
