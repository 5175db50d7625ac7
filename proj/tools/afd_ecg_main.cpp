#include "afdecg/analytic.hpp"
#include "afdecg/config.hpp"
#include "afdecg/dataset.hpp"
#include "afdecg/errors.hpp"
#include "afdecg/ifreq.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

namespace fs = std::filesystem;
using afdecg::AssembledBeats;
using afdecg::AssemblyOptions;
using afdecg::BeatFeatures;
using afdecg::IoError;
using afdecg::LoadedRecord;
using afdecg::PipelineConfig;
using afdecg::ValidationError;
using json = nlohmann::ordered_json;

// Reference operating point of the reproduced protocol, quoted in reports.
constexpr double kBenchmarkAccuracy = 0.8502;

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write file: " + tmp);
        out << content;
        if (!out) throw IoError("failed writing file: " + tmp);
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp + " to " + path + ": " + ec.message());
}

struct CommonOpts {
    std::string config_path;
    std::string data_dir;
    std::vector<std::string> records;
    std::string csv_path;
    std::string annotations_path;
    double csv_rate = afdecg::kReferenceRateHz;
    int csv_column = 0;
    int csv_header_rows = 0;
    int level = -1;           // -1: take from config
    int rings = -1;
    int lead = -1;
    bool two_lead = false;
    int jobs = 0;             // 0: take from config
};

void add_common_flags(CLI::App* cmd, CommonOpts& o, bool multi_record) {
    cmd->add_option("--config", o.config_path, "pipeline configuration file (JSON)");
    cmd->add_option("--data-dir", o.data_dir,
                    "database directory (overrides config and AFD_ECG_DATA_DIR)");
    if (multi_record)
        cmd->add_option("--record", o.records, "record id (repeatable)");
    else
        cmd->add_option("--record", o.records, "record id")->expected(0, 1);
    cmd->add_option("--csv", o.csv_path, "single-lead CSV record instead of --record");
    cmd->add_option("--annotations", o.annotations_path,
                    "beat annotations for --csv (sample_index,symbol lines)");
    cmd->add_option("--rate", o.csv_rate, "sample rate of the CSV record (Hz)");
    cmd->add_option("--column", o.csv_column, "CSV column holding the samples");
    cmd->add_option("--header-rows", o.csv_header_rows, "CSV header rows to skip");
    cmd->add_option("--level", o.level, "decomposition level N");
    cmd->add_option("--rings", o.rings, "radius rings in the pole-search grid");
    cmd->add_option("--lead", o.lead, "lead index (0 or 1)");
    cmd->add_flag("--two-lead", o.two_lead, "use both leads (38 features)");
    cmd->add_option("--jobs", o.jobs, "worker threads across beats");
}

PipelineConfig effective_config(const CommonOpts& o) {
    PipelineConfig cfg;
    if (!o.config_path.empty()) cfg = afdecg::load_pipeline_config(o.config_path);
    if (!o.data_dir.empty()) cfg.data_dir = o.data_dir;
    else if (cfg.data_dir.empty())
        if (const char* env = std::getenv("AFD_ECG_DATA_DIR")) cfg.data_dir = env;
    if (o.level >= 0) cfg.afd_level = o.level;
    if (o.rings >= 0) cfg.grid_rings = o.rings;
    if (o.lead >= 0) cfg.lead = o.lead;
    if (o.two_lead) cfg.two_lead = true;
    if (o.jobs > 0) cfg.jobs = o.jobs;
    cfg.validate();
    return cfg;
}

LoadedRecord load_csv_based_record(const CommonOpts& o) {
    if (o.annotations_path.empty())
        throw ValidationError("--csv requires --annotations");
    afdecg::CsvSpec spec;
    spec.sample_rate = o.csv_rate;
    spec.column = o.csv_column;
    spec.header_rows = o.csv_header_rows;
    spec.record_id = fs::path(o.csv_path).stem().string();
    afdecg::RawRecord raw = afdecg::read_csv_record(o.csv_path, spec);
    std::vector<afdecg::BeatAnnotation> beats = afdecg::read_annotation_csv(o.annotations_path);

    LoadedRecord rec;
    rec.record_id = raw.record_id;
    afdecg::ResampleResult r = afdecg::resample(raw, afdecg::kReferenceRateHz);
    const long new_len = static_cast<long>(r.record.samples.size());
    for (afdecg::BeatAnnotation& beat : beats) {
        beat.sample_index = afdecg::resample_annotation_index(beat.sample_index, r.up, r.down);
        beat.sample_index = std::min(beat.sample_index, new_len - 1);
    }
    rec.leads.push_back(std::move(r.record));
    rec.beats = std::move(beats);
    return rec;
}

std::vector<LoadedRecord> load_input_records(const CommonOpts& o, const PipelineConfig& cfg) {
    std::vector<LoadedRecord> out;
    if (!o.csv_path.empty()) {
        if (!o.records.empty())
            throw ValidationError("--csv and --record are mutually exclusive");
        out.push_back(load_csv_based_record(o));
        return out;
    }
    if (o.records.empty())
        throw ValidationError("no input: pass --record (with a data directory) or --csv");
    if (cfg.data_dir.empty())
        throw ValidationError("no data directory: use --data-dir, config, or AFD_ECG_DATA_DIR");
    for (const std::string& id : o.records)
        out.push_back(afdecg::load_wfdb_record_resampled(cfg.data_dir, id,
                                                         cfg.checksum_hard_fail));
    return out;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';
}

// Beat selectors: "all", a single index "7", or a half-open range "2:9".
std::pair<long, long> parse_beat_range(const std::string& text, long n_beats) {
    if (text == "all") return {0, n_beats};
    const auto colon = text.find(':');
    try {
        if (colon == std::string::npos) {
            const long i = std::stol(text);
            return {i, i + 1};
        }
        return {std::stol(text.substr(0, colon)), std::stol(text.substr(colon + 1))};
    } catch (const std::exception&) {
        throw ValidationError("malformed --beats selector '" + text + "'");
    }
}

AssemblyOptions assembly_options(const PipelineConfig& cfg, int drop_first, int drop_last) {
    AssemblyOptions a;
    a.level = cfg.afd_level;
    a.grid_rings = cfg.grid_rings;
    a.pole_radius_max = cfg.pole_radius_max;
    a.drop_first = drop_first;
    a.drop_last = drop_last;
    a.two_lead = cfg.two_lead;
    a.lead = cfg.lead;
    a.jobs = cfg.jobs;
    return a;
}

void print_assembly_summary(std::ostream& out, const afdecg::AssemblyCounts& c,
                            double residual_mean, double residual_max) {
    out << "beats: " << c.annotations << " annotated, " << c.kept << " kept ("
        << "N=" << c.per_class[0] << " S=" << c.per_class[1]
        << " V=" << c.per_class[2] << " F=" << c.per_class[3] << ")\n";
    out << "dropped: " << c.dropped_first << " leading, " << c.dropped_last
        << " trailing, " << c.dropped_edge << " at record edges, " << c.dropped_q
        << " class Q, " << c.dropped_degenerate << " degenerate\n";
    out << "residual energy after decomposition: mean " << residual_mean
        << ", max " << residual_max << " (relative)\n";
}

int cmd_decompose(const CommonOpts& o, const std::string& beats_sel,
                  const std::string& output_dir) {
    const PipelineConfig cfg = effective_config(o);
    const std::vector<LoadedRecord> records = load_input_records(o, cfg);
    fs::create_directories(output_dir);
    const afdecg::SearchGrid grid = afdecg::SearchGrid::uniform(
        cfg.grid_rings, cfg.pole_radius_max, afdecg::kSegmentLength);

    long written = 0;
    for (const LoadedRecord& rec : records) {
        print_warnings(rec.warnings);
        const int lead = cfg.two_lead ? 0 : cfg.lead;
        const afdecg::SegmentationResult segs = segment(rec.leads.at(lead), rec.beats);
        const auto [lo, hi] = parse_beat_range(beats_sel,
                                               static_cast<long>(rec.beats.size()));
        if (lo < 0 || hi > static_cast<long>(rec.beats.size()) || lo >= hi)
            throw ValidationError("beat range [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + ") out of bounds for " +
                                  std::to_string(rec.beats.size()) + " beats");
        for (long i = lo; i < hi; ++i) {
            const auto it = std::find_if(segs.segments.begin(), segs.segments.end(),
                                         [&](const afdecg::HeartbeatSegment& s) {
                                             return s.beat_index == i;
                                         });
            if (it == segs.segments.end()) {
                std::cerr << "warning: beat " << i << " of " << rec.record_id
                          << " too close to a record edge; skipped\n";
                continue;
            }
            afdecg::RealSignal s(it->samples.begin(), it->samples.end());
            const afdecg::ComplexSignal s_plus = afdecg::analytic_signal(s);
            const afdecg::AFDDecomposition d = afdecg::decompose(
                s_plus, cfg.afd_level, grid, true, afdecg::mean_coefficient(s));
            const fs::path out_path = fs::path(output_dir) /
                (rec.record_id + "_beat" + std::to_string(i) + ".json");
            atomic_write(out_path.string(), afdecg::decomposition_to_json(d) + "\n");
            ++written;
        }
    }
    std::cout << "wrote " << written << " decomposition files to " << output_dir << '\n';
    return 0;
}

int cmd_features(const CommonOpts& o, const std::string& split_side,
                 const std::string& split_path, const std::string& output) {
    PipelineConfig cfg = effective_config(o);
    int drop_first = 10, drop_last = 1;
    std::vector<LoadedRecord> records;
    if (!split_side.empty()) {
        const std::string sp = split_path.empty() ? cfg.split_file : split_path;
        if (sp.empty()) throw ValidationError("--split-side requires a split file");
        const afdecg::SplitSpec spec = afdecg::load_split_spec(sp);
        drop_first = spec.drop_first;
        drop_last = spec.drop_last;
        std::vector<std::string> ids;
        if (split_side == "ds1") ids = spec.ds1_records;
        else if (split_side == "ds2") ids = spec.ds2_records;
        else throw ValidationError("--split-side must be ds1 or ds2");
        if (cfg.data_dir.empty())
            throw ValidationError("no data directory: use --data-dir, config, or AFD_ECG_DATA_DIR");
        for (const std::string& id : ids)
            records.push_back(afdecg::load_wfdb_record_resampled(cfg.data_dir, id,
                                                                 cfg.checksum_hard_fail));
    } else {
        records = load_input_records(o, cfg);
    }

    std::vector<BeatFeatures> rows;
    afdecg::AssemblyCounts counts;
    double res_mean_sum = 0.0, res_max = 0.0;
    long assembled_records = 0;
    for (const LoadedRecord& rec : records) {
        print_warnings(rec.warnings);
        AssembledBeats batch = assemble_beats(rec, assembly_options(cfg, drop_first, drop_last));
        print_warnings(batch.warnings);
        counts.add(batch.counts);
        res_mean_sum += batch.residual_rel_mean;
        res_max = std::max(res_max, batch.residual_rel_max);
        ++assembled_records;
        rows.insert(rows.end(), std::make_move_iterator(batch.rows.begin()),
                    std::make_move_iterator(batch.rows.end()));
    }
    if (rows.empty()) throw ValidationError("no beats survived assembly");

    std::ostringstream ss;
    afdecg::write_feature_matrix(ss, rows);
    atomic_write(output, ss.str());
    print_assembly_summary(std::cout, counts,
                           assembled_records ? res_mean_sum / assembled_records : 0.0,
                           res_max);
    std::cout << "wrote " << rows.size() << " feature rows to " << output << '\n';
    return 0;
}

std::vector<afdecg::SVMParams> default_search_grid(const afdecg::SVMParams& base) {
    std::vector<afdecg::SVMParams> grid;
    for (double c : {1.0, 2.8, 3.0, 10.0})
        for (double s : {0.0003, 0.0005, 0.0006, 0.001}) {
            afdecg::SVMParams p = base;
            p.C = c;
            p.sigma = s;
            grid.push_back(p);
        }
    return grid;
}

int cmd_train(const CommonOpts& o, const std::string& split_path,
              const std::string& output, bool grid_search, bool augment_sv) {
    PipelineConfig cfg = effective_config(o);
    if (augment_sv) cfg.augment_sv = true;
    const std::string sp = split_path.empty() ? cfg.split_file : split_path;
    if (sp.empty()) throw ValidationError("training needs a split file (--split or config)");
    if (cfg.data_dir.empty())
        throw ValidationError("no data directory: use --data-dir, config, or AFD_ECG_DATA_DIR");
    const std::string model_path = output.empty() ? cfg.model_file : output;
    if (model_path.empty())
        throw ValidationError("training needs a model output path (--output or config)");

    const afdecg::SplitSpec spec = afdecg::load_split_spec(sp);
    const std::string split_hash = afdecg::fnv1a64_hex(afdecg::fnv1a64_file(sp));
    std::cout << "split: " << sp << " (fnv1a64 " << split_hash << ")\n";

    std::vector<BeatFeatures> rows;
    afdecg::AssemblyCounts counts;
    double res_mean_sum = 0.0, res_max = 0.0;
    for (const std::string& id : spec.ds1_records) {
        const LoadedRecord rec = afdecg::load_wfdb_record_resampled(
            cfg.data_dir, id, cfg.checksum_hard_fail);
        print_warnings(rec.warnings);
        AssembledBeats batch =
            assemble_beats(rec, assembly_options(cfg, spec.drop_first, spec.drop_last));
        print_warnings(batch.warnings);
        counts.add(batch.counts);
        res_mean_sum += batch.residual_rel_mean;
        res_max = std::max(res_max, batch.residual_rel_max);
        rows.insert(rows.end(), std::make_move_iterator(batch.rows.begin()),
                    std::make_move_iterator(batch.rows.end()));
    }
    std::cout << "training set (DS1, " << spec.ds1_records.size() << " records):\n";
    print_assembly_summary(std::cout, counts,
                           spec.ds1_records.empty()
                               ? 0.0
                               : res_mean_sum / static_cast<double>(spec.ds1_records.size()),
                           res_max);

    if (cfg.augment_sv) {
        AssemblyOptions sv_opts = assembly_options(cfg, spec.drop_first, spec.drop_last);
        sv_opts.s_class_only = true;
        if (!cfg.two_lead) sv_opts.lead = cfg.sv_lead;
        long added = 0;
        for (const std::string& id : afdecg::list_sv_records(cfg.data_dir)) {
            const LoadedRecord rec = afdecg::load_wfdb_record_resampled(
                cfg.data_dir, id, cfg.checksum_hard_fail);
            AssembledBeats batch = assemble_beats(rec, sv_opts);
            added += static_cast<long>(batch.rows.size());
            rows.insert(rows.end(), std::make_move_iterator(batch.rows.begin()),
                        std::make_move_iterator(batch.rows.end()));
        }
        std::cout << "augmentation: added " << added << " S-class beats\n";
    }

    afdecg::SVMParams params = cfg.svm;
    if (grid_search) {
        const auto grid = default_search_grid(cfg.svm);
        const afdecg::GridSearchResult gs =
            afdecg::grid_search_cv(rows, grid, 10, cfg.seed);
        params = gs.best;
        std::cout << "grid search (seed " << gs.seed << "): selected C=" << params.C
                  << " sigma=" << params.sigma << '\n';
        for (std::size_t i = 0; i < grid.size(); ++i)
            std::cout << "  C=" << grid[i].C << " sigma=" << grid[i].sigma
                      << " macro-Se=" << gs.scores[i] << '\n';
    }

    const afdecg::TrainedModel model = afdecg::train_ovo(rows, params);
    if (model.degenerate_pairs > 0)
        std::cerr << "warning: " << model.degenerate_pairs
                  << " class pairs had a missing class (constant voters)\n";
    if (model.any_nonconverged)
        std::cerr << "warning: at least one pairwise solver hit its iteration cap\n";

    const std::string tmp = model_path + ".tmp";
    afdecg::save_model(model, tmp);
    std::error_code ec;
    fs::rename(tmp, model_path, ec);
    if (ec) throw IoError("cannot move " + tmp + " to " + model_path + ": " + ec.message());
    std::cout << "wrote model to " << model_path << '\n';
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& features_path,
                const std::string& output) {
    const afdecg::TrainedModel model = afdecg::load_model(model_path);
    std::ifstream in(features_path);
    if (!in) throw IoError("cannot open features file: " + features_path);
    const std::vector<BeatFeatures> rows = afdecg::read_feature_matrix(in);
    if (rows.empty()) throw ValidationError("features file has no rows");

    std::ostringstream out;
    out << "record_id\tbeat_index\tref_class\tpredicted_class\n";
    long correct = 0;
    for (const BeatFeatures& row : rows) {
        const afdecg::AAMIClass pred = afdecg::predict(model, row.values);
        if (pred == row.ref_class) ++correct;
        out << row.record_id << '\t' << row.beat_index << '\t'
            << afdecg::aami_class_char(row.ref_class) << '\t'
            << afdecg::aami_class_char(pred) << '\n';
    }
    if (output.empty() || output == "-") std::cout << out.str();
    else {
        atomic_write(output, out.str());
        std::cout << "wrote " << rows.size() << " predictions to " << output << '\n';
    }
    std::cerr << "agreement with reference labels: " << correct << "/" << rows.size()
              << '\n';
    return 0;
}

int cmd_evaluate(const CommonOpts& o, const std::string& model_path,
                 const std::string& split_path, const std::string& features_path,
                 const std::string& output) {
    PipelineConfig cfg = effective_config(o);
    const std::string mp = model_path.empty() ? cfg.model_file : model_path;
    if (mp.empty()) throw ValidationError("evaluation needs a model (--model or config)");
    const afdecg::TrainedModel model = afdecg::load_model(mp);

    afdecg::ReportMetadata meta;
    meta.model_path = mp;
    meta.seed = cfg.seed;

    std::vector<BeatFeatures> rows;
    if (!features_path.empty()) {
        std::ifstream in(features_path);
        if (!in) throw IoError("cannot open features file: " + features_path);
        rows = afdecg::read_feature_matrix(in);
        meta.notes.push_back("evaluated from precomputed features: " + features_path);
    } else {
        const std::string sp = split_path.empty() ? cfg.split_file : split_path;
        if (sp.empty()) throw ValidationError("evaluation needs a split file (--split or config)");
        if (cfg.data_dir.empty())
            throw ValidationError("no data directory: use --data-dir, config, or AFD_ECG_DATA_DIR");
        const afdecg::SplitSpec spec = afdecg::load_split_spec(sp);
        meta.split_path = sp;
        meta.split_hash = afdecg::fnv1a64_hex(afdecg::fnv1a64_file(sp));
        afdecg::AssemblyCounts counts;
        for (const std::string& id : spec.ds2_records) {
            const LoadedRecord rec = afdecg::load_wfdb_record_resampled(
                cfg.data_dir, id, cfg.checksum_hard_fail);
            print_warnings(rec.warnings);
            AssembledBeats batch =
                assemble_beats(rec, assembly_options(cfg, spec.drop_first, spec.drop_last));
            print_warnings(batch.warnings);
            counts.add(batch.counts);
            rows.insert(rows.end(), std::make_move_iterator(batch.rows.begin()),
                        std::make_move_iterator(batch.rows.end()));
        }
        meta.notes.push_back("DS2 beats kept " + std::to_string(counts.kept) + " of " +
                             std::to_string(counts.annotations) + " annotated (dropped " +
                             std::to_string(counts.dropped_first) + " leading, " +
                             std::to_string(counts.dropped_last) + " trailing, " +
                             std::to_string(counts.dropped_edge) + " edge, " +
                             std::to_string(counts.dropped_q) + " class Q, " +
                             std::to_string(counts.dropped_degenerate) + " degenerate)");
    }
    if (rows.empty()) throw ValidationError("no beats to evaluate");

    std::vector<afdecg::AAMIClass> refs, preds;
    refs.reserve(rows.size());
    for (const BeatFeatures& row : rows) refs.push_back(row.ref_class);
    preds = afdecg::predict_batch(model, rows);

    const afdecg::ConfusionMatrix cm = afdecg::confusion(refs, preds);
    const afdecg::Metrics m = afdecg::metrics(cm);
    {
        std::ostringstream delta;
        delta.setf(std::ios::fixed);
        delta.precision(2);
        delta << "accuracy delta vs " << kBenchmarkAccuracy * 100.0
              << "% reference: " << (m.accuracy - kBenchmarkAccuracy) * 100.0 << " pp";
        meta.notes.push_back(delta.str());
    }
    std::cout << afdecg::render_report_text(cm, m, meta);
    if (!output.empty()) {
        atomic_write(output, afdecg::render_report_json(cm, m, meta));
        std::cout << "wrote report to " << output << '\n';
    }
    return 0;
}

int cmd_tfr_export(const CommonOpts& o, long beat_index, int bins, double fmax,
                   const std::string& output) {
    const PipelineConfig cfg = effective_config(o);
    const std::vector<LoadedRecord> records = load_input_records(o, cfg);
    if (records.size() != 1)
        throw ValidationError("tfr-export works on exactly one record");
    const LoadedRecord& rec = records[0];
    print_warnings(rec.warnings);

    const int lead = cfg.two_lead ? 0 : cfg.lead;
    const afdecg::SegmentationResult segs = segment(rec.leads.at(lead), rec.beats);
    if (beat_index < 0 || beat_index >= static_cast<long>(rec.beats.size()))
        throw ValidationError("beat index " + std::to_string(beat_index) +
                              " out of range for " + std::to_string(rec.beats.size()) +
                              " beats");
    const auto it = std::find_if(segs.segments.begin(), segs.segments.end(),
                                 [&](const afdecg::HeartbeatSegment& s) {
                                     return s.beat_index == beat_index;
                                 });
    if (it == segs.segments.end())
        throw ValidationError("beat " + std::to_string(beat_index) +
                              " is too close to a record edge");

    const afdecg::SearchGrid grid = afdecg::SearchGrid::uniform(
        cfg.grid_rings, cfg.pole_radius_max, afdecg::kSegmentLength);
    afdecg::RealSignal s(it->samples.begin(), it->samples.end());
    const afdecg::ComplexSignal s_plus = afdecg::analytic_signal(s);
    const afdecg::AFDDecomposition d = afdecg::decompose(
        s_plus, cfg.afd_level, grid, true, afdecg::mean_coefficient(s));

    afdecg::TFRBinSpec bin_spec;
    bin_spec.bins = bins;
    bin_spec.hi = fmax;
    const afdecg::TFRGrid tfr_grid = afdecg::tfr(d, bin_spec);

    json j;
    j["format"] = "afdecg-tfr";
    j["version"] = 1;
    j["record_id"] = rec.record_id;
    j["beat_index"] = beat_index;
    j["ref_class"] = std::string(1, afdecg::aami_class_char(it->ref_class));
    j["grid_len"] = d.grid_len;
    j["sample_rate_hz"] = afdecg::kReferenceRateHz;
    j["times"] = tfr_grid.times;
    // Frequency axis in cycles per segment period; multiply by rate/grid_len for Hz.
    j["freq_bin_edges"] = tfr_grid.bin_edges;
    std::vector<double> hz_edges(tfr_grid.bin_edges.size());
    for (std::size_t i = 0; i < hz_edges.size(); ++i)
        hz_edges[i] = tfr_grid.bin_edges[i] * afdecg::kReferenceRateHz / d.grid_len;
    j["freq_bin_edges_hz"] = hz_edges;
    json rows_json = json::array();
    for (int t = 0; t < d.grid_len; ++t) {
        json row = json::array();
        for (int f = 0; f < tfr_grid.freq_bins(); ++f) row.push_back(tfr_grid.at(t, f));
        rows_json.push_back(row);
    }
    j["energy"] = rows_json;
    j["clamped_deposits"] = tfr_grid.clamped;
    atomic_write(output, j.dump(2) + "\n");
    std::cout << "wrote TFR grid (" << d.grid_len << " x " << tfr_grid.freq_bins()
              << ") to " << output << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive Fourier decomposition ECG heartbeat classifier"};
    app.require_subcommand(1);

    CommonOpts dec_o;
    std::string dec_beats = "all", dec_output = ".";
    CLI::App* dec = app.add_subcommand("decompose", "decompose beats into pole/coefficient files");
    add_common_flags(dec, dec_o, true);
    dec->add_option("--beats", dec_beats, "beat selector: all, INDEX, or LO:HI");
    dec->add_option("--output", dec_output, "output directory");

    CommonOpts feat_o;
    std::string feat_side, feat_split, feat_output;
    CLI::App* feat = app.add_subcommand("features", "extract per-beat feature rows");
    add_common_flags(feat, feat_o, true);
    feat->add_option("--split-side", feat_side, "assemble a whole split side: ds1 or ds2");
    feat->add_option("--split", feat_split, "split file (with --split-side)");
    feat->add_option("--output", feat_output, "output feature matrix (TSV)")->required();

    CommonOpts train_o;
    std::string train_split, train_output;
    bool train_gs = false, train_aug = false;
    CLI::App* train = app.add_subcommand("train", "train the classifier on the DS1 side");
    add_common_flags(train, train_o, false);
    train->add_option("--split", train_split, "split file");
    train->add_option("--output", train_output, "model output path");
    train->add_flag("--grid-search", train_gs, "10-fold CV over the built-in grid first");
    train->add_flag("--augment-sv", train_aug, "add S-class beats from the svdb/ records");

    std::string pred_model, pred_features, pred_output;
    CLI::App* pred = app.add_subcommand("predict", "predict classes for a feature matrix");
    pred->add_option("--model", pred_model, "model file")->required();
    pred->add_option("--features", pred_features, "feature matrix (TSV)")->required();
    pred->add_option("--output", pred_output, "predictions output (TSV), default stdout");

    CommonOpts eval_o;
    std::string eval_model, eval_split, eval_features, eval_output;
    CLI::App* eva = app.add_subcommand("evaluate", "evaluate a model on the DS2 side");
    add_common_flags(eva, eval_o, false);
    eva->add_option("--model", eval_model, "model file");
    eva->add_option("--split", eval_split, "split file");
    eva->add_option("--features", eval_features, "precomputed feature matrix instead of records");
    eva->add_option("--output", eval_output, "JSON report output path");

    CommonOpts tfr_o;
    long tfr_beat = 0;
    int tfr_bins = 128;
    double tfr_fmax = 10.0;
    std::string tfr_output;
    CLI::App* tfr = app.add_subcommand("tfr-export", "export a beat's time-frequency grid");
    add_common_flags(tfr, tfr_o, false);
    tfr->add_option("--beat", tfr_beat, "annotation index of the beat")->required();
    tfr->add_option("--bins", tfr_bins, "frequency bins");
    tfr->add_option("--fmax", tfr_fmax, "top of the frequency axis (cycles per period)");
    tfr->add_option("--output", tfr_output, "output grid path (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (dec->parsed()) return cmd_decompose(dec_o, dec_beats, dec_output);
        if (feat->parsed()) return cmd_features(feat_o, feat_side, feat_split, feat_output);
        if (train->parsed())
            return cmd_train(train_o, train_split, train_output, train_gs, train_aug);
        if (pred->parsed()) return cmd_predict(pred_model, pred_features, pred_output);
        if (eva->parsed())
            return cmd_evaluate(eval_o, eval_model, eval_split, eval_features, eval_output);
        if (tfr->parsed())
            return cmd_tfr_export(tfr_o, tfr_beat, tfr_bins, tfr_fmax, tfr_output);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
