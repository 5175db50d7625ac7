#include "afdecg/eval.hpp"
#include "afdecg/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace afdecg {

namespace {
using json = nlohmann::ordered_json;
}

long ConfusionMatrix::row_sum(int k) const {
    long s = 0;
    for (int l = 0; l < kNumClasses; ++l) s += counts[k][l];
    return s;
}

long ConfusionMatrix::col_sum(int k) const {
    long s = 0;
    for (int l = 0; l < kNumClasses; ++l) s += counts[l][k];
    return s;
}

long ConfusionMatrix::trace() const {
    long s = 0;
    for (int k = 0; k < kNumClasses; ++k) s += counts[k][k];
    return s;
}

long ConfusionMatrix::total() const {
    long s = 0;
    for (int k = 0; k < kNumClasses; ++k) s += row_sum(k);
    return s;
}

ConfusionMatrix confusion(const std::vector<AAMIClass>& refs,
                          const std::vector<AAMIClass>& preds) {
    if (refs.size() != preds.size())
        throw ValidationError("reference/prediction length mismatch: " +
                              std::to_string(refs.size()) + " vs " +
                              std::to_string(preds.size()));
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < refs.size(); ++i)
        ++cm.counts[class_index(refs[i])][class_index(preds[i])];
    return cm;
}

Metrics metrics(const ConfusionMatrix& cm) {
    const long total = cm.total();
    if (total <= 0) throw ValidationError("empty confusion matrix");
    for (int k = 0; k < kNumClasses; ++k)
        for (int l = 0; l < kNumClasses; ++l)
            if (cm.counts[k][l] < 0)
                throw ValidationError("negative confusion-matrix entry");
    Metrics m;
    for (int k = 0; k < kNumClasses; ++k) {
        const long rs = cm.row_sum(k);
        const long cs = cm.col_sum(k);
        if (rs > 0) m.sensitivity[k] = static_cast<double>(cm.counts[k][k]) / rs;
        if (cs > 0) m.positive_predictivity[k] = static_cast<double>(cm.counts[k][k]) / cs;
    }
    m.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
    return m;
}

void SplitSpec::validate() const {
    if (ds1_records.empty() || ds2_records.empty())
        throw ValidationError("both split sides must list records");
    if (drop_first < 0 || drop_last < 0)
        throw ValidationError("drop counts must be non-negative");
    std::set<std::string> seen;
    for (const std::string& r : ds1_records)
        if (!seen.insert(r).second)
            throw ValidationError("record listed twice in DS1: " + r);
    for (const std::string& r : ds2_records) {
        if (seen.count(r))
            throw ValidationError("record in both split sides or repeated: " + r);
        if (!seen.insert(r).second)
            throw ValidationError("record listed twice in DS2: " + r);
    }
}

bool SplitSpec::in_ds1(const std::string& record_id) const {
    return std::find(ds1_records.begin(), ds1_records.end(), record_id) != ds1_records.end();
}

bool SplitSpec::in_ds2(const std::string& record_id) const {
    return std::find(ds2_records.begin(), ds2_records.end(), record_id) != ds2_records.end();
}

SplitSpec load_split_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open split file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("malformed split file " + path + ": " + e.what());
    }
    SplitSpec spec;
    try {
        spec.ds1_records = j.at("ds1_records").get<std::vector<std::string>>();
        spec.ds2_records = j.at("ds2_records").get<std::vector<std::string>>();
        if (j.contains("drop_first")) spec.drop_first = j.at("drop_first").get<int>();
        if (j.contains("drop_last")) spec.drop_last = j.at("drop_last").get<int>();
    } catch (const json::exception& e) {
        throw ValidationError("malformed split file " + path + ": " + e.what());
    }
    spec.validate();
    return spec;
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file for hashing: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    return fnv1a64(bytes.data(), bytes.size());
}

std::string fnv1a64_hex(std::uint64_t h) {
    std::ostringstream ss;
    ss << std::hex << std::setfill('0') << std::setw(16) << h;
    return ss.str();
}

namespace {

std::string percent_or_na(const std::optional<double>& v) {
    if (!v) return "n/a";
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(2) << (*v * 100.0);
    return ss.str();
}

} // namespace

std::string render_report_text(const ConfusionMatrix& cm, const Metrics& m,
                               const ReportMetadata& meta) {
    static const char* names = "NSVF";
    std::ostringstream out;
    out << "confusion matrix (rows = reference, columns = predicted)\n";
    out << "      ";
    for (int l = 0; l < kNumClasses; ++l) out << std::setw(8) << names[l];
    out << '\n';
    for (int k = 0; k < kNumClasses; ++k) {
        out << "  " << names[k] << "   ";
        for (int l = 0; l < kNumClasses; ++l) out << std::setw(8) << cm.counts[k][l];
        out << '\n';
    }
    out << '\n' << "class   Se%      +P%\n";
    for (int k = 0; k < kNumClasses; ++k)
        out << "  " << names[k] << "   " << std::setw(7) << percent_or_na(m.sensitivity[k])
            << "  " << std::setw(7) << percent_or_na(m.positive_predictivity[k]) << '\n';
    out << '\n';
    out << "overall accuracy: " << std::fixed << std::setprecision(2)
        << m.accuracy * 100.0 << "%\n";
    out << "beats evaluated: " << cm.total() << '\n';
    if (!meta.model_path.empty()) out << "model: " << meta.model_path << '\n';
    if (!meta.split_path.empty())
        out << "split: " << meta.split_path << " (fnv1a64 " << meta.split_hash << ")\n";
    out << "seed: " << meta.seed << '\n';
    for (const std::string& note : meta.notes) out << "note: " << note << '\n';
    return out.str();
}

std::string render_report_json(const ConfusionMatrix& cm, const Metrics& m,
                               const ReportMetadata& meta) {
    static const char* names = "NSVF";
    json j;
    j["format"] = "afdecg-report";
    j["version"] = 1;
    j["class_order"] = {"N", "S", "V", "F"};
    json rows = json::array();
    for (int k = 0; k < kNumClasses; ++k) {
        json row = json::array();
        for (int l = 0; l < kNumClasses; ++l) row.push_back(cm.counts[k][l]);
        rows.push_back(row);
    }
    j["confusion"] = rows;
    for (int k = 0; k < kNumClasses; ++k) {
        const std::string c(1, names[k]);
        if (m.sensitivity[k]) j["sensitivity"][c] = *m.sensitivity[k];
        else j["sensitivity"][c] = nullptr;
        if (m.positive_predictivity[k]) j["positive_predictivity"][c] = *m.positive_predictivity[k];
        else j["positive_predictivity"][c] = nullptr;
    }
    j["accuracy"] = m.accuracy;
    j["beats_evaluated"] = cm.total();
    j["model"] = meta.model_path;
    j["split"] = meta.split_path;
    j["split_hash_fnv1a64"] = meta.split_hash;
    j["seed"] = meta.seed;
    j["notes"] = meta.notes;
    return j.dump(2) + "\n";
}

} // namespace afdecg
