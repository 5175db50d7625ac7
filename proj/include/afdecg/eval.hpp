#pragma once

#include "afdecg/features.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace afdecg {

// Rows are the reference class, columns the predicted class, order N,S,V,F.
struct ConfusionMatrix {
    std::array<std::array<long, kNumClasses>, kNumClasses> counts{};

    long row_sum(int k) const;
    long col_sum(int k) const;
    long trace() const;
    long total() const;
};

ConfusionMatrix confusion(const std::vector<AAMIClass>& refs,
                          const std::vector<AAMIClass>& preds);

struct Metrics {
    std::array<std::optional<double>, kNumClasses> sensitivity;  // diag / row sum
    std::array<std::optional<double>, kNumClasses> positive_predictivity;  // diag / col sum
    double accuracy = 0.0;                                           // trace / total
};

Metrics metrics(const ConfusionMatrix& cm);

struct SplitSpec {
    std::vector<std::string> ds1_records;
    std::vector<std::string> ds2_records;
    int drop_first = 10;
    int drop_last = 1;

    void validate() const;  // disjoint, non-empty sides, non-negative drops
    bool in_ds1(const std::string& record_id) const;
    bool in_ds2(const std::string& record_id) const;
};

SplitSpec load_split_spec(const std::string& path);

std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64_file(const std::string& path);
std::string fnv1a64_hex(std::uint64_t h);

struct ReportMetadata {
    std::string model_path;
    std::string split_path;
    std::string split_hash;   // hex fnv1a64 of the split file
    unsigned seed = 0;
    std::vector<std::string> notes;  // drop accounting, warnings
};

std::string render_report_text(const ConfusionMatrix& cm, const Metrics& m,
                               const ReportMetadata& meta);
std::string render_report_json(const ConfusionMatrix& cm, const Metrics& m,
                               const ReportMetadata& meta);

} // namespace afdecg
