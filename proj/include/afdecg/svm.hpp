#pragma once

#include "afdecg/features.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace afdecg {

struct SVMParams {
    double C = 3.0;
    double sigma = 0.0006;
    std::array<double, kNumClasses> class_weights{0.42, 36.0, 2.5, 1.79};

    void validate() const;  // all fields strictly positive
};

struct TrainOptions {
    double tol = 1e-3;           // KKT violation gap at termination
    std::size_t max_iter = 0;    // 0 = max(10000, 100 * n)
    std::size_t cache_mb = 64;   // kernel-row LRU cache bound
};

double rbf_kernel(const std::vector<double>& x, const std::vector<double>& y,
                  double sigma);

struct BinaryModel {
    int class_a = 0;                       // +1 label, class index
    int class_b = 0;                       // -1 label
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> dual_coefs;        // alpha_i * y_i, nonzero entries only
    double bias = 0.0;
    double sigma = 1.0;
    bool converged = true;
    bool degenerate = false;               // a pair class was absent
    int constant_class = -1;               // vote emitted when degenerate
    double final_gap = 0.0;                // KKT violation at termination

    double decision(const std::vector<double>& x) const;
};

// SMO over the weighted soft-margin dual; box[i] is the per-sample upper
// bound C * weight(class of i). Selection picks the maximal violating pair.
BinaryModel train_binary(const std::vector<std::vector<double>>& X,
                         const std::vector<int>& y,
                         const std::vector<double>& box,
                         double sigma,
                         const TrainOptions& opts = {});

struct TrainedModel {
    SVMParams params;
    NormalizationStats norm;
    std::vector<std::string> feature_order;  // frozen at training time
    std::vector<BinaryModel> pairs;          // 6, in (N,S),(N,V),(N,F),(S,V),(S,F),(V,F) order
    int degenerate_pairs = 0;
    bool any_nonconverged = false;
};

// Raw (unnormalized) rows; normalization is fit here and stored in the model.
TrainedModel train_ovo(const std::vector<BeatFeatures>& rows,
                       const SVMParams& params,
                       const TrainOptions& opts = {});

// Majority vote over the 6 pairwise decisions; ties fall to the larger summed
// absolute margin, then to class order N < S < V < F.
AAMIClass predict(const TrainedModel& model, const std::vector<double>& raw_features);
std::vector<AAMIClass> predict_batch(const TrainedModel& model,
                                     const std::vector<BeatFeatures>& rows);

struct GridSearchResult {
    SVMParams best;
    std::vector<double> scores;       // mean macro sensitivity per grid point
    unsigned seed = 0;
};

// Record-stratified k-fold CV maximizing mean macro-averaged sensitivity;
// ties prefer smaller C, then smaller sigma.
GridSearchResult grid_search_cv(const std::vector<BeatFeatures>& rows,
                                const std::vector<SVMParams>& grid,
                                int folds = 10,
                                unsigned seed = 0,
                                const TrainOptions& opts = {});

void save_model(const TrainedModel& model, const std::string& path);
// Rejects files whose stored feature order disagrees with the current one.
TrainedModel load_model(const std::string& path);

} // namespace afdecg
