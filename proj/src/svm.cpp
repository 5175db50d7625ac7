// Weighted soft-margin RBF SVM trained by SMO.
//
//   dual:      max  sum a_i - 1/2 sum a_i a_j y_i y_j K(x_i,x_j)
//              s.t. 0 <= a_i <= box_i,  sum a_i y_i = 0
//   selection: maximal violating pair over
//              I_up  = {y=+1, a<box} u {y=-1, a>0}
//              I_low = {y=+1, a>0}   u {y=-1, a<box}
//              using F_i = sum_j a_j y_j K_ij - y_i; stop when
//              max_{I_low} F - min_{I_up} F <= tol
//   update:    Platt's two-variable step with per-sample boxes, bias from
//              the midpoint of the final [max_low, min_up] interval
//
// Rounding can pin the maximal pair against its box (alpha sums absorbing
// the box bound), so a blocked step falls back to the most violating
// partner that still moves; only when no violating pair moves does the
// solver stop, reporting nonconvergence if the gap is still above tol.

#include "afdecg/svm.hpp"
#include "afdecg/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <list>
#include <random>
#include <unordered_map>

namespace afdecg {

namespace {

using json = nlohmann::ordered_json;

constexpr double kEtaFloor = 1e-12;

// Rows of the kernel matrix on demand, bounded by an LRU byte budget.
class KernelCache {
public:
    KernelCache(const std::vector<std::vector<double>>& X, double sigma,
                std::size_t cache_mb)
        : X_(X), sigma_(sigma) {
        const std::size_t row_bytes = X.size() * sizeof(double);
        max_rows_ = std::max<std::size_t>(2, cache_mb * 1024 * 1024 / std::max<std::size_t>(row_bytes, 1));
    }

    const std::vector<double>& row(int i) {
        auto it = rows_.find(i);
        if (it != rows_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second.second);
            return it->second.first;
        }
        if (rows_.size() >= max_rows_) {
            rows_.erase(lru_.back());
            lru_.pop_back();
        }
        std::vector<double> r(X_.size());
        for (std::size_t j = 0; j < X_.size(); ++j)
            r[j] = rbf_kernel(X_[i], X_[j], sigma_);
        lru_.push_front(i);
        auto [pos, inserted] = rows_.emplace(i, std::pair{std::move(r), lru_.begin()});
        return pos->second.first;
    }

private:
    const std::vector<std::vector<double>>& X_;
    double sigma_;
    std::size_t max_rows_;
    std::list<int> lru_;
    std::unordered_map<int, std::pair<std::vector<double>, std::list<int>::iterator>> rows_;
};

// Deterministic Fisher-Yates; std::shuffle's draws vary across standard
// library implementations.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng() % i]);
}

} // namespace

void SVMParams::validate() const {
    if (!(C > 0.0)) throw ValidationError("C must be positive");
    if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
    for (double w : class_weights)
        if (!(w > 0.0)) throw ValidationError("class weights must be positive");
}

double rbf_kernel(const std::vector<double>& x, const std::vector<double>& y,
                  double sigma) {
    if (x.size() != y.size())
        throw ValidationError("kernel dimension mismatch: " + std::to_string(x.size()) +
                              " vs " + std::to_string(y.size()));
    if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        d2 += d * d;
    }
    return std::exp(-d2 / (2.0 * sigma * sigma));
}

double BinaryModel::decision(const std::vector<double>& x) const {
    double sum = bias;
    for (std::size_t i = 0; i < support_vectors.size(); ++i)
        sum += dual_coefs[i] * rbf_kernel(support_vectors[i], x, sigma);
    return sum;
}

BinaryModel train_binary(const std::vector<std::vector<double>>& X,
                         const std::vector<int>& y,
                         const std::vector<double>& box,
                         double sigma,
                         const TrainOptions& opts) {
    const std::size_t n = X.size();
    if (n == 0) throw ValidationError("empty training set");
    if (y.size() != n || box.size() != n)
        throw ValidationError("X, y, box lengths disagree");
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (y[i] == 1) has_pos = true;
        else if (y[i] == -1) has_neg = true;
        else throw ValidationError("labels must be +1 or -1");
        if (!(box[i] > 0.0)) throw ValidationError("box bounds must be positive");
        for (double v : X[i])
            if (!std::isfinite(v)) throw ValidationError("non-finite feature value");
    }
    if (!has_pos || !has_neg) throw ValidationError("both labels must be present");

    KernelCache cache(X, sigma, opts.cache_mb);
    std::vector<double> alpha(n, 0.0);
    std::vector<double> F(n);
    for (std::size_t i = 0; i < n; ++i) F[i] = -static_cast<double>(y[i]);

    const std::size_t max_iter =
        opts.max_iter > 0 ? opts.max_iter : std::max<std::size_t>(10000, 100 * n);

    BinaryModel model;
    model.sigma = sigma;
    model.converged = false;

    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        int i_up = -1, i_low = -1;
        double f_up = std::numeric_limits<double>::infinity();
        double f_low = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const bool in_up = (y[t] == 1 && alpha[t] < box[t]) || (y[t] == -1 && alpha[t] > 0.0);
            const bool in_low = (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < box[t]);
            if (in_up && F[t] < f_up) { f_up = F[t]; i_up = static_cast<int>(t); }
            if (in_low && F[t] > f_low) { f_low = F[t]; i_low = static_cast<int>(t); }
        }
        gap = f_low - f_up;
        if (gap <= opts.tol) {
            model.converged = true;
            break;
        }

        // Clamped change of alpha[second] when paired with first; Kfirst is
        // the cached row of first. The RBF diagonal is exactly 1, so eta
        // needs no further kernel rows.
        auto step_for = [&](int first, int second, const std::vector<double>& Kfirst) {
            double eta = Kfirst[first] + 1.0 - 2.0 * Kfirst[second];
            if (eta < kEtaFloor) eta = kEtaFloor;
            double lo, hi;
            if (y[first] != y[second]) {
                lo = std::max(0.0, alpha[second] - alpha[first]);
                hi = std::min(box[second], box[first] + alpha[second] - alpha[first]);
            } else {
                lo = std::max(0.0, alpha[first] + alpha[second] - box[first]);
                hi = std::min(box[second], alpha[first] + alpha[second]);
            }
            const double target =
                alpha[second] + y[second] * (F[first] - F[second]) / eta;
            return std::clamp(target, lo, hi) - alpha[second];
        };

        int i = i_up, j = i_low;
        double dj = step_for(i, j, cache.row(i));
        if (dj == 0.0) {
            // The worst pair is pinned by rounding; take the most violating
            // partner of i_up that still moves, then of i_low.
            j = -1;
            double violation = opts.tol;
            const std::vector<double>& Kup = cache.row(i_up);
            for (std::size_t t = 0; t < n; ++t) {
                const bool in_low =
                    (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < box[t]);
                if (!in_low || static_cast<int>(t) == i_up) continue;
                if (F[t] - F[i_up] <= violation) continue;
                if (step_for(i_up, static_cast<int>(t), Kup) == 0.0) continue;
                violation = F[t] - F[i_up];
                j = static_cast<int>(t);
            }
            if (j >= 0) {
                dj = step_for(i, j, Kup);
            } else {
                i = -1;
                violation = opts.tol;
                const std::vector<double>& Klow = cache.row(i_low);
                for (std::size_t t = 0; t < n; ++t) {
                    const bool in_up =
                        (y[t] == 1 && alpha[t] < box[t]) || (y[t] == -1 && alpha[t] > 0.0);
                    if (!in_up || static_cast<int>(t) == i_low) continue;
                    if (F[i_low] - F[t] <= violation) continue;
                    if (step_for(i_low, static_cast<int>(t), Klow) == 0.0) continue;
                    violation = F[i_low] - F[t];
                    i = static_cast<int>(t);
                }
                if (i < 0) break;  // genuine stall; final_gap reports the shortfall
                j = i;
                i = i_low;
                dj = step_for(i, j, Klow);
            }
        }

        const std::vector<double>& Ki = cache.row(i);
        const std::vector<double>& Kj = cache.row(j);
        const double di = -static_cast<double>(y[i] * y[j]) * dj;
        alpha[i] += di;
        alpha[j] += dj;
        for (std::size_t t = 0; t < n; ++t)
            F[t] += di * y[i] * Ki[t] + dj * y[j] * Kj[t];
    }
    model.final_gap = gap;

    // Bias from the final feasibility interval for -b.
    double f_up = std::numeric_limits<double>::infinity();
    double f_low = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
        const bool in_up = (y[t] == 1 && alpha[t] < box[t]) || (y[t] == -1 && alpha[t] > 0.0);
        const bool in_low = (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < box[t]);
        if (in_up) f_up = std::min(f_up, F[t]);
        if (in_low) f_low = std::max(f_low, F[t]);
    }
    if (std::isfinite(f_up) && std::isfinite(f_low)) model.bias = -(f_up + f_low) / 2.0;
    else if (std::isfinite(f_up)) model.bias = -f_up;
    else model.bias = -f_low;

    for (std::size_t t = 0; t < n; ++t)
        if (alpha[t] > 0.0) {
            model.support_vectors.push_back(X[t]);
            model.dual_coefs.push_back(alpha[t] * y[t]);
        }
    return model;
}

TrainedModel train_ovo(const std::vector<BeatFeatures>& rows,
                       const SVMParams& params,
                       const TrainOptions& opts) {
    params.validate();
    if (rows.empty()) throw ValidationError("empty training set");
    for (const BeatFeatures& row : rows) class_index(row.ref_class);

    TrainedModel model;
    model.params = params;
    model.norm = fit_normalization(rows);
    const std::size_t base = feature_names().size();
    if (model.norm.mean.size() % base != 0)
        throw ValidationError("feature dimension is not a multiple of " +
                              std::to_string(base));
    model.feature_order = feature_column_names(model.norm.mean.size() / base);

    std::vector<std::vector<double>> normalized(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        normalized[i] = apply_normalization(model.norm, rows[i].values);

    for (int a = 0; a < kNumClasses; ++a) {
        for (int b = a + 1; b < kNumClasses; ++b) {
            std::vector<std::vector<double>> X;
            std::vector<int> y;
            std::vector<double> box;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const int c = class_index(rows[i].ref_class);
                if (c != a && c != b) continue;
                X.push_back(normalized[i]);
                y.push_back(c == a ? 1 : -1);
                box.push_back(params.C * params.class_weights[c]);
            }
            const bool have_a = std::find(y.begin(), y.end(), 1) != y.end();
            const bool have_b = std::find(y.begin(), y.end(), -1) != y.end();
            BinaryModel pair;
            if (have_a && have_b) {
                pair = train_binary(X, y, box, params.sigma, opts);
                if (!pair.converged) model.any_nonconverged = true;
            } else {
                pair.degenerate = true;
                pair.constant_class = have_b ? b : a;
                pair.sigma = params.sigma;
                ++model.degenerate_pairs;
            }
            pair.class_a = a;
            pair.class_b = b;
            model.pairs.push_back(std::move(pair));
        }
    }
    return model;
}

AAMIClass predict(const TrainedModel& model, const std::vector<double>& raw_features) {
    if (raw_features.size() != model.norm.mean.size())
        throw ValidationError("feature dimension " + std::to_string(raw_features.size()) +
                              " does not match model dimension " +
                              std::to_string(model.norm.mean.size()));
    const std::vector<double> x = apply_normalization(model.norm, raw_features);
    std::array<int, kNumClasses> votes{};
    std::array<double, kNumClasses> margins{};
    for (const BinaryModel& pair : model.pairs) {
        if (pair.degenerate) {
            ++votes[pair.constant_class];
            continue;
        }
        const double d = pair.decision(x);
        const int winner = d >= 0.0 ? pair.class_a : pair.class_b;
        ++votes[winner];
        margins[winner] += std::abs(d);
    }
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c)
        if (votes[c] > votes[best] ||
            (votes[c] == votes[best] && margins[c] > margins[best]))
            best = c;
    return class_from_index(best);
}

std::vector<AAMIClass> predict_batch(const TrainedModel& model,
                                     const std::vector<BeatFeatures>& rows) {
    std::vector<AAMIClass> out;
    out.reserve(rows.size());
    for (const BeatFeatures& row : rows) out.push_back(predict(model, row.values));
    return out;
}

GridSearchResult grid_search_cv(const std::vector<BeatFeatures>& rows,
                                const std::vector<SVMParams>& grid,
                                int folds,
                                unsigned seed,
                                const TrainOptions& opts) {
    if (grid.empty()) throw ValidationError("empty parameter grid");
    if (folds < 2) throw ValidationError("need at least 2 folds");
    if (rows.empty()) throw ValidationError("empty training set");

    // Record-stratified folds: whole recordings are assigned round-robin
    // after a seeded shuffle, so no recording straddles folds.
    std::vector<std::string> record_ids;
    std::unordered_map<std::string, int> fold_of;
    for (const BeatFeatures& row : rows)
        if (fold_of.emplace(row.record_id, -1).second)
            record_ids.push_back(row.record_id);
    std::mt19937 rng(seed);
    deterministic_shuffle(record_ids, rng);
    for (std::size_t k = 0; k < record_ids.size(); ++k)
        fold_of[record_ids[k]] = static_cast<int>(k % folds);

    GridSearchResult result;
    result.seed = seed;
    double best_score = -1.0;
    for (const SVMParams& params : grid) {
        params.validate();
        double score_sum = 0.0;
        int scored_folds = 0;
        for (int f = 0; f < folds; ++f) {
            std::vector<BeatFeatures> train, test;
            for (const BeatFeatures& row : rows)
                (fold_of[row.record_id] == f ? test : train).push_back(row);
            if (test.empty() || train.empty()) continue;
            bool two_classes = false;
            for (std::size_t i = 1; i < train.size(); ++i)
                if (train[i].ref_class != train[0].ref_class) { two_classes = true; break; }
            if (!two_classes) continue;

            const TrainedModel m = train_ovo(train, params, opts);
            std::array<long, kNumClasses> correct{}, total{};
            for (const BeatFeatures& row : test) {
                const int ref = class_index(row.ref_class);
                ++total[ref];
                if (predict(m, row.values) == row.ref_class) ++correct[ref];
            }
            double se_sum = 0.0;
            int present = 0;
            for (int c = 0; c < kNumClasses; ++c)
                if (total[c] > 0) {
                    se_sum += static_cast<double>(correct[c]) / static_cast<double>(total[c]);
                    ++present;
                }
            if (present == 0) continue;
            score_sum += se_sum / present;
            ++scored_folds;
        }
        if (scored_folds == 0)
            throw ValidationError("no scorable folds; too few records or classes");
        const double score = score_sum / scored_folds;
        result.scores.push_back(score);

        const bool tie = std::abs(score - best_score) <= 1e-12;
        const bool better =
            score > best_score + 1e-12 ||
            (tie && (params.C < result.best.C ||
                     (params.C == result.best.C && params.sigma < result.best.sigma)));
        if (result.scores.size() == 1 || better) {
            best_score = std::max(best_score, score);
            result.best = params;
        }
    }
    return result;
}

namespace {

json pair_to_json(const BinaryModel& pair) {
    json j;
    j["class_a"] = std::string(1, aami_class_char(class_from_index(pair.class_a)));
    j["class_b"] = std::string(1, aami_class_char(class_from_index(pair.class_b)));
    j["degenerate"] = pair.degenerate;
    if (pair.degenerate)
        j["constant_class"] =
            std::string(1, aami_class_char(class_from_index(pair.constant_class)));
    j["bias"] = pair.bias;
    j["sigma"] = pair.sigma;
    j["converged"] = pair.converged;
    j["final_gap"] = pair.final_gap;
    j["dual_coefs"] = pair.dual_coefs;
    j["support_vectors"] = pair.support_vectors;
    return j;
}

BinaryModel pair_from_json(const json& j) {
    BinaryModel pair;
    pair.class_a = class_index(aami_class_from_char(j.at("class_a").get<std::string>().at(0)));
    pair.class_b = class_index(aami_class_from_char(j.at("class_b").get<std::string>().at(0)));
    pair.degenerate = j.at("degenerate").get<bool>();
    if (pair.degenerate)
        pair.constant_class =
            class_index(aami_class_from_char(j.at("constant_class").get<std::string>().at(0)));
    pair.bias = j.at("bias").get<double>();
    pair.sigma = j.at("sigma").get<double>();
    pair.converged = j.at("converged").get<bool>();
    pair.final_gap = j.at("final_gap").get<double>();
    pair.dual_coefs = j.at("dual_coefs").get<std::vector<double>>();
    pair.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
    if (pair.dual_coefs.size() != pair.support_vectors.size())
        throw ValidationError("model file: coefficient/support-vector count mismatch");
    return pair;
}

} // namespace

void save_model(const TrainedModel& model, const std::string& path) {
    json j;
    j["format"] = "afdecg-model";
    j["version"] = 1;
    j["feature_order"] = model.feature_order;
    j["params"]["C"] = model.params.C;
    j["params"]["sigma"] = model.params.sigma;
    j["params"]["class_weights"] = model.params.class_weights;
    j["normalization"]["mean"] = model.norm.mean;
    j["normalization"]["stddev"] = model.norm.stddev;
    j["normalization"]["constant_features"] = model.norm.constant_features;
    j["degenerate_pairs"] = model.degenerate_pairs;
    j["any_nonconverged"] = model.any_nonconverged;
    json pairs = json::array();
    for (const BinaryModel& pair : model.pairs) pairs.push_back(pair_to_json(pair));
    j["pairs"] = pairs;

    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing model file: " + path);
}

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("malformed model file " + path + ": " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "afdecg-model")
            throw ValidationError("not a model file: " + path);
        if (j.at("version").get<int>() != 1)
            throw ValidationError("unsupported model version in " + path);

        TrainedModel model;
        model.feature_order = j.at("feature_order").get<std::vector<std::string>>();
        const std::size_t base = feature_names().size();
        if (model.feature_order.size() % base != 0 ||
            model.feature_order != feature_column_names(model.feature_order.size() / base))
            throw ValidationError("model feature order does not match this build: " + path);

        model.params.C = j.at("params").at("C").get<double>();
        model.params.sigma = j.at("params").at("sigma").get<double>();
        const auto w = j.at("params").at("class_weights").get<std::vector<double>>();
        if (w.size() != kNumClasses)
            throw ValidationError("model file: expected 4 class weights");
        std::copy(w.begin(), w.end(), model.params.class_weights.begin());
        model.params.validate();

        model.norm.mean = j.at("normalization").at("mean").get<std::vector<double>>();
        model.norm.stddev = j.at("normalization").at("stddev").get<std::vector<double>>();
        model.norm.constant_features = j.at("normalization").at("constant_features").get<int>();
        if (model.norm.mean.size() != model.feature_order.size() ||
            model.norm.stddev.size() != model.feature_order.size())
            throw ValidationError("model file: normalization dimension mismatch");

        model.degenerate_pairs = j.at("degenerate_pairs").get<int>();
        model.any_nonconverged = j.at("any_nonconverged").get<bool>();
        for (const json& pj : j.at("pairs")) model.pairs.push_back(pair_from_json(pj));
        if (model.pairs.size() != 6)
            throw ValidationError("model file: expected 6 pairwise models");
        for (const BinaryModel& pair : model.pairs)
            for (const std::vector<double>& sv : pair.support_vectors)
                if (sv.size() != model.norm.mean.size())
                    throw ValidationError("model file: support-vector dimension mismatch");
        return model;
    } catch (const json::exception& e) {
        throw ValidationError("malformed model file " + path + ": " + e.what());
    }
}

} // namespace afdecg
