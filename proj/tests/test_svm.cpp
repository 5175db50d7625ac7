#include "afdecg/errors.hpp"
#include "afdecg/svm.hpp"

#include "doctest.h"

#ifdef AFDECG_HAVE_EIGEN
#include <Eigen/Dense>
#endif

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

using namespace afdecg;

namespace {

// The pipeline's feature rows are 19-dimensional; synthetic 2-D problems
// ride in the first two slots with zeros elsewhere, which normalization
// passes through untouched.
std::vector<double> embed(double x0, double x1) {
    std::vector<double> v(19, 0.0);
    v[0] = x0;
    v[1] = x1;
    return v;
}

struct Blobs {
    std::vector<BeatFeatures> train, test;
};

// Four well-separated Gaussian clusters, one per class.
Blobs make_blobs(unsigned seed, int train_per_class, int test_per_class,
                 double spread = 1.0) {
    const double cx[] = {0.0, 10.0, 0.0, 10.0};
    const double cy[] = {0.0, 0.0, 10.0, 10.0};
    std::mt19937 rng(seed);
    std::normal_distribution<double> noise(0.0, spread);
    Blobs blobs;
    for (int c = 0; c < kNumClasses; ++c) {
        for (int i = 0; i < train_per_class + test_per_class; ++i) {
            BeatFeatures row;
            row.record_id = "rec" + std::to_string(i % 12);
            row.beat_index = i;
            row.ref_class = class_from_index(c);
            row.values = embed(cx[c] + noise(rng), cy[c] + noise(rng));
            (i < train_per_class ? blobs.train : blobs.test).push_back(std::move(row));
        }
    }
    return blobs;
}

double accuracy(const TrainedModel& model, const std::vector<BeatFeatures>& rows) {
    long correct = 0;
    for (const BeatFeatures& row : rows)
        if (predict(model, row.values) == row.ref_class) ++correct;
    return static_cast<double>(correct) / static_cast<double>(rows.size());
}

double class_recall(const TrainedModel& model, const std::vector<BeatFeatures>& rows,
                    AAMIClass cls) {
    long correct = 0, total = 0;
    for (const BeatFeatures& row : rows) {
        if (row.ref_class != cls) continue;
        ++total;
        if (predict(model, row.values) == cls) ++correct;
    }
    REQUIRE(total > 0);
    return static_cast<double>(correct) / static_cast<double>(total);
}

// Independent optimality check: rebuild alpha per training point by
// matching support vectors, then recompute the violating-pair gap from
// the model's own decision values.
double recomputed_kkt_gap(const BinaryModel& model,
                          const std::vector<std::vector<double>>& X,
                          const std::vector<int>& y,
                          const std::vector<double>& box) {
    std::vector<double> alpha(X.size(), 0.0);
    double alpha_dot_y = 0.0;
    for (std::size_t s = 0; s < model.support_vectors.size(); ++s) {
        bool matched = false;
        for (std::size_t i = 0; i < X.size(); ++i)
            if (X[i] == model.support_vectors[s]) {
                alpha[i] = std::abs(model.dual_coefs[s]);
                CHECK(alpha[i] <= box[i] * (1.0 + 1e-9));
                CHECK((model.dual_coefs[s] > 0 ? 1 : -1) == y[i]);
                matched = true;
                break;
            }
        REQUIRE(matched);
        alpha_dot_y += model.dual_coefs[s];
    }
    CHECK(std::abs(alpha_dot_y) < 1e-9); // equality constraint sum a_i y_i = 0

    double f_up = std::numeric_limits<double>::infinity();
    double f_low = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double f = model.decision(X[i]) - model.bias - y[i];
        const bool in_up = (y[i] == 1 && alpha[i] < box[i]) || (y[i] == -1 && alpha[i] > 0.0);
        const bool in_low = (y[i] == 1 && alpha[i] > 0.0) || (y[i] == -1 && alpha[i] < box[i]);
        if (in_up) f_up = std::min(f_up, f);
        if (in_low) f_low = std::max(f_low, f);
    }
    return f_low - f_up;
}

} // namespace

TEST_CASE("rbf kernel values") {
    CHECK(rbf_kernel({1.0, -2.0}, {1.0, -2.0}, 0.3) == doctest::Approx(1.0));
    // Distance 5, sigma 5: exp(-25/50).
    CHECK(rbf_kernel({0.0, 0.0}, {3.0, 4.0}, 5.0) ==
          doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK(rbf_kernel({0.0}, {1.0}, 2.0) == rbf_kernel({1.0}, {0.0}, 2.0));
    CHECK_THROWS_AS((void)rbf_kernel({1.0}, {1.0, 2.0}, 1.0), ValidationError);
    CHECK_THROWS_AS((void)rbf_kernel({1.0}, {2.0}, 0.0), ValidationError);
}

#ifdef AFDECG_HAVE_EIGEN
TEST_CASE("rbf gram matrices are positive semidefinite") {
    std::mt19937 rng(17);
    std::normal_distribution<double> gauss(0.0, 2.0);
    const int n = 40, dim = 5;
    std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
    for (auto& p : pts)
        for (auto& v : p) v = gauss(rng);

    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) K(i, j) = rbf_kernel(pts[i], pts[j], 1.3);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(K);
    CHECK(solver.eigenvalues().minCoeff() > -1e-10);
}
#endif

TEST_CASE("binary training solves xor") {
    const std::vector<std::vector<double>> X{{0.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}, {1.0, 0.0}};
    const std::vector<int> y{1, 1, -1, -1};
    const std::vector<double> box(4, 10.0);
    const BinaryModel model = train_binary(X, y, box, 0.5);
    CHECK(model.converged);
    for (std::size_t i = 0; i < X.size(); ++i)
        CHECK(model.decision(X[i]) * y[i] > 0.0);
}

TEST_CASE("binary training satisfies the kkt conditions") {
    std::mt19937 rng(23);
    std::normal_distribution<double> noise(0.0, 1.2);
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    std::vector<double> box;
    for (int i = 0; i < 120; ++i) {
        const bool pos = i % 2 == 0;
        X.push_back({(pos ? 2.0 : -2.0) + noise(rng), noise(rng)});
        y.push_back(pos ? 1 : -1);
        box.push_back(pos ? 4.0 : 2.5); // asymmetric per-sample bounds
    }
    TrainOptions opts;
    opts.tol = 1e-4;
    const BinaryModel model = train_binary(X, y, box, 1.0, opts);
    CHECK(model.converged);
    CHECK(model.final_gap <= opts.tol);
    CHECK(recomputed_kkt_gap(model, X, y, box) <= opts.tol + 1e-9);
}

TEST_CASE("binary training input validation") {
    const std::vector<std::vector<double>> X{{0.0}, {1.0}};
    CHECK_THROWS_AS((void)train_binary({}, {}, {}, 1.0), ValidationError);
    CHECK_THROWS_AS((void)train_binary(X, {1}, {1.0, 1.0}, 1.0), ValidationError);
    CHECK_THROWS_AS((void)train_binary(X, {1, 0}, {1.0, 1.0}, 1.0), ValidationError);
    CHECK_THROWS_AS((void)train_binary(X, {1, 1}, {1.0, 1.0}, 1.0), ValidationError);
    CHECK_THROWS_AS((void)train_binary(X, {1, -1}, {1.0, 0.0}, 1.0), ValidationError);
    CHECK_THROWS_AS((void)train_binary({{0.0}, {1.0 / 0.0}}, {1, -1}, {1.0, 1.0}, 1.0),
                    ValidationError);
}

TEST_CASE("one-vs-one classifier separates four blobs") {
    const Blobs blobs = make_blobs(2030, 60, 40);
    SVMParams params;
    params.C = 10.0;
    params.sigma = 1.0;
    params.class_weights = {1.0, 1.0, 1.0, 1.0};
    const TrainedModel model = train_ovo(blobs.train, params);
    CHECK(model.degenerate_pairs == 0);
    CHECK_FALSE(model.any_nonconverged);
    REQUIRE(model.pairs.size() == 6);
    CHECK(model.pairs[0].class_a == 0); // (N,S)
    CHECK(model.pairs[0].class_b == 1);
    CHECK(model.pairs[5].class_a == 2); // (V,F)
    CHECK(model.pairs[5].class_b == 3);

    CHECK(accuracy(model, blobs.train) >= 0.99);
    CHECK(accuracy(model, blobs.test) >= 0.95);

    CHECK_THROWS_AS((void)predict(model, std::vector<double>(3, 0.0)), ValidationError);
}

TEST_CASE("training order does not change predictions") {
    Blobs blobs = make_blobs(814, 40, 25);
    SVMParams params;
    params.C = 10.0;
    params.sigma = 1.0;
    params.class_weights = {1.0, 1.0, 1.0, 1.0};
    const TrainedModel a = train_ovo(blobs.train, params);

    std::mt19937 rng(5);
    std::shuffle(blobs.train.begin(), blobs.train.end(), rng);
    const TrainedModel b = train_ovo(blobs.train, params);

    for (const BeatFeatures& row : blobs.test)
        CHECK(predict(a, row.values) == predict(b, row.values));
}

TEST_CASE("raising a minority weight does not lower its recall") {
    // Class S heavily overlaps the much larger class N; V and F sit far
    // away so only the (N,S) boundary is in play.
    std::mt19937 rng(61);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<BeatFeatures> rows;
    auto add = [&](AAMIClass cls, double cx, double cy, int count, double spread) {
        for (int i = 0; i < count; ++i) {
            BeatFeatures row;
            row.record_id = "w" + std::to_string(i % 6);
            row.ref_class = cls;
            row.values = embed(cx + noise(rng) * spread, cy + noise(rng) * spread);
            rows.push_back(std::move(row));
        }
    };
    add(AAMIClass::N, 0.0, 0.0, 300, 1.0);
    add(AAMIClass::S, 2.5, 0.0, 30, 1.0);
    add(AAMIClass::V, 9.0, 9.0, 40, 0.3);
    add(AAMIClass::F, -9.0, 9.0, 40, 0.3);

    auto recall_with_weight = [&](double w) {
        SVMParams params;
        params.C = 2.0;
        params.sigma = 0.5;
        params.class_weights = {1.0, w, 1.0, 1.0};
        return class_recall(train_ovo(rows, params), rows, AAMIClass::S);
    };
    const double low = recall_with_weight(1.0);
    const double high = recall_with_weight(10.0);
    CHECK(high >= low);
    CHECK(low < 0.999);  // the boundary genuinely moves
    CHECK(high > 0.5);
}

TEST_CASE("missing classes degrade to constant voters") {
    std::vector<BeatFeatures> rows;
    std::mt19937 rng(3);
    std::normal_distribution<double> noise(0.0, 0.5);
    for (int i = 0; i < 30; ++i) {
        BeatFeatures row;
        row.record_id = "d";
        row.ref_class = (i % 2 == 0) ? AAMIClass::N : AAMIClass::V;
        const double c = (i % 2 == 0) ? 0.0 : 8.0;
        row.values = embed(c + noise(rng), noise(rng));
        rows.push_back(std::move(row));
    }
    SVMParams params;
    params.C = 5.0;
    params.sigma = 1.0;
    params.class_weights = {1.0, 1.0, 1.0, 1.0};
    const TrainedModel model = train_ovo(rows, params);
    CHECK(model.degenerate_pairs == 5); // only (N,V) has both classes
    CHECK(predict(model, embed(0.0, 0.0)) == AAMIClass::N);
    CHECK(predict(model, embed(8.0, 0.0)) == AAMIClass::V);

    // Single-class input: every pair is constant and the majority falls to
    // that class.
    std::vector<BeatFeatures> only_n(rows.begin(), rows.begin() + 1);
    only_n[0].ref_class = AAMIClass::N;
    const TrainedModel constant = train_ovo(only_n, params);
    CHECK(constant.degenerate_pairs == 6);
    CHECK(predict(constant, embed(123.0, -42.0)) == AAMIClass::N);
}

TEST_CASE("grid search prefers smaller parameters on ties") {
    const Blobs blobs = make_blobs(77, 80, 0);
    std::vector<SVMParams> grid;
    for (double c : {1.0, 5.0}) {
        SVMParams p;
        p.C = c;
        p.sigma = 1.0;
        p.class_weights = {1.0, 1.0, 1.0, 1.0};
        grid.push_back(p);
    }
    // A kernel far too narrow to generalize scores below the separable pair.
    SVMParams narrow = grid[0];
    narrow.sigma = 1e-3;
    grid.push_back(narrow);

    const GridSearchResult result = grid_search_cv(blobs.train, grid, 4, 9);
    REQUIRE(result.scores.size() == 3);
    CHECK(result.scores[0] == doctest::Approx(1.0));
    CHECK(result.scores[1] == doctest::Approx(1.0));
    CHECK(result.scores[2] < result.scores[0]);
    CHECK(result.best.C == 1.0); // tie between C=1 and C=5 falls to smaller C
    CHECK(result.best.sigma == 1.0);
    CHECK(result.seed == 9);

    CHECK_THROWS_AS((void)grid_search_cv(blobs.train, {}, 4, 0), ValidationError);
    CHECK_THROWS_AS((void)grid_search_cv(blobs.train, grid, 1, 0), ValidationError);
    CHECK_THROWS_AS((void)grid_search_cv({}, grid, 4, 0), ValidationError);
}

TEST_CASE("model save load round trip") {
    const Blobs blobs = make_blobs(404, 30, 10);
    SVMParams params;
    params.C = 10.0;
    params.sigma = 1.0;
    params.class_weights = {1.0, 2.0, 3.0, 4.0};
    const TrainedModel model = train_ovo(blobs.train, params);

    const std::string path = "svm_roundtrip_tmp.json";
    save_model(model, path);
    const TrainedModel loaded = load_model(path);
    CHECK(loaded.params.C == model.params.C);
    CHECK(loaded.params.sigma == model.params.sigma);
    CHECK(loaded.params.class_weights == model.params.class_weights);
    CHECK(loaded.norm.mean == model.norm.mean);
    CHECK(loaded.norm.stddev == model.norm.stddev);
    CHECK(loaded.feature_order == model.feature_order);
    REQUIRE(loaded.pairs.size() == 6);
    for (const BeatFeatures& row : blobs.test)
        CHECK(predict(loaded, row.values) == predict(model, row.values));
    std::remove(path.c_str());

    CHECK_THROWS_AS((void)load_model("no_such_model.json"), IoError);
}

TEST_CASE("model files with a foreign feature order are rejected") {
    const Blobs blobs = make_blobs(505, 20, 0);
    SVMParams params;
    params.C = 5.0;
    params.sigma = 1.0;
    params.class_weights = {1.0, 1.0, 1.0, 1.0};
    const TrainedModel model = train_ovo(blobs.train, params);

    const std::string path = "svm_tamper_tmp.json";
    save_model(model, path);
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    const auto pos = text.find("rpeak_if_2");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 10, "mystery_ft");
    std::ofstream out(path);
    out << text;
    out.close();
    CHECK_THROWS_AS((void)load_model(path), ValidationError);
    std::remove(path.c_str());
}

TEST_CASE("parameter validation") {
    SVMParams params;
    params.C = 0.0;
    CHECK_THROWS_AS(params.validate(), ValidationError);
    params.C = 1.0;
    params.sigma = -1.0;
    CHECK_THROWS_AS(params.validate(), ValidationError);
    params.sigma = 1.0;
    params.class_weights[2] = 0.0;
    CHECK_THROWS_AS(params.validate(), ValidationError);
}
