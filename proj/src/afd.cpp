/*
 * Greedy adaptive decomposition over the Takenaka-Malmquist system.
 *
 * Each step picks the disk point a maximizing the energy gain
 * A(a) = (1-|a|^2) |G(a)|^2 of the current reduced remainder G, removes
 * the projection onto the evaluator at a, and maps the residue back to
 * the disk origin with the inverse Blaschke factor. The per-ring disk
 * evaluation runs as one inverse transform of the radius-weighted
 * spectrum, giving O(P log P) per ring.
 */

#include "afdecg/afd.hpp"

#include "afdecg/errors.hpp"
#include "fft.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace afdecg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTieRelTol = 1e-12;       // near-tie grouping for argmax
constexpr double kZeroEnergyAbs = 1e-24;   // below this the remainder counts as zero

std::complex<double> circle_point(int j, int m) {
    const double t = kTwoPi * static_cast<double>(j) / static_cast<double>(m);
    return {std::cos(t), std::sin(t)};
}

} // namespace

UnitDiskPoint make_unit_disk_point(std::complex<double> a, double r_max) {
    if (!(r_max > 0.0 && r_max < 1.0))
        throw ValidationError("unit disk point: r_max must lie in (0,1)");
    if (std::abs(a) > r_max)
        throw ValidationError("unit disk point: |a| exceeds radius ceiling");
    return UnitDiskPoint{a};
}

SearchGrid SearchGrid::uniform(int rings, double r_max, int signal_len) {
    if (rings < 2) throw ValidationError("search grid: need at least 2 rings");
    if (!(r_max > 0.0 && r_max < 1.0))
        throw ValidationError("search grid: r_max must lie in (0,1)");
    SearchGrid g;
    g.radii.resize(rings);
    for (int k = 0; k < rings; ++k)
        g.radii[k] = r_max * static_cast<double>(k) / static_cast<double>(rings - 1);
    g.phases_per_ring = static_cast<int>(detail::next_pow2(2 * static_cast<std::size_t>(signal_len)));
    return g;
}

void SearchGrid::validate(int signal_len) const {
    if (radii.empty() || radii.front() != 0.0)
        throw ValidationError("search grid: radii must start at 0");
    for (std::size_t k = 1; k < radii.size(); ++k)
        if (radii[k] <= radii[k - 1] || radii[k] >= 1.0)
            throw ValidationError("search grid: radii must be strictly increasing in [0,1)");
    if (phases_per_ring < signal_len)
        throw ValidationError("search grid: phases_per_ring must be >= signal length");
}

ComplexSignal evaluator(const UnitDiskPoint& a, int grid_len) {
    if (std::abs(a.value) >= 1.0) throw ValidationError("evaluator: |a| must be < 1");
    if (grid_len < 2) throw ValidationError("evaluator: grid too short");
    const double scale = std::sqrt(1.0 - std::norm(a.value));
    const std::complex<double> abar = std::conj(a.value);
    ComplexSignal out(grid_len);
    for (int j = 0; j < grid_len; ++j)
        out[j] = scale / (1.0 - abar * circle_point(j, grid_len));
    return out;
}

ComplexSignal tm_basis(const std::vector<UnitDiskPoint>& poles, int n, int grid_len) {
    if (n < 1 || n > static_cast<int>(poles.size()))
        throw ValidationError("tm_basis: component index out of range");
    ComplexSignal out = evaluator(poles[static_cast<std::size_t>(n) - 1], grid_len);
    for (int k = 0; k < n - 1; ++k) {
        const std::complex<double> a = poles[k].value;
        const std::complex<double> abar = std::conj(a);
        for (int j = 0; j < grid_len; ++j) {
            const std::complex<double> z = circle_point(j, grid_len);
            out[j] *= (z - a) / (1.0 - abar * z);
        }
    }
    return out;
}

namespace detail {

double evaluator_grid_norm(const UnitDiskPoint& a, int grid_len) {
    const double r2 = std::norm(a.value);
    const std::complex<double> abar = std::conj(a.value);
    double acc = 0.0;
    for (int j = 0; j < grid_len; ++j)
        acc += (1.0 - r2) / std::norm(1.0 - abar * circle_point(j, grid_len));
    return std::sqrt(acc / static_cast<double>(grid_len));
}

std::vector<std::complex<double>> nonneg_spectrum(const ComplexSignal& g) {
    const std::size_t m = g.size();
    auto spec = afdecg::detail::fft_forward(g);
    const std::size_t keep = m / 2 + 1; // bins 0..floor(M/2)
    spec.resize(keep);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (auto& v : spec) v *= inv_m;
    return spec;
}

} // namespace detail

PoleSelection next_pole(const ComplexSignal& remainder, const SearchGrid& grid) {
    const int m = static_cast<int>(remainder.size());
    if (m < 2) throw ValidationError("next_pole: remainder too short");
    grid.validate(m);
    if (energy(remainder) < kZeroEnergyAbs)
        throw ValidationError("next_pole: zero remainder, decomposition already exact");

    const auto coeffs = detail::nonneg_spectrum(remainder);
    const int p = grid.phases_per_ring;
    const int n_rings = static_cast<int>(grid.radii.size());

    // Pass 1: evaluate the gain everywhere and find the maximum.
    std::vector<std::vector<std::complex<double>>> ring_values(n_rings);
    std::vector<std::complex<double>> weighted(p);
    double best_gain = -1.0;
    for (int ri = 0; ri < n_rings; ++ri) {
        const double r = grid.radii[ri];
        std::fill(weighted.begin(), weighted.end(), std::complex<double>{0.0, 0.0});
        double rk = 1.0;
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
            weighted[k] = coeffs[k] * rk;
            rk *= r;
        }
        ring_values[ri] = afdecg::detail::fft_backward(weighted);
        const double one_minus_r2 = 1.0 - r * r;
        for (int pi = 0; pi < p; ++pi) {
            const double gain = one_minus_r2 * std::norm(ring_values[ri][pi]);
            if (gain > best_gain) best_gain = gain;
        }
    }

    // Pass 2: first grid point (radius-major, phase-minor) within the
    // near-tie band of the maximum.
    const double threshold = best_gain * (1.0 - kTieRelTol);
    for (int ri = 0; ri < n_rings; ++ri) {
        const double r = grid.radii[ri];
        const double one_minus_r2 = 1.0 - r * r;
        for (int pi = 0; pi < p; ++pi) {
            const double gain = one_minus_r2 * std::norm(ring_values[ri][pi]);
            if (gain >= threshold) {
                const double phi = kTwoPi * static_cast<double>(pi) / static_cast<double>(p);
                PoleSelection sel;
                sel.pole = UnitDiskPoint{std::polar(r, phi)};
                sel.coefficient = std::sqrt(one_minus_r2) * ring_values[ri][pi];
                sel.gain = gain;
                sel.radius_index = ri;
                sel.phase_index = pi;
                return sel;
            }
        }
    }
    throw ValidationError("next_pole: selection failed"); // unreachable
}

AFDDecomposition decompose(const ComplexSignal& s_plus, int level,
                           const SearchGrid& grid, bool force_first_pole_zero,
                           double c0) {
    const int m = static_cast<int>(s_plus.size());
    if (m < 4) throw ValidationError("decompose: signal too short");
    if (level < 1) throw ValidationError("decompose: level must be >= 1");
    if (level > kMaxDecompositionLevel)
        throw ValidationError("decompose: level exceeds maximum " +
                              std::to_string(kMaxDecompositionLevel));
    grid.validate(m);

    AFDDecomposition d;
    d.level = level;
    d.grid_len = m;
    d.c0 = c0;
    d.source_energy = energy(s_plus);
    if (d.source_energy < kZeroEnergyAbs)
        throw ValidationError("decompose: zero-energy input");
    d.residual_energies.push_back(d.source_energy);

    ComplexSignal g = s_plus;
    for (int n = 1; n <= level; ++n) {
        UnitDiskPoint a;
        const bool exhausted = energy(g) < kZeroEnergyAbs * d.source_energy ||
                               energy(g) < kZeroEnergyAbs;
        if ((n == 1 && force_first_pole_zero) || exhausted) {
            a = UnitDiskPoint{{0.0, 0.0}};
        } else {
            a = next_pole(g, grid).pole;
        }

        // Exact projection in the grid inner product: the evaluator is
        // normalized to unit discrete norm so each step removes exactly
        // |c_n|^2 of energy and the residual trace telescopes.
        ComplexSignal e = evaluator(a, m);
        const double nrm = detail::evaluator_grid_norm(a, m);
        for (auto& v : e) v /= nrm;
        const std::complex<double> c = inner_product(g, e);

        d.poles.push_back(a);
        d.coeffs.push_back(c);

        const std::complex<double> abar = std::conj(a.value);
        for (int j = 0; j < m; ++j) {
            const std::complex<double> z = circle_point(j, m);
            g[j] = (g[j] - c * e[j]) * (1.0 - abar * z) / (z - a.value);
        }
        d.residual_energies.push_back(energy(g));
    }
    return d;
}

Reconstruction reconstruct(const AFDDecomposition& d, int upto) {
    if (upto == -1) upto = d.level;
    if (upto < 1 || upto > d.level)
        throw ValidationError("reconstruct: level out of range");
    const int m = d.grid_len;
    Reconstruction rec;
    rec.analytic.assign(m, {0.0, 0.0});

    // Same grid-normalized basis as decompose, so the residual identity
    // ||s+ - analytic||= ||R_upto|| holds pointwise.
    ComplexSignal blaschke(m, {1.0, 0.0});
    for (int n = 1; n <= upto; ++n) {
        const UnitDiskPoint& a = d.poles[static_cast<std::size_t>(n) - 1];
        ComplexSignal e = evaluator(a, m);
        const double nrm = detail::evaluator_grid_norm(a, m);
        const std::complex<double> c = d.coeffs[static_cast<std::size_t>(n) - 1];
        for (int j = 0; j < m; ++j) rec.analytic[j] += c * (e[j] / nrm) * blaschke[j];

        const std::complex<double> abar = std::conj(a.value);
        for (int j = 0; j < m; ++j) {
            const std::complex<double> z = circle_point(j, m);
            blaschke[j] *= (z - a.value) / (1.0 - abar * z);
        }
    }
    rec.real.resize(m);
    for (int j = 0; j < m; ++j) rec.real[j] = 2.0 * rec.analytic[j].real() - d.c0;
    return rec;
}

double residual_energy(const AFDDecomposition& d, int n) {
    if (n < 0 || n > d.level)
        throw ValidationError("residual_energy: level out of range");
    return d.residual_energies[static_cast<std::size_t>(n)];
}

std::string decomposition_to_json(const AFDDecomposition& d) {
    nlohmann::json j;
    j["format"] = "afdecg-decomposition";
    j["version"] = 1;
    j["grid_len"] = d.grid_len;
    j["level"] = d.level;
    j["c0"] = d.c0;
    j["source_energy"] = d.source_energy;
    j["residual_energies"] = d.residual_energies;
    nlohmann::json poles = nlohmann::json::array();
    for (const auto& a : d.poles)
        poles.push_back({{"re", a.value.real()}, {"im", a.value.imag()}});
    j["poles"] = std::move(poles);
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& c : d.coeffs) coeffs.push_back({{"re", c.real()}, {"im", c.imag()}});
    j["coeffs"] = std::move(coeffs);
    return j.dump(2);
}

AFDDecomposition decomposition_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("decomposition parse: ") + e.what());
    }
    if (j.value("format", "") != "afdecg-decomposition")
        throw IoError("decomposition parse: unrecognized format tag");
    AFDDecomposition d;
    d.grid_len = j.at("grid_len").get<int>();
    d.level = j.at("level").get<int>();
    d.c0 = j.at("c0").get<double>();
    d.source_energy = j.at("source_energy").get<double>();
    d.residual_energies = j.at("residual_energies").get<std::vector<double>>();
    for (const auto& p : j.at("poles"))
        d.poles.push_back(
            UnitDiskPoint{{p.at("re").get<double>(), p.at("im").get<double>()}});
    for (const auto& c : j.at("coeffs"))
        d.coeffs.emplace_back(c.at("re").get<double>(), c.at("im").get<double>());
    if (static_cast<int>(d.poles.size()) != d.level ||
        static_cast<int>(d.coeffs.size()) != d.level ||
        static_cast<int>(d.residual_energies.size()) != d.level + 1)
        throw IoError("decomposition parse: inconsistent lengths");
    return d;
}

void save_decomposition(const AFDDecomposition& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << decomposition_to_json(d) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

AFDDecomposition load_decomposition(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decomposition_from_json(text);
}

} // namespace afdecg
