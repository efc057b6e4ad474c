#include "distinct/robustness.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "distinct/error.hpp"
#include "distinct/mmd.hpp"
#include "distinct/rng.hpp"

namespace distinct {

namespace {

double sorted_sum(std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

std::vector<double> centroid(const PointSet& points) {
    const std::size_t n = points.size();
    const std::size_t d = points.dim();
    std::vector<double> mean(d);
    std::vector<double> column(n);
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t i = 0; i < n; ++i) column[i] = points[i][k];
        mean[k] = sorted_sum(column) / static_cast<double>(n);
    }
    return mean;
}

}  // namespace

// ---------------------------------------------------------------------------

void ReducerSpec::validate(std::size_t input_dim, std::size_t count) const {
    if (target_dim == 0) throw InvalidArgument("reduction target dimension must be positive");
    if (target_dim > input_dim)
        throw InvalidArgument("reduction target " + std::to_string(target_dim) + " exceeds input dimension " +
                              std::to_string(input_dim));
    if (method == ReducerMethod::pca && target_dim >= count)
        throw InvalidArgument("pca target " + std::to_string(target_dim) + " must be below the pooled sample size " +
                              std::to_string(count));
}

PointSet PcaModel::transform(const PointSet& points) const {
    if (points.dim() != mean.size()) throw InvalidArgument("pca input dimension mismatch");
    PointSet out(points.size(), components.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto src = points[i];
        auto dst = out.row(i);
        for (std::size_t c = 0; c < components.size(); ++c) {
            auto axis = components[c];
            double s = 0.0;
            for (std::size_t k = 0; k < src.size(); ++k) s += (src[k] - mean[k]) * axis[k];
            dst[c] = s;
        }
    }
    return out;
}

PcaModel fit_pca(const PointSet& points, std::size_t target_dim) {
    const std::size_t n = points.size();
    const std::size_t d = points.dim();
    ReducerSpec{ReducerMethod::pca, target_dim}.validate(d, n);

    PcaModel model;
    model.mean = centroid(points);
    Eigen::MatrixXd centered(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k)
            centered(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = points[i][k] - model.mean[k];
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error("pca eigendecomposition failed");

    // Eigen returns ascending eigenvalues.
    const auto& values = solver.eigenvalues();
    const auto& vectors = solver.eigenvectors();
    for (Eigen::Index c = static_cast<Eigen::Index>(d) - 1; c >= 0; --c) model.eigenvalues.push_back(values(c));

    model.components = PointSet(target_dim, d);
    for (std::size_t c = 0; c < target_dim; ++c) {
        const Eigen::Index col = static_cast<Eigen::Index>(d - 1 - c);
        std::size_t arg = 0;
        for (std::size_t k = 1; k < d; ++k)
            if (std::abs(vectors(static_cast<Eigen::Index>(k), col)) >
                std::abs(vectors(static_cast<Eigen::Index>(arg), col)))
                arg = k;
        const double sign = vectors(static_cast<Eigen::Index>(arg), col) < 0.0 ? -1.0 : 1.0;
        auto axis = model.components.row(c);
        for (std::size_t k = 0; k < d; ++k) axis[k] = sign * vectors(static_cast<Eigen::Index>(k), col);
    }
    return model;
}

PointSet reduce(const PointSet& points, const ReducerSpec& spec, std::uint64_t /*seed*/) {
    spec.validate(points.dim(), points.size());
    if (spec.method == ReducerMethod::external) {
        if (spec.target_dim != points.dim())
            throw InvalidArgument("external reduction expects vectors already at the target dimension");
        return points;
    }
    return fit_pca(points, spec.target_dim).transform(points);
}

// ---------------------------------------------------------------------------

StabilityReport stability_analysis(const PointSet& x, const PointSet& y, const std::vector<std::size_t>& dims,
                                   std::size_t trials, std::size_t sample_size, const KernelSpec& spec,
                                   std::uint64_t seed, unsigned workers) {
    spec.validate();
    if (trials == 0) throw InvalidArgument("trial count must be positive");
    if (sample_size < 2) throw InvalidArgument("sample size must be at least 2");
    if (sample_size > x.size() || sample_size > y.size())
        throw InvalidArgument("sample size exceeds the available points");
    if (x.dim() != y.dim()) throw InvalidArgument("dimension mismatch between samples");
    for (std::size_t d : dims) ReducerSpec{ReducerMethod::pca, d}.validate(x.dim(), 2 * sample_size);

    std::vector<std::size_t> all_x(x.size());
    std::vector<std::size_t> all_y(y.size());
    std::iota(all_x.begin(), all_x.end(), std::size_t{0});
    std::iota(all_y.begin(), all_y.end(), std::size_t{0});

    std::vector<std::vector<double>> dev(trials, std::vector<double>(dims.size()));
    parallel_for(trials, workers, [&](std::size_t t) {
        Rng rng(derive_seed(seed, "stability", {t}));
        const PointSet xs = x.select(sample_without_replacement(all_x, sample_size, rng));
        const PointSet ys = y.select(sample_without_replacement(all_y, sample_size, rng));
        const PointSet pooled = PointSet::concat(xs, ys);
        std::vector<std::size_t> ix(sample_size);
        std::vector<std::size_t> iy(sample_size);
        std::iota(ix.begin(), ix.end(), std::size_t{0});
        std::iota(iy.begin(), iy.end(), sample_size);

        const double full = mmd_on_the_fly(resolve_bandwidth(spec, pooled), pooled, ix, iy);
        for (std::size_t di = 0; di < dims.size(); ++di) {
            const PointSet reduced = fit_pca(pooled, dims[di]).transform(pooled);
            const double approx = mmd_on_the_fly(resolve_bandwidth(spec, reduced), reduced, ix, iy);
            dev[t][di] = std::abs(full - approx);
        }
    });

    StabilityReport report;
    report.dims = dims;
    report.trials = trials;
    report.sample_size = sample_size;
    for (std::size_t di = 0; di < dims.size(); ++di) {
        double mean = 0.0;
        for (std::size_t t = 0; t < trials; ++t) mean += dev[t][di];
        mean /= static_cast<double>(trials);
        double ss = 0.0;
        for (std::size_t t = 0; t < trials; ++t) ss += (dev[t][di] - mean) * (dev[t][di] - mean);
        report.mean_abs_dev.push_back(mean);
        report.std_abs_dev.push_back(trials > 1 ? std::sqrt(ss / static_cast<double>(trials - 1)) : 0.0);
    }
    return report;
}

// ---------------------------------------------------------------------------

PerturbationBoundCheck check_perturbation_bound(const KernelMatrix& ideal, const KernelMatrix& approx,
                                                std::span<const std::size_t> idx_x,
                                                std::span<const std::size_t> idx_y) {
    if (ideal.size() != approx.size()) throw InvalidArgument("kernel matrices differ in shape");
    if (ideal.spec().family != approx.spec().family) throw InvalidArgument("kernel matrices differ in family");
    PerturbationBoundCheck check;
    const auto& a = ideal.values();
    const auto& b = approx.values();
    for (std::size_t i = 0; i < a.size(); ++i) check.epsilon = std::max(check.epsilon, std::abs(a[i] - b[i]));
    check.delta_mmd =
        std::abs(mmd_from_gram(approx, idx_x, idx_y).value - mmd_from_gram(ideal, idx_x, idx_y).value);
    check.bound = 4.0 * check.epsilon;
    check.bound_ok = check.delta_mmd <= check.bound + 1e-12;
    return check;
}

GaussianBoundCheck check_gaussian_distance_bound(const PointSet& ideal, const PointSet& approx, std::size_t m,
                                                 double sigma) {
    if (ideal.size() != approx.size()) throw InvalidArgument("point sets differ in size");
    if (m < 2 || ideal.size() < m + 2) throw InvalidArgument("need at least 2 points per group");
    if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
    GaussianBoundCheck check;
    check.sigma = sigma;
    const std::size_t total = ideal.size();
    for (std::size_t i = 0; i < total; ++i)
        for (std::size_t j = i + 1; j < total; ++j)
            check.eta = std::max(check.eta, std::abs(squared_distance(ideal[i], ideal[j]) -
                                                     squared_distance(approx[i], approx[j])));
    std::vector<std::size_t> ix(m);
    std::vector<std::size_t> iy(total - m);
    std::iota(ix.begin(), ix.end(), std::size_t{0});
    std::iota(iy.begin(), iy.end(), m);
    const KernelSpec spec = KernelSpec::rbf_fixed(sigma);
    check.delta_mmd = std::abs(mmd_on_the_fly(spec, approx, ix, iy) - mmd_on_the_fly(spec, ideal, ix, iy));
    check.bound = 2.0 * check.eta / (sigma * sigma);
    check.bound_ok = check.delta_mmd <= check.bound + 1e-12;
    return check;
}

// ---------------------------------------------------------------------------

std::string to_string(PerturbationKind kind) {
    return kind == PerturbationKind::gaussian_noise ? "gaussian_noise" : "grid_watermark";
}

void PerturbationSpec::validate() const {
    if (!(ratio > 0.0) || std::isnan(ratio)) throw InvalidArgument("perturbation ratio must be positive");
    if (kind == PerturbationKind::grid_watermark && grid_period < 2)
        throw InvalidArgument("watermark grid period must be at least 2");
}

double signal_sigma(const PointSet& points) {
    if (points.empty()) throw InvalidArgument("signal sigma of an empty set");
    const auto mean = centroid(points);
    std::vector<double> sq;
    sq.reserve(points.data().size());
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t k = 0; k < points.dim(); ++k) {
            const double dv = points[i][k] - mean[k];
            sq.push_back(dv * dv);
        }
    return std::sqrt(sorted_sum(sq) / static_cast<double>(sq.size()));
}

std::vector<double> signal_sigma_per_coordinate(const PointSet& points) {
    if (points.empty()) throw InvalidArgument("signal sigma of an empty set");
    const auto mean = centroid(points);
    std::vector<double> out(points.dim());
    std::vector<double> sq(points.size());
    for (std::size_t k = 0; k < points.dim(); ++k) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            const double dv = points[i][k] - mean[k];
            sq[i] = dv * dv;
        }
        out[k] = std::sqrt(sorted_sum(sq) / static_cast<double>(points.size()));
    }
    return out;
}

PointSet perturb(const PointSet& points, const PerturbationSpec& spec) {
    spec.validate();
    if (points.empty()) throw InvalidArgument("cannot perturb an empty set");
    const std::size_t d = points.dim();
    std::vector<double> scale(d);
    if (spec.per_coordinate_sigma) {
        scale = signal_sigma_per_coordinate(points);
    } else {
        std::fill(scale.begin(), scale.end(), signal_sigma(points));
    }
    for (double& s : scale) s /= spec.ratio;

    PointSet out = points;
    if (spec.kind == PerturbationKind::grid_watermark) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            auto row = out.row(i);
            for (std::size_t k = 0; k < d; k += spec.grid_period) row[k] += scale[k];
        }
        return out;
    }

    std::unordered_map<std::string, std::uint64_t> occurrences;
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto src = points[i];
        std::string key(reinterpret_cast<const char*>(src.data()), src.size() * sizeof(double));
        const std::uint64_t occurrence = occurrences[key]++;
        Rng rng(derive_seed(spec.seed, "perturb-noise", {hash_label(key), occurrence}));
        auto row = out.row(i);
        for (std::size_t k = 0; k < d; ++k) row[k] += scale[k] * rng.normal();
    }
    return out;
}

TestResult paired_perturbation_test(const PointSet& clean, const PerturbationSpec& perturbation,
                                    const KernelSpec& kernel, const TestConfig& cfg,
                                    const std::optional<ReducerSpec>& reducer) {
    if (clean.size() < 4) throw InvalidArgument("paired perturbation test needs at least 4 clean vectors");
    const PointSet perturbed = perturb(clean, perturbation);
    if (!reducer) return permutation_test(clean, perturbed, kernel, cfg);

    const PointSet reduced = reduce(PointSet::concat(clean, perturbed), *reducer);
    std::vector<std::size_t> ic(clean.size());
    std::vector<std::size_t> ip(perturbed.size());
    std::iota(ic.begin(), ic.end(), std::size_t{0});
    std::iota(ip.begin(), ip.end(), clean.size());
    return permutation_test(reduced.select(ic), reduced.select(ip), kernel, cfg);
}

// ---------------------------------------------------------------------------

std::string to_string(AblationMode mode) {
    switch (mode) {
        case AblationMode::kernel: return "kernel";
        case AblationMode::bandwidth: return "bandwidth";
        case AblationMode::dimensionality: return "dimensionality";
    }
    return "unknown";
}

std::vector<AblationSetting> kernel_ablation_settings() {
    return {{"rbf", KernelSpec::rbf_median(), std::nullopt}, {"linear", KernelSpec::linear(), std::nullopt}};
}

std::vector<AblationSetting> bandwidth_ablation_settings(const std::vector<double>& multipliers) {
    std::vector<AblationSetting> out;
    for (double m : multipliers) {
        std::ostringstream name;
        name << "sigma x" << m;
        out.push_back({name.str(), KernelSpec::rbf_scaled(m), std::nullopt});
    }
    return out;
}

std::vector<AblationSetting> dimensionality_ablation_settings(const std::vector<std::size_t>& dims,
                                                              const KernelSpec& kernel) {
    std::vector<AblationSetting> out;
    for (std::size_t d : dims) out.push_back({"d=" + std::to_string(d), kernel, ReducerSpec{ReducerMethod::pca, d}});
    return out;
}

AblationReport run_ablation(const GroupedDataset& ds, const std::string& a, const std::string& b, AblationMode mode,
                            const std::vector<AblationSetting>& settings, const std::vector<std::size_t>& sizes,
                            std::size_t trials, const TestConfig& cfg) {
    if (settings.empty()) throw InvalidArgument("ablation needs at least one setting");
    AblationReport report;
    report.mode = mode;
    for (const auto& setting : settings) {
        setting.kernel.validate();
        if (setting.reducer)
            for (std::size_t n : sizes) setting.reducer->validate(ds.table().dim(), 2 * n);
        PowerCurve curve = rejection_rate_curve_with(
            ds, a, b, sizes, trials, cfg, [&setting](const PointSet& x, const PointSet& y, const TestConfig& c) {
                if (!setting.reducer) return permutation_test(x, y, setting.kernel, c);
                const PointSet reduced = reduce(PointSet::concat(x, y), *setting.reducer);
                std::vector<std::size_t> ix(x.size());
                std::vector<std::size_t> iy(y.size());
                std::iota(ix.begin(), ix.end(), std::size_t{0});
                std::iota(iy.begin(), iy.end(), x.size());
                return permutation_test(reduced.select(ix), reduced.select(iy), setting.kernel, c);
            });
        curve.setting = setting.name;
        report.settings.push_back(setting.name);
        report.curves.push_back(std::move(curve));
    }
    return report;
}

}  // namespace distinct
