#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "distinct/embedding_store.hpp"
#include "distinct/kernel.hpp"
#include "distinct/permutation_test.hpp"
#include "distinct/point_set.hpp"
#include "distinct/power_analysis.hpp"

namespace distinct {

// ---------------------------------------------------------------------------
// Dimensionality reduction
// ---------------------------------------------------------------------------

// pca: deterministic principal-component projection fitted on the pooled
// input. external: vectors were reduced upstream; reduce() is the identity.
enum class ReducerMethod { pca, external };

struct ReducerSpec {
    ReducerMethod method = ReducerMethod::pca;
    std::size_t target_dim = 0;

    // target_dim <= input dim; for pca also target_dim < sample count.
    void validate(std::size_t input_dim, std::size_t count) const;
};

struct PcaModel {
    std::vector<double> mean;
    PointSet components;               // target_dim rows of length input dim, orthonormal
    std::vector<double> eigenvalues;   // all of them, descending; sample covariance (N - 1)

    [[nodiscard]] PointSet transform(const PointSet& points) const;
};

// Components are sign-fixed so that each one's largest-magnitude loading is
// positive (first such index on ties).
PcaModel fit_pca(const PointSet& points, std::size_t target_dim);

PointSet reduce(const PointSet& points, const ReducerSpec& spec, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Stability of MMD under reduction
// ---------------------------------------------------------------------------

struct StabilityReport {
    std::vector<std::size_t> dims;
    std::vector<double> mean_abs_dev;
    std::vector<double> std_abs_dev;  // sample standard deviation across trials
    std::size_t trials = 0;
    std::size_t sample_size = 0;
};

// Each trial draws `sample_size` points from X and from Y, then compares
// MMD^2_u in the full space with MMD^2_u after PCA (fit on the pooled trial
// sample) to every d in `dims`. Data-dependent bandwidths are recomputed in
// each space.
StabilityReport stability_analysis(const PointSet& x, const PointSet& y, const std::vector<std::size_t>& dims,
                                   std::size_t trials, std::size_t sample_size, const KernelSpec& spec,
                                   std::uint64_t seed, unsigned workers = 1);

// ---------------------------------------------------------------------------
// Kernel perturbation bounds
// ---------------------------------------------------------------------------

struct PerturbationBoundCheck {
    double epsilon = 0.0;    // max |approx - ideal| over all entries
    double delta_mmd = 0.0;  // |MMD^2(approx) - MMD^2(ideal)|
    double bound = 0.0;      // 4 * epsilon
    bool bound_ok = true;    // delta_mmd <= bound + 1e-12
};

PerturbationBoundCheck check_perturbation_bound(const KernelMatrix& ideal, const KernelMatrix& approx,
                                                std::span<const std::size_t> idx_x,
                                                std::span<const std::size_t> idx_y);

struct GaussianBoundCheck {
    double eta = 0.0;        // max |squared-distance distortion| over pairs
    double sigma = 0.0;
    double delta_mmd = 0.0;
    double bound = 0.0;      // 2 * eta / sigma^2
    bool bound_ok = true;
};

// Gaussian-kernel form of the bound: both point sets (same row order, first m
// rows X) are evaluated with one fixed sigma.
GaussianBoundCheck check_gaussian_distance_bound(const PointSet& ideal, const PointSet& approx, std::size_t m,
                                                 double sigma);

// ---------------------------------------------------------------------------
// Input perturbations
// ---------------------------------------------------------------------------

enum class PerturbationKind { gaussian_noise, grid_watermark };

std::string to_string(PerturbationKind kind);

// `ratio` is an amplitude ratio: at 1 the perturbation's standard deviation
// (noise) or amplitude (watermark) equals the signal standard deviation.
// The watermark is the vector-level analogue of a pixel grid: a fixed offset
// on every coordinate whose index is a multiple of grid_period.
struct PerturbationSpec {
    PerturbationKind kind = PerturbationKind::gaussian_noise;
    double ratio = 1.0;
    std::size_t grid_period = 4;
    std::uint64_t seed = 0;
    bool per_coordinate_sigma = false;

    void validate() const;
};

// Standard deviation of all coordinates about the dataset centroid. Sums run
// over sorted values so the result does not depend on record order.
double signal_sigma(const PointSet& points);
std::vector<double> signal_sigma_per_coordinate(const PointSet& points);

// Noise for a record is keyed by its content (and occurrence number among
// identical records), so output is independent of dataset order.
PointSet perturb(const PointSet& points, const PerturbationSpec& spec);

// The same clean vectors serve as both samples: tests clean against
// perturb(clean). With a reducer, it is fitted on the pooled clean u perturbed
// set before splitting.
TestResult paired_perturbation_test(const PointSet& clean, const PerturbationSpec& perturbation,
                                    const KernelSpec& kernel, const TestConfig& cfg,
                                    const std::optional<ReducerSpec>& reducer = std::nullopt);

// ---------------------------------------------------------------------------
// Ablations
// ---------------------------------------------------------------------------

enum class AblationMode { kernel, bandwidth, dimensionality };

std::string to_string(AblationMode mode);

struct AblationSetting {
    std::string name;
    KernelSpec kernel;
    std::optional<ReducerSpec> reducer;
};

struct AblationReport {
    AblationMode mode = AblationMode::kernel;
    std::vector<std::string> settings;
    std::vector<PowerCurve> curves;
};

std::vector<AblationSetting> kernel_ablation_settings();
std::vector<AblationSetting> bandwidth_ablation_settings(const std::vector<double>& multipliers);
std::vector<AblationSetting> dimensionality_ablation_settings(const std::vector<std::size_t>& dims,
                                                              const KernelSpec& kernel);

// One power curve per setting. Trial seeds ignore the setting, so every
// setting sees identical subsamples and permutations.
AblationReport run_ablation(const GroupedDataset& ds, const std::string& a, const std::string& b, AblationMode mode,
                            const std::vector<AblationSetting>& settings, const std::vector<std::size_t>& sizes,
                            std::size_t trials, const TestConfig& cfg);

}  // namespace distinct
