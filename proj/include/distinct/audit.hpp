#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "distinct/embedding_store.hpp"
#include "distinct/point_set.hpp"

namespace distinct {

// Item-level memorization audit. Thresholds come from the reference corpus:
// each reference item's nearest neighbour among the *other* reference items of
// its stratum, taken at `threshold_percentile`. Under no memorization about
// 1 - percentile/100 of candidates are expected to reach it.
struct AuditConfig {
    double threshold_percentile = 99.0;
    std::string metric = "cosine";  // only cosine is implemented

    void validate() const;
};

struct NearestNeighbor {
    std::size_t index = 0;
    double similarity = 0.0;
};

// Throws InvalidArgument for zero-norm vectors or dimension mismatch.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Argmax cosine similarity over `corpus`; ties go to the lowest index.
NearestNeighbor nn_similarity(std::span<const double> query, const PointSet& corpus);

// Leave-one-out nearest-neighbour similarity of every item within `stratum`.
std::vector<double> loo_nn_similarities(const PointSet& stratum, unsigned workers = 1);

// Per-stratum thresholds; throws InvalidArgument if any stratum has < 3 items.
std::map<std::string, double> calibrate_threshold(const GroupedDataset& reference, const AuditConfig& cfg,
                                                  unsigned workers = 1);

struct CandidateMatch {
    std::string id;
    std::string stratum;
    std::string reference_id;
    double similarity = 0.0;
    bool flagged = false;
};

struct StratumSummary {
    std::string label;
    std::size_t candidates = 0;
    std::size_t flagged = 0;
    double threshold = 0.0;
    double exceedance_rate = 0.0;
};

struct AuditReport {
    std::map<std::string, double> baseline_threshold;
    std::vector<CandidateMatch> candidate_nn;
    std::vector<std::string> flagged;  // candidate ids
    std::vector<StratumSummary> strata;
    double exceedance_rate = 0.0;      // pooled over audited strata
    double expected_fp_rate = 0.0;     // 1 - percentile / 100
    std::vector<std::string> warnings; // skipped strata
    double threshold_percentile = 0.0;
    std::string metric;
};

// Candidates are compared only against reference items of the same stratum
// (group label). Reference strata with fewer than 3 items are skipped with a
// warning; their candidates are left out of the exceedance denominators. A
// candidate stratum missing from the reference is an error.
AuditReport audit(const GroupedDataset& candidates, const GroupedDataset& reference, const AuditConfig& cfg,
                  unsigned workers = 1);

}  // namespace distinct
