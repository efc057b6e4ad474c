#include "distinct/audit.hpp"

#include <algorithm>
#include <cmath>

#include "distinct/error.hpp"
#include "distinct/permutation_test.hpp"
#include "distinct/rng.hpp"

namespace distinct {

namespace {

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double threshold_from(std::vector<double>& sims, double percentile) {
    return quantile(sims, percentile / 100.0);
}

}  // namespace

void AuditConfig::validate() const {
    if (!(threshold_percentile > 0.0 && threshold_percentile < 100.0))
        throw InvalidArgument("threshold percentile must lie strictly between 0 and 100");
    if (metric != "cosine") throw InvalidArgument("unsupported audit metric '" + metric + "' (only cosine)");
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("dimension mismatch");
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw InvalidArgument("cosine similarity of a zero-norm vector");
    double dot = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
    return std::clamp(dot / (na * nb), -1.0, 1.0);
}

NearestNeighbor nn_similarity(std::span<const double> query, const PointSet& corpus) {
    if (corpus.empty()) throw InvalidArgument("nearest neighbour search over an empty corpus");
    NearestNeighbor best{0, cosine_similarity(query, corpus[0])};
    for (std::size_t i = 1; i < corpus.size(); ++i) {
        const double s = cosine_similarity(query, corpus[i]);
        if (s > best.similarity) best = {i, s};
    }
    return best;
}

std::vector<double> loo_nn_similarities(const PointSet& stratum, unsigned workers) {
    const std::size_t n = stratum.size();
    if (n < 3) throw InvalidArgument("leave-one-out calibration needs at least 3 items per stratum");
    std::vector<double> out(n);
    parallel_for(n, workers, [&](std::size_t i) {
        bool first = true;
        double best = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double s = cosine_similarity(stratum[i], stratum[j]);
            if (first || s > best) best = s;
            first = false;
        }
        out[i] = best;
    });
    return out;
}

std::map<std::string, double> calibrate_threshold(const GroupedDataset& reference, const AuditConfig& cfg,
                                                  unsigned workers) {
    cfg.validate();
    std::map<std::string, double> out;
    for (const auto& [label, members] : reference.groups()) {
        if (members.size() < 3)
            throw InvalidArgument("reference stratum '" + label + "' has fewer than 3 items");
        auto sims = loo_nn_similarities(reference.points(members), workers);
        out[label] = threshold_from(sims, cfg.threshold_percentile);
    }
    return out;
}

AuditReport audit(const GroupedDataset& candidates, const GroupedDataset& reference, const AuditConfig& cfg,
                  unsigned workers) {
    cfg.validate();
    for (const auto& label : candidates.labels())
        if (!reference.has_group(label))
            throw InvalidArgument("candidate stratum '" + label + "' is absent from the reference corpus");

    AuditReport report;
    report.threshold_percentile = cfg.threshold_percentile;
    report.metric = cfg.metric;
    report.expected_fp_rate = 1.0 - cfg.threshold_percentile / 100.0;

    std::size_t audited = 0;
    for (const auto& [label, cand_members] : candidates.groups()) {
        const auto& ref_members = reference.group(label);
        if (ref_members.size() < 3) {
            report.warnings.push_back("stratum '" + label + "' skipped: reference has " +
                                      std::to_string(ref_members.size()) + " items (need 3)");
            continue;
        }
        const PointSet corpus = reference.points(ref_members);
        auto sims = loo_nn_similarities(corpus, workers);
        const double threshold = threshold_from(sims, cfg.threshold_percentile);
        report.baseline_threshold[label] = threshold;

        const PointSet queries = candidates.points(cand_members);
        std::vector<NearestNeighbor> nn(queries.size());
        parallel_for(queries.size(), workers, [&](std::size_t q) { nn[q] = nn_similarity(queries[q], corpus); });

        StratumSummary summary{label, queries.size(), 0, threshold, 0.0};
        for (std::size_t q = 0; q < queries.size(); ++q) {
            CandidateMatch match;
            match.id = candidates.table()[cand_members[q]].id;
            match.stratum = label;
            match.reference_id = reference.table()[ref_members[nn[q].index]].id;
            match.similarity = nn[q].similarity;
            match.flagged = nn[q].similarity >= threshold;
            if (match.flagged) {
                ++summary.flagged;
                report.flagged.push_back(match.id);
            }
            report.candidate_nn.push_back(std::move(match));
        }
        summary.exceedance_rate =
            summary.candidates ? static_cast<double>(summary.flagged) / static_cast<double>(summary.candidates) : 0.0;
        audited += summary.candidates;
        report.strata.push_back(summary);
    }
    report.exceedance_rate =
        audited ? static_cast<double>(report.flagged.size()) / static_cast<double>(audited) : 0.0;
    return report;
}

}  // namespace distinct
