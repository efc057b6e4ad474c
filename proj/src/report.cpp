#include "distinct/report.hpp"

#include <sstream>

#include "distinct/mmd.hpp"

namespace distinct {

Json to_json(const KernelSpec& spec) {
    Json j;
    j["family"] = to_string(spec.family);
    if (spec.family == KernelFamily::rbf) {
        j["bandwidth_rule"] = to_string(spec.rule);
        if (spec.rule == BandwidthRule::scaled_median) j["multiplier"] = spec.multiplier;
        if (spec.sigma > 0.0) j["sigma"] = spec.sigma;
    }
    j["description"] = spec.describe();
    return j;
}

Json to_json(const TestConfig& cfg) {
    Json j;
    j["permutations"] = cfg.permutations;
    j["alpha"] = cfg.alpha;
    j["seed"] = cfg.seed;
    j["gram_mode"] = to_string(cfg.gram_mode);
    j["exhaustive_small"] = cfg.exhaustive_small;
    return j;
}

Json to_json(const TestResult& r) {
    Json j;
    j["observed"] = r.observed;
    j["observed_display"] = clamp_for_display(r.observed);
    j["p_value"] = r.p_value;
    j["critical_value"] = r.critical_value;
    j["reject"] = r.reject;
    j["exceed_count"] = r.exceed_count;
    j["permutations_used"] = r.permutations_used();
    j["exhaustive"] = r.exhaustive;
    j["quantile_disagrees"] = r.quantile_disagrees;
    j["m"] = r.m;
    j["n"] = r.n;
    j["sigma_used"] = r.sigma_used ? Json(*r.sigma_used) : Json(nullptr);
    j["alpha"] = r.config.alpha;
    j["seed"] = r.config.seed;
    j["permutation_stats"] = r.permutation_stats;
    return j;
}

Json to_json(const PowerCurve& c) {
    Json j;
    j["group_a"] = c.group_a;
    j["group_b"] = c.group_b;
    if (!c.setting.empty()) j["setting"] = c.setting;
    j["sample_sizes"] = c.sample_sizes;
    j["rates"] = c.rates;
    j["rejections"] = c.rejections;
    j["trials"] = c.trials;
    j["alpha"] = c.alpha;
    j["seed"] = c.seed;
    return j;
}

Json to_json(const MmdMatrix& m) {
    Json j;
    j["labels"] = m.labels;
    j["values"] = m.values;
    Json display = Json::array();
    for (const auto& row : m.values) {
        Json r = Json::array();
        for (double v : row) r.push_back(clamp_for_display(v));
        display.push_back(r);
    }
    j["values_display"] = display;
    j["p_values"] = m.p_values;
    Json sig = Json::array();
    for (const auto& row : m.significant) {
        Json r = Json::array();
        for (bool b : row) r.push_back(b);
        sig.push_back(r);
    }
    j["significant"] = sig;
    j["sample_sizes"] = m.sample_sizes;
    j["alpha"] = m.alpha;
    j["cap"] = m.cap;
    j["diagonal_mode"] = m.diagonal_mode;
    return j;
}

Json to_json(const BootstrapCi& ci) {
    Json j;
    j["point"] = ci.point;
    j["lower"] = ci.lower;
    j["upper"] = ci.upper;
    j["level"] = ci.level;
    j["iterations"] = ci.iterations;
    j["replicate_median"] = ci.replicate_median;
    j["method"] = ci.method;
    return j;
}

Json to_json(const StabilityReport& s) {
    Json j;
    j["dims"] = s.dims;
    j["mean_abs_dev"] = s.mean_abs_dev;
    j["std_abs_dev"] = s.std_abs_dev;
    j["trials"] = s.trials;
    j["sample_size"] = s.sample_size;
    return j;
}

Json to_json(const AblationReport& a) {
    Json j;
    j["mode"] = to_string(a.mode);
    j["settings"] = a.settings;
    Json curves = Json::array();
    for (const auto& c : a.curves) curves.push_back(to_json(c));
    j["curves"] = curves;
    return j;
}

Json to_json(const AuditReport& a) {
    Json j;
    j["metric"] = a.metric;
    j["threshold_percentile"] = a.threshold_percentile;
    Json thresholds = Json::object();
    for (const auto& [label, t] : a.baseline_threshold) thresholds[label] = t;
    j["baseline_threshold"] = thresholds;
    j["exceedance_rate"] = a.exceedance_rate;
    j["expected_fp_rate"] = a.expected_fp_rate;
    j["flagged"] = a.flagged;
    Json strata = Json::array();
    for (const auto& s : a.strata)
        strata.push_back({{"label", s.label},
                          {"candidates", s.candidates},
                          {"flagged", s.flagged},
                          {"threshold", s.threshold},
                          {"exceedance_rate", s.exceedance_rate}});
    j["strata"] = strata;
    Json matches = Json::array();
    for (const auto& c : a.candidate_nn)
        matches.push_back({{"id", c.id},
                           {"stratum", c.stratum},
                           {"reference_id", c.reference_id},
                           {"similarity", c.similarity},
                           {"flagged", c.flagged}});
    j["candidate_nn"] = matches;
    j["warnings"] = a.warnings;
    // Perceptual metrics need raw images; columns kept for merged exports.
    j["reserved_metrics"] = {"ssim", "lpips"};
    return j;
}

std::string render_json(const Report& report) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = report.command;
    j["config"] = report.config;
    j["results"] = report.results;
    j["runtime_ms"] = report.runtime_ms;
    return j.dump(2) + "\n";
}

std::string format_cell(const Json& value) {
    if (value.is_string()) {
        const auto& s = value.get_ref<const std::string&>();
        if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
        std::string out = "\"";
        for (char c : s) {
            if (c == '"') out.push_back('"');
            out.push_back(c);
        }
        out.push_back('"');
        return out;
    }
    return value.dump();
}

std::string render_csv(const Report& report) {
    std::ostringstream out;
    out << "# schema_version=" << kSchemaVersion << "\n";
    out << "# command=" << report.command << "\n";
    out << "# config=" << report.config.dump() << "\n";
    out << "# runtime_ms=" << Json(report.runtime_ms).dump() << "\n";
    for (std::size_t c = 0; c < report.table.columns.size(); ++c)
        out << (c ? "," : "") << report.table.columns[c];
    out << "\n";
    for (const auto& row : report.table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_cell(row[c]);
        out << "\n";
    }
    return out.str();
}

}  // namespace distinct
