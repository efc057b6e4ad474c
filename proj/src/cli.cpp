#include "distinct/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "distinct/audit.hpp"
#include "distinct/embedding_store.hpp"
#include "distinct/error.hpp"
#include "distinct/mmd.hpp"
#include "distinct/permutation_test.hpp"
#include "distinct/power_analysis.hpp"
#include "distinct/report.hpp"
#include "distinct/rng.hpp"
#include "distinct/robustness.hpp"

namespace distinct {

namespace {

class UsageError : public Error {
public:
    using Error::Error;
};

struct GlobalOptions {
    std::uint64_t seed = 0;
    unsigned workers = 1;
    double alpha = 0.05;
    std::size_t permutations = 500;
    std::string kernel = "rbf";
    std::string bandwidth = "median";
    std::size_t reduce_dims = 0;
    std::string format = "json";
    std::string gram_mode = "auto";
    std::string out;
};

struct CommandOptions {
    std::string table;
    std::string table_b;
    std::string group_a;
    std::string group_b;
    std::string group;
    std::string in;
    std::string to;
    std::string candidates;
    std::string reference;
    std::string mode = "kernel";
    std::string kind = "noise";
    std::string replay_path;
    std::vector<std::string> groups;
    std::vector<std::size_t> sizes{4, 6, 8, 10};
    std::vector<std::size_t> dims{2, 5, 10};
    std::vector<double> multipliers{0.5, 1.0, 2.0};
    std::vector<double> ratios{1.0};
    std::size_t cap = 0;
    std::size_t trials = 100;
    std::size_t iterations = 1000;
    std::size_t sample_size = 50;
    std::size_t grid_period = 4;
    double target = 0.95;
    double level = 0.95;
    double percentile = 99.0;
    bool per_coordinate = false;
};

struct Context {
    GlobalOptions global;
    CommandOptions cmd;
    std::vector<std::string> argv;  // canonical, without --workers/--out
    std::ostream& out;
};

std::vector<std::string> canonical_args(const std::vector<std::string>& args) {
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const auto& a = args[i];
        if (a == "--workers" || a == "--out") {
            ++i;
            continue;
        }
        if (a.rfind("--workers=", 0) == 0 || a.rfind("--out=", 0) == 0) continue;
        kept.push_back(a);
    }
    return kept;
}

GramMode parse_gram_mode(const std::string& s) {
    if (s == "auto") return GramMode::automatic;
    if (s == "precompute") return GramMode::precompute;
    if (s == "on_the_fly") return GramMode::on_the_fly;
    throw UsageError("--gram-mode must be auto, precompute or on_the_fly");
}

TestConfig test_config(const Context& ctx, std::string_view purpose) {
    TestConfig cfg;
    cfg.permutations = ctx.global.permutations;
    cfg.alpha = ctx.global.alpha;
    cfg.seed = derive_seed(ctx.global.seed, purpose, {});
    cfg.gram_mode = parse_gram_mode(ctx.global.gram_mode);
    cfg.workers = ctx.global.workers;
    cfg.validate();
    return cfg;
}

KernelSpec kernel_of(const Context& ctx) {
    try {
        return parse_kernel(ctx.global.kernel, ctx.global.bandwidth);
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
}

GroupedDataset load_grouped(const std::string& path) {
    if (path.empty()) throw UsageError("missing table path");
    return GroupedDataset(load_table(path));
}

void require_group(const GroupedDataset& ds, const std::string& label, const std::string& flag) {
    if (label.empty()) throw UsageError("missing group label: " + flag + " is required");
    if (!ds.has_group(label)) throw UsageError("group label '" + label + "' not found (" + flag + ")");
}

Json base_config(const Context& ctx, const KernelSpec* spec, const TestConfig* cfg) {
    Json c;
    c["library_version"] = kLibraryVersion;
    c["argv"] = ctx.argv;
    c["seed"] = ctx.global.seed;
    if (spec) c["kernel"] = to_json(*spec);
    if (cfg) c["test"] = to_json(*cfg);
    return c;
}

std::vector<std::size_t> capped(const GroupedDataset& ds, const std::string& group, std::size_t cap,
                                std::uint64_t seed) {
    const auto& members = ds.group(group);
    if (cap == 0 || cap >= members.size()) return members;
    return subsample(ds, group, cap, seed);
}

// ---------------------------------------------------------------------------

Report cmd_test(Context& ctx) {
    const KernelSpec spec = kernel_of(ctx);
    const TestConfig cfg = test_config(ctx, "test");
    const GroupedDataset a = load_grouped(ctx.cmd.table);
    const bool same_table = ctx.cmd.table_b.empty() || ctx.cmd.table_b == ctx.cmd.table;
    const GroupedDataset b = same_table ? a : load_grouped(ctx.cmd.table_b);
    require_group(a, ctx.cmd.group_a, "--group-a");
    require_group(b, ctx.cmd.group_b, "--group-b");

    std::string sampling = "full groups";
    std::vector<std::size_t> ix;
    std::vector<std::size_t> iy;
    if (same_table && ctx.cmd.group_a == ctx.cmd.group_b) {
        auto halves = split_half(a, ctx.cmd.group_a, derive_seed(ctx.global.seed, "test-split", {}));
        ix = std::move(halves.first);
        iy = std::move(halves.second);
        sampling = "split_half";
    } else {
        ix = capped(a, ctx.cmd.group_a, ctx.cmd.cap, derive_seed(ctx.global.seed, "test-cap", {0}));
        iy = capped(b, ctx.cmd.group_b, ctx.cmd.cap, derive_seed(ctx.global.seed, "test-cap", {1}));
        if (ctx.cmd.cap) sampling = "capped at " + std::to_string(ctx.cmd.cap);
    }
    const TestResult r = permutation_test(a.points(ix), b.points(iy), spec, cfg);

    Report rep;
    rep.command = "test";
    rep.config = base_config(ctx, &spec, &cfg);
    rep.config["table_a"] = ctx.cmd.table;
    rep.config["table_b"] = same_table ? ctx.cmd.table : ctx.cmd.table_b;
    rep.config["group_a"] = ctx.cmd.group_a;
    rep.config["group_b"] = ctx.cmd.group_b;
    rep.config["cap"] = ctx.cmd.cap;
    rep.results = to_json(r);
    rep.results["sampling"] = sampling;
    rep.results["warnings"] = cfg.warnings();
    rep.table.columns = {"group_a", "group_b", "m", "n", "observed", "p_value", "critical_value", "reject",
                         "permutations_used", "exceed_count", "sigma_used"};
    rep.table.rows.push_back({ctx.cmd.group_a, ctx.cmd.group_b, r.m, r.n, r.observed, r.p_value, r.critical_value,
                              r.reject, r.permutations_used(), r.exceed_count, rep.results["sigma_used"]});
    return rep;
}

Report cmd_matrix(Context& ctx) {
    const KernelSpec spec = kernel_of(ctx);
    const TestConfig cfg = test_config(ctx, "matrix");
    GroupedDataset ds = load_grouped(ctx.cmd.table);
    if (!ctx.cmd.groups.empty()) {
        std::vector<EmbeddingRecord> kept;
        for (const auto& g : ctx.cmd.groups) {
            require_group(ds, g, "--groups");
            for (std::size_t i : ds.group(g)) kept.push_back(ds.table()[i]);
        }
        ds = GroupedDataset(EmbeddingTable(ds.table().dim(), std::move(kept), ds.table().source_tag()));
    }
    const std::size_t cap = ctx.cmd.cap ? ctx.cmd.cap : 500;
    const MmdMatrix m = mmd_matrix(ds, cap, spec, cfg);

    Report rep;
    rep.command = "matrix";
    rep.config = base_config(ctx, &spec, &cfg);
    rep.config["table"] = ctx.cmd.table;
    rep.config["cap"] = cap;
    rep.config["groups"] = m.labels;
    rep.results = to_json(m);
    rep.table.columns = {"group_a", "group_b", "n", "mmd2", "p_value", "significant", "cell"};
    for (std::size_t i = 0; i < m.labels.size(); ++i)
        for (std::size_t j = 0; j < m.labels.size(); ++j)
            rep.table.rows.push_back({m.labels[i], m.labels[j], m.sample_sizes[i][j], m.values[i][j],
                                      m.p_values[i][j], static_cast<bool>(m.significant[i][j]),
                                      i == j ? "split_half" : "cross"});
    return rep;
}

Report cmd_power(Context& ctx) {
    const KernelSpec spec = kernel_of(ctx);
    const TestConfig cfg = test_config(ctx, "power");
    const GroupedDataset ds = load_grouped(ctx.cmd.table);
    require_group(ds, ctx.cmd.group_a, "--group-a");
    require_group(ds, ctx.cmd.group_b, "--group-b");
    const PowerCurve curve =
        rejection_rate_curve(ds, ctx.cmd.group_a, ctx.cmd.group_b, ctx.cmd.sizes, ctx.cmd.trials, spec, cfg);
    const auto threshold = threshold_sample_size(curve, ctx.cmd.target);

    Report rep;
    rep.command = "power";
    rep.config = base_config(ctx, &spec, &cfg);
    rep.config["table"] = ctx.cmd.table;
    rep.config["group_a"] = ctx.cmd.group_a;
    rep.config["group_b"] = ctx.cmd.group_b;
    rep.config["sizes"] = ctx.cmd.sizes;
    rep.config["trials"] = ctx.cmd.trials;
    rep.config["target"] = ctx.cmd.target;
    rep.results = to_json(curve);
    rep.results["negative_control"] = ctx.cmd.group_a == ctx.cmd.group_b;
    rep.results["threshold_n"] = threshold ? Json(*threshold) : Json(nullptr);
    rep.table.columns = {"group_a", "group_b", "n", "rate", "rejections", "trials"};
    for (std::size_t i = 0; i < curve.sample_sizes.size(); ++i)
        rep.table.rows.push_back({curve.group_a, curve.group_b, curve.sample_sizes[i], curve.rates[i],
                                  curve.rejections[i], curve.trials});
    return rep;
}

Report cmd_ablate(Context& ctx) {
    const KernelSpec spec = kernel_of(ctx);
    const TestConfig cfg = test_config(ctx, "ablate");
    const GroupedDataset ds = load_grouped(ctx.cmd.table);
    require_group(ds, ctx.cmd.group_a, "--group-a");
    require_group(ds, ctx.cmd.group_b, "--group-b");

    Report rep;
    rep.command = "ablate";
    rep.config = base_config(ctx, &spec, &cfg);
    rep.config["table"] = ctx.cmd.table;
    rep.config["group_a"] = ctx.cmd.group_a;
    rep.config["group_b"] = ctx.cmd.group_b;
    rep.config["mode"] = ctx.cmd.mode;
    rep.config["trials"] = ctx.cmd.trials;

    if (ctx.cmd.mode == "stability") {
        if (ctx.cmd.group_a == ctx.cmd.group_b) throw UsageError("stability analysis needs two different groups");
        rep.config["dims"] = ctx.cmd.dims;
        rep.config["sample_size"] = ctx.cmd.sample_size;
        const StabilityReport s =
            stability_analysis(ds.group_points(ctx.cmd.group_a), ds.group_points(ctx.cmd.group_b), ctx.cmd.dims,
                               ctx.cmd.trials, ctx.cmd.sample_size, spec,
                               derive_seed(ctx.global.seed, "stability", {}), ctx.global.workers);
        rep.results = to_json(s);
        rep.results["reducer"] = "pca";
        rep.table.columns = {"d", "mean_abs_dev", "std_abs_dev", "trials"};
        for (std::size_t i = 0; i < s.dims.size(); ++i)
            rep.table.rows.push_back({s.dims[i], s.mean_abs_dev[i], s.std_abs_dev[i], s.trials});
        return rep;
    }

    AblationMode mode;
    std::vector<AblationSetting> settings;
    if (ctx.cmd.mode == "kernel") {
        mode = AblationMode::kernel;
        settings = kernel_ablation_settings();
    } else if (ctx.cmd.mode == "bandwidth") {
        mode = AblationMode::bandwidth;
        settings = bandwidth_ablation_settings(ctx.cmd.multipliers);
        rep.config["multipliers"] = ctx.cmd.multipliers;
    } else if (ctx.cmd.mode == "dimensionality") {
        mode = AblationMode::dimensionality;
        settings = dimensionality_ablation_settings(ctx.cmd.dims, spec);
        rep.config["dims"] = ctx.cmd.dims;
    } else {
        throw UsageError("--mode must be kernel, bandwidth, dimensionality or stability");
    }
    rep.config["sizes"] = ctx.cmd.sizes;
    const AblationReport a =
        run_ablation(ds, ctx.cmd.group_a, ctx.cmd.group_b, mode, settings, ctx.cmd.sizes, ctx.cmd.trials, cfg);
    rep.results = to_json(a);
    rep.table.columns = {"setting", "n", "rate", "rejections", "trials"};
    for (const auto& c : a.curves)
        for (std::size_t i = 0; i < c.sample_sizes.size(); ++i)
            rep.table.rows.push_back({c.setting, c.sample_sizes[i], c.rates[i], c.rejections[i], c.trials});
    return rep;
}

Report cmd_perturb(Context& ctx) {
    const KernelSpec spec = kernel_of(ctx);
    const TestConfig base = test_config(ctx, "perturb");
    const GroupedDataset ds = load_grouped(ctx.cmd.table);
    require_group(ds, ctx.cmd.group, "--group");
    PerturbationKind kind;
    if (ctx.cmd.kind == "noise")
        kind = PerturbationKind::gaussian_noise;
    else if (ctx.cmd.kind == "watermark")
        kind = PerturbationKind::grid_watermark;
    else
        throw UsageError("--kind must be noise or watermark");

    std::optional<ReducerSpec> reducer;
    if (ctx.global.reduce_dims) reducer = ReducerSpec{ReducerMethod::pca, ctx.global.reduce_dims};
    const PointSet clean =
        ds.points(capped(ds, ctx.cmd.group, ctx.cmd.cap, derive_seed(ctx.global.seed, "perturb-cap", {})));

    Report rep;
    rep.command = "perturb";
    rep.config = base_config(ctx, &spec, &base);
    rep.config["table"] = ctx.cmd.table;
    rep.config["group"] = ctx.cmd.group;
    rep.config["kind"] = to_string(kind);
    rep.config["ratios"] = ctx.cmd.ratios;
    rep.config["grid_period"] = ctx.cmd.grid_period;
    rep.config["per_coordinate_sigma"] = ctx.cmd.per_coordinate;
    rep.config["cap"] = ctx.cmd.cap;
    rep.config["reduce_dims"] = ctx.global.reduce_dims;
    rep.results["design"] = "paired: clean vectors vs their own perturbed copies";
    if (kind == PerturbationKind::grid_watermark)
        rep.results["watermark_model"] = "vector-level periodic coordinate mask (analogue of a pixel grid)";
    rep.results["ratio_semantics"] = "amplitude ratio: signal std / perturbation std";
    rep.table.columns = {"kind", "ratio", "observed", "p_value", "critical_value", "reject"};
    Json runs = Json::array();
    for (std::size_t i = 0; i < ctx.cmd.ratios.size(); ++i) {
        PerturbationSpec p;
        p.kind = kind;
        p.ratio = ctx.cmd.ratios[i];
        p.grid_period = ctx.cmd.grid_period;
        p.seed = derive_seed(ctx.global.seed, "perturb-noise", {i});
        p.per_coordinate_sigma = ctx.cmd.per_coordinate;
        TestConfig cfg = base;
        cfg.seed = derive_seed(base.seed, "ratio", {i});
        const TestResult r = paired_perturbation_test(clean, p, spec, cfg, reducer);
        Json j = to_json(r);
        j["ratio"] = p.ratio;
        runs.push_back(j);
        rep.table.rows.push_back({to_string(kind), p.ratio, r.observed, r.p_value, r.critical_value, r.reject});
    }
    rep.results["runs"] = runs;
    return rep;
}

Report cmd_audit(Context& ctx) {
    if (ctx.cmd.candidates.empty() || ctx.cmd.reference.empty())
        throw UsageError("--candidates and --reference are required");
    const GroupedDataset cand = load_grouped(ctx.cmd.candidates);
    const GroupedDataset ref = load_grouped(ctx.cmd.reference);
    AuditConfig cfg;
    cfg.threshold_percentile = ctx.cmd.percentile;
    const AuditReport a = audit(cand, ref, cfg, ctx.global.workers);

    Report rep;
    rep.command = "audit";
    rep.config = base_config(ctx, nullptr, nullptr);
    rep.config["candidates"] = ctx.cmd.candidates;
    rep.config["reference"] = ctx.cmd.reference;
    rep.config["threshold_percentile"] = cfg.threshold_percentile;
    rep.config["metric"] = cfg.metric;
    rep.results = to_json(a);
    rep.table.columns = {"id", "stratum", "reference_id", "similarity", "threshold", "flagged"};
    for (const auto& c : a.candidate_nn)
        rep.table.rows.push_back(
            {c.id, c.stratum, c.reference_id, c.similarity, a.baseline_threshold.at(c.stratum), c.flagged});
    return rep;
}

Report cmd_reduce(Context& ctx) {
    if (ctx.global.reduce_dims == 0) throw UsageError("--reduce-dims is required for reduce");
    if (ctx.cmd.to.empty()) throw UsageError("--to is required for reduce");
    const EmbeddingTable table = load_table(ctx.cmd.table);
    const PointSet pooled = table.all_points();
    const PcaModel model = fit_pca(pooled, ctx.global.reduce_dims);
    const PointSet reduced = model.transform(pooled);

    std::vector<EmbeddingRecord> records;
    records.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        EmbeddingRecord r{table[i].id, table[i].group_label, {}};
        for (double v : reduced[i]) r.vector.push_back(static_cast<float>(v));
        records.push_back(std::move(r));
    }
    save_table(EmbeddingTable(ctx.global.reduce_dims, std::move(records)), ctx.cmd.to);

    double total = 0.0;
    for (double e : model.eigenvalues) total += e;
    Report rep;
    rep.command = "reduce";
    rep.config = base_config(ctx, nullptr, nullptr);
    rep.config["table"] = ctx.cmd.table;
    rep.config["to"] = ctx.cmd.to;
    rep.config["method"] = "pca";
    rep.config["target_dim"] = ctx.global.reduce_dims;
    rep.results["records"] = table.size();
    rep.results["input_dim"] = table.dim();
    rep.results["output_dim"] = ctx.global.reduce_dims;
    rep.table.columns = {"component", "eigenvalue", "explained_fraction"};
    Json eig = Json::array();
    double kept = 0.0;
    for (std::size_t c = 0; c < ctx.global.reduce_dims; ++c) {
        const double e = model.eigenvalues[c];
        kept += e;
        eig.push_back(e);
        rep.table.rows.push_back({c, e, total > 0.0 ? e / total : 0.0});
    }
    rep.results["eigenvalues"] = eig;
    rep.results["explained_variance"] = total > 0.0 ? kept / total : 0.0;
    return rep;
}

Report cmd_ci(Context& ctx) {
    const KernelSpec spec = kernel_of(ctx);
    const GroupedDataset ds = load_grouped(ctx.cmd.table);
    require_group(ds, ctx.cmd.group_a, "--group-a");
    require_group(ds, ctx.cmd.group_b, "--group-b");
    if (ctx.cmd.group_a == ctx.cmd.group_b) throw UsageError("ci needs two different groups");
    const auto ix = capped(ds, ctx.cmd.group_a, ctx.cmd.cap, derive_seed(ctx.global.seed, "ci-cap", {0}));
    const auto iy = capped(ds, ctx.cmd.group_b, ctx.cmd.cap, derive_seed(ctx.global.seed, "ci-cap", {1}));
    const BootstrapCi ci = bootstrap_ci(ds.points(ix), ds.points(iy), spec, ctx.cmd.iterations, ctx.cmd.level,
                                        derive_seed(ctx.global.seed, "ci", {}), ctx.global.workers);

    Report rep;
    rep.command = "ci";
    rep.config = base_config(ctx, &spec, nullptr);
    rep.config["table"] = ctx.cmd.table;
    rep.config["group_a"] = ctx.cmd.group_a;
    rep.config["group_b"] = ctx.cmd.group_b;
    rep.config["iterations"] = ctx.cmd.iterations;
    rep.config["level"] = ctx.cmd.level;
    rep.config["cap"] = ctx.cmd.cap;
    rep.results = to_json(ci);
    rep.table.columns = {"group_a", "group_b", "point", "lower", "upper", "level", "iterations"};
    rep.table.rows.push_back(
        {ctx.cmd.group_a, ctx.cmd.group_b, ci.point, ci.lower, ci.upper, ci.level, ci.iterations});
    return rep;
}

int cmd_ingest(Context& ctx) {
    if (ctx.cmd.in.empty() || ctx.cmd.to.empty()) throw UsageError("ingest needs --in and --to");
    const EmbeddingTable table = load_table(ctx.cmd.in);
    save_table(table, ctx.cmd.to);
    ctx.out << table.size() << " records, dim=" << table.dim() << "\n";
    return kExitOk;
}

// Reads the config block of a JSON or CSV report.
Json read_report_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open report '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    if (!text.empty() && text.front() == '#') {
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line))
            if (line.rfind("# config=", 0) == 0) return Json::parse(line.substr(9));
        throw Error("report '" + path + "' has no config line");
    }
    return Json::parse(text).at("config");
}

void add_global_options(CLI::App* sub, GlobalOptions& g) {
    sub->add_option("--seed", g.seed, "Global random seed");
    sub->add_option("--workers", g.workers, "Worker threads (0 = all cores); never changes results");
    sub->add_option("--alpha", g.alpha, "Significance level");
    sub->add_option("--permutations", g.permutations, "Permutation count R");
    sub->add_option("--kernel", g.kernel, "Kernel family")->check(CLI::IsMember({"rbf", "linear"}));
    sub->add_option("--bandwidth", g.bandwidth, "median | fixed:<sigma> | scaled:<multiplier>");
    sub->add_option("--reduce-dims", g.reduce_dims, "PCA target dimension");
    sub->add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--gram-mode", g.gram_mode, "auto | precompute | on_the_fly");
    sub->add_option("--out", g.out, "Report path (default stdout)");
}

}  // namespace

KernelSpec parse_kernel(const std::string& family, const std::string& bandwidth) {
    if (family == "linear") return KernelSpec::linear();
    if (family != "rbf") throw InvalidArgument("unknown kernel '" + family + "'");
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty()) throw InvalidArgument("bad bandwidth value '" + bandwidth + "'");
        return v;
    };
    KernelSpec spec;
    if (bandwidth == "median") {
        spec = KernelSpec::rbf_median();
    } else if (bandwidth.rfind("fixed:", 0) == 0) {
        spec = KernelSpec::rbf_fixed(number(bandwidth.substr(6)));
    } else if (bandwidth.rfind("scaled:", 0) == 0) {
        spec = KernelSpec::rbf_scaled(number(bandwidth.substr(7)));
    } else {
        throw InvalidArgument("--bandwidth must be median, fixed:<sigma> or scaled:<multiplier>");
    }
    spec.validate();
    return spec;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"distinct: kernel two-sample testing for embedding distributions", "distinct"};
    app.require_subcommand(1);
    Context ctx{{}, {}, canonical_args(args), out};
    auto& g = ctx.global;
    auto& c = ctx.cmd;

    auto* ingest = app.add_subcommand("ingest", "Validate a table and convert between csv and binary");
    ingest->add_option("--in", c.in, "Input table")->required();
    ingest->add_option("--to", c.to, "Output table (.csv or binary)")->required();

    auto* test = app.add_subcommand("test", "Permutation MMD test between two groups");
    test->add_option("--table", c.table, "Embedding table")->required();
    test->add_option("--table-b", c.table_b, "Second table (default: --table)");
    test->add_option("--group-a", c.group_a, "First group label")->required();
    test->add_option("--group-b", c.group_b, "Second group label")->required();
    test->add_option("--cap", c.cap, "Max items per group (0 = all)");

    auto* matrix = app.add_subcommand("matrix", "Pairwise MMD matrix with split-half diagonal");
    matrix->add_option("--table", c.table, "Embedding table")->required();
    matrix->add_option("--cap", c.cap, "Max items per group (default 500)");
    matrix->add_option("--groups", c.groups, "Subset of groups")->delimiter(',');

    auto* power = app.add_subcommand("power", "Rejection-rate curve over sample sizes");
    power->add_option("--table", c.table, "Embedding table")->required();
    power->add_option("--group-a", c.group_a, "First group label")->required();
    power->add_option("--group-b", c.group_b, "Second group label")->required();
    power->add_option("--sizes", c.sizes, "Sample sizes n")->delimiter(',');
    power->add_option("--trials", c.trials, "Trials per n");
    power->add_option("--target", c.target, "Target power for threshold n");

    auto* ablate = app.add_subcommand("ablate", "Kernel/bandwidth/dimensionality ablations and stability");
    ablate->add_option("--table", c.table, "Embedding table")->required();
    ablate->add_option("--group-a", c.group_a, "First group label")->required();
    ablate->add_option("--group-b", c.group_b, "Second group label")->required();
    ablate->add_option("--mode", c.mode, "kernel | bandwidth | dimensionality | stability");
    ablate->add_option("--sizes", c.sizes, "Sample sizes n")->delimiter(',');
    ablate->add_option("--trials", c.trials, "Trials per n");
    ablate->add_option("--multipliers", c.multipliers, "Bandwidth multipliers")->delimiter(',');
    ablate->add_option("--dims", c.dims, "Target dimensions")->delimiter(',');
    ablate->add_option("--sample-size", c.sample_size, "Per-group sample size (stability)");

    auto* perturb_cmd = app.add_subcommand("perturb", "Paired clean-vs-perturbed test");
    perturb_cmd->add_option("--table", c.table, "Embedding table")->required();
    perturb_cmd->add_option("--group", c.group, "Group label")->required();
    perturb_cmd->add_option("--kind", c.kind, "noise | watermark");
    perturb_cmd->add_option("--ratios", c.ratios, "SNR/SWR amplitude ratios")->delimiter(',');
    perturb_cmd->add_option("--grid-period", c.grid_period, "Watermark coordinate period");
    perturb_cmd->add_flag("--per-coordinate", c.per_coordinate, "Scale by per-coordinate signal std");
    perturb_cmd->add_option("--cap", c.cap, "Max clean items (0 = all)");

    auto* audit_cmd = app.add_subcommand("audit", "Nearest-neighbour memorization audit");
    audit_cmd->add_option("--candidates", c.candidates, "Candidate table")->required();
    audit_cmd->add_option("--reference", c.reference, "Reference table")->required();
    audit_cmd->add_option("--percentile", c.percentile, "Threshold percentile");

    auto* reduce_cmd = app.add_subcommand("reduce", "PCA-reduce a table (fit on all records)");
    reduce_cmd->add_option("--table", c.table, "Embedding table")->required();
    reduce_cmd->add_option("--to", c.to, "Output table")->required();

    auto* ci = app.add_subcommand("ci", "Bootstrap percentile confidence interval for MMD^2_u");
    ci->add_option("--table", c.table, "Embedding table")->required();
    ci->add_option("--group-a", c.group_a, "First group label")->required();
    ci->add_option("--group-b", c.group_b, "Second group label")->required();
    ci->add_option("--iterations", c.iterations, "Bootstrap iterations");
    ci->add_option("--level", c.level, "Confidence level");
    ci->add_option("--cap", c.cap, "Max items per group (0 = all)");

    auto* replay = app.add_subcommand("replay", "Re-run a report from its embedded config");
    replay->add_option("report", c.replay_path, "Report file (json or csv)")->required();

    for (auto* sub : {ingest, test, matrix, power, ablate, perturb_cmd, audit_cmd, reduce_cmd, ci, replay})
        add_global_options(sub, g);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (replay->parsed()) {
            const Json config = read_report_config(c.replay_path);
            auto replay_args = config.at("argv").get<std::vector<std::string>>();
            if (!replay_args.empty() && replay_args.front() == "replay") throw UsageError("cannot replay a replay");
            replay_args.push_back("--workers");
            replay_args.push_back(std::to_string(g.workers));
            if (!g.out.empty()) {
                replay_args.push_back("--out");
                replay_args.push_back(g.out);
            }
            return run_cli(replay_args, out, err);
        }
        if (ingest->parsed()) return cmd_ingest(ctx);

        const auto start = std::chrono::steady_clock::now();
        Report rep;
        if (test->parsed()) rep = cmd_test(ctx);
        else if (matrix->parsed()) rep = cmd_matrix(ctx);
        else if (power->parsed()) rep = cmd_power(ctx);
        else if (ablate->parsed()) rep = cmd_ablate(ctx);
        else if (perturb_cmd->parsed()) rep = cmd_perturb(ctx);
        else if (audit_cmd->parsed()) rep = cmd_audit(ctx);
        else if (reduce_cmd->parsed()) rep = cmd_reduce(ctx);
        else rep = cmd_ci(ctx);
        rep.runtime_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

        const std::string text = g.format == "csv" ? render_csv(rep) : render_json(rep);
        if (g.out.empty()) {
            out << text;
        } else {
            std::ofstream file(g.out, std::ios::binary | std::ios::trunc);
            if (!file) throw Error("cannot open '" + g.out + "' for writing");
            file << text;
        }
        return kExitOk;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace distinct
