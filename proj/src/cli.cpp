#include "prf/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <ostream>
#include <sstream>

#include "prf/bias_engine.hpp"
#include "prf/errors.hpp"
#include "prf/kernel.hpp"
#include "prf/oracles.hpp"
#include "prf/output.hpp"
#include "prf/rates.hpp"

namespace prf::cli {

namespace {

using json = nlohmann::ordered_json;

const std::vector<std::string> kCommands{"bias",  "rate-sweep",       "kernel", "check-moments",
                                         "estimation-error", "risk", "forest-size"};

template <class F, class... Config>
void for_each_field(F&& f, Config&... c) {
    f("command", c.command...);
    f("model", c.model...);
    f("fn", c.fn...);
    f("d", c.d...);
    f("k", c.k...);
    f("p", c.p...);
    f("grid", c.grid...);
    f("drop_largest", c.drop_largest...);
    f("q", c.q...);
    f("n_x", c.n_x...);
    f("n_u_tree", c.n_u_tree...);
    f("n_u_inf", c.n_u_inf...);
    f("groups", c.groups...);
    f("stratified", c.stratified...);
    f("border", c.border...);
    f("epsilon", c.epsilon...);
    f("n", c.n...);
    f("sigma", c.sigma...);
    f("n_rep", c.n_rep...);
    f("n_prime", c.n_prime...);
    f("holdout_sigma", c.holdout_sigma...);
    f("mtry", c.mtry...);
    f("weights", c.weights...);
    f("x", c.x...);
    f("reps", c.reps...);
    f("n_u", c.n_u...);
    f("t_intervals", c.t_intervals...);
    f("seed", c.seed...);
    f("out", c.out...);
    f("plot", c.plot...);
}

json config_json(const ExperimentConfig& cfg) {
    json j = json::object();
    for_each_field([&](const char* key, const auto& v) { j[key] = v; }, cfg);
    return j;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        cur.erase(0, cur.find_first_not_of(" \t"));
        cur.erase(cur.find_last_not_of(" \t") + 1);
        if (!cur.empty()) parts.push_back(cur);
    }
    return parts;
}

double parse_double(const std::string& s, const std::string& what) {
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParameterError("cannot parse " + what + " value '" + s + "'");
    }
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    for (const auto& part : split(s, ',')) out.push_back(parse_double(part, what));
    if (out.empty()) throw ParameterError(what + " list is empty");
    return out;
}

std::vector<std::size_t> parse_grid(const std::string& s, bool drop_largest) {
    std::vector<std::size_t> grid;
    const auto colon = s.find(':');
    auto to_size = [](const std::string& t) {
        const double v = parse_double(t, "grid");
        if (!(v >= 1.0) || v != std::floor(v)) throw ParameterError("grid values must be positive integers");
        return static_cast<std::size_t>(v);
    };
    if (colon != std::string::npos) {
        const std::size_t lo = to_size(s.substr(0, colon)), hi = to_size(s.substr(colon + 1));
        if (!std::has_single_bit(lo) || !std::has_single_bit(hi) || lo > hi) {
            throw ParameterError("grid range a:b needs powers of two with a <= b");
        }
        for (std::size_t k = lo; k <= hi; k *= 2) grid.push_back(k);
    } else {
        for (double v : parse_list(s, "grid")) grid.push_back(to_size(format_number(v)));
    }
    if (drop_largest && !grid.empty()) grid.pop_back();
    if (grid.size() < 3) throw ParameterError("a rate sweep needs at least three grid values");
    return grid;
}

// `smallest_k` is the smallest size parameter the run uses; auto drops to the
// full cube when the PURF border would cover the whole interval there.
BorderPolicy border_policy(const ExperimentConfig& cfg, ModelKind model, std::size_t smallest_k = 0) {
    if (cfg.border == "full") return BorderPolicy::full();
    if (cfg.border == "toy") return BorderPolicy::toy();
    if (cfg.border == "purf") return BorderPolicy::purf();
    if (cfg.border == "custom") return BorderPolicy::custom(cfg.epsilon);
    if (cfg.border == "auto") {
        if (model == ModelKind::Toy) return BorderPolicy::toy();
        if (model == ModelKind::Purf) {
            const double k = static_cast<double>(smallest_k);
            if (smallest_k > 1 && 4.0 * std::log(k) / k >= 0.5) return BorderPolicy::full();
            return BorderPolicy::purf();
        }
        return BorderPolicy::full();
    }
    throw ParameterError("unknown border '" + cfg.border + "'; valid choices: auto full toy purf custom");
}

void apply_model_extras(const ExperimentConfig& cfg, ModelSpec& spec) {
    spec.n_prime = static_cast<std::size_t>(cfg.n_prime);
    spec.sigma = cfg.holdout_sigma;
    spec.mtry = static_cast<std::size_t>(cfg.mtry);
    if (!cfg.weights.empty()) spec.weights = parse_list(cfg.weights, "weights");
}

ModelSpec model_spec(const ExperimentConfig& cfg) {
    const ModelKind kind = parse_model(cfg.model);
    ModelSpec spec;
    const bool depth_model = kind == ModelKind::Bprf || kind == ModelKind::Midpoint;
    if (cfg.p >= 0) {
        if (!depth_model) throw ParameterError("--p applies to bprf and midpoint only; use --k");
        spec.kind = kind;
        spec.k = static_cast<std::size_t>(cfg.p);
        spec.dim = static_cast<std::size_t>(cfg.d);
    } else if (cfg.k >= 0) {
        if (depth_model) {
            spec = spec_for_k(kind, static_cast<std::size_t>(cfg.k), static_cast<std::size_t>(cfg.d));
        } else {
            spec.kind = kind;
            spec.k = static_cast<std::size_t>(cfg.k);
            spec.dim = static_cast<std::size_t>(cfg.d);
        }
    } else {
        throw ParameterError("this command needs --k (or --p for bprf and midpoint)");
    }
    apply_model_extras(cfg, spec);
    spec.validate();
    return spec;
}

void check_config(const ExperimentConfig& cfg) {
    if (std::find(kCommands.begin(), kCommands.end(), cfg.command) == kCommands.end()) {
        std::string msg = "unknown command '" + cfg.command + "'; valid choices:";
        for (const auto& c : kCommands) msg += " " + c;
        throw ParameterError(msg);
    }
    if (cfg.k >= 0 && cfg.p >= 0) throw ParameterError("--k and --p are mutually exclusive");
    if (cfg.border == "custom" && cfg.epsilon < 0.0) throw ParameterError("--border custom needs --epsilon");
    if (cfg.border != "custom" && cfg.epsilon >= 0.0) throw ParameterError("--epsilon needs --border custom");
    if (cfg.d < 1) throw ParameterError("--d must be at least 1");
    for (long v : {cfg.n_x, cfg.n_u_tree, cfg.groups, cfg.n, cfg.n_rep, cfg.reps, cfg.n_u, cfg.t_intervals}) {
        if (v < 1) throw ParameterError("counts and budgets must be positive");
    }
    if (cfg.n_u_inf < 0 || cfg.n_prime < 0 || cfg.mtry < 0) throw ParameterError("budgets must be non-negative");
    (void)parse_model(cfg.model);
    (void)parse_function(cfg.fn);
}

json estimate_json(const Estimate& e) { return json{{"value", e.value}, {"se", e.se}}; }

std::string q_label(double q) { return std::isfinite(q) ? format_number(q) : "inf"; }

json terms_json(const BiasTerms& t) {
    json j;
    j["B1"] = estimate_json(t.b1);
    j["Binf"] = estimate_json(t.binf);
    j["Binf_uncorrected"] = t.binf_raw;
    j["Vtree"] = estimate_json(t.vtree);
    j["Vtree_direct"] = estimate_json(t.vtree_direct);
    j["identity_residual"] = estimate_json(t.identity_residual);
    json bq = json::array();
    for (const auto& b : t.bq) {
        json row{{"q", q_label(b.q)}, {"formula", estimate_json(b.formula)}};
        if (b.direct) row["direct"] = estimate_json(*b.direct);
        bq.push_back(row);
    }
    j["Bq"] = bq;
    return j;
}

json model_json(const ModelSpec& s) {
    json j{{"kind", std::string(model_name(s.kind))}, {"k", s.k}, {"d", s.dim}, {"leaves", s.leaf_count()}};
    if (s.kind == ModelKind::Holdout) {
        j["n_prime"] = s.effective_n_prime();
        j["sigma"] = s.sigma;
        j["mtry"] = s.effective_mtry();
    }
    if (s.kind == ModelKind::Midpoint) j["weights"] = s.effective_weights();
    return j;
}

json report_json(const BiasReport& r) {
    json j;
    j["model"] = model_json(r.model);
    j["function"] = r.function;
    j["seed"] = r.seed;
    j["n_x"] = r.n_x;
    j["n_u_tree"] = r.n_u_tree;
    j["n_u_inf"] = r.n_u_inf;
    j["groups"] = r.groups;
    j["x_sampling"] = r.stratified_x ? "stratified" : "iid";
    j["full"] = terms_json(r.full);
    if (r.borderless) {
        j["epsilon"] = r.epsilon;
        j["borderless"] = terms_json(*r.borderless);
    }
    return j;
}

void add_terms_rows(CsvTable& csv, const std::string& region, const BiasTerms& t) {
    auto row = [&](const std::string& name, const Estimate& e) {
        if (!std::isfinite(e.value) || !std::isfinite(e.se)) throw NumericError("non-finite value in CSV output");
        csv.add_row({region, name, format_number(e.value), format_number(e.se)});
    };
    row("B1", t.b1);
    row("Binf", t.binf);
    row("Vtree", t.vtree);
    row("Vtree_direct", t.vtree_direct);
    row("identity_residual", t.identity_residual);
    for (const auto& b : t.bq) {
        row("Bq(q=" + q_label(b.q) + ")", b.formula);
        if (b.direct) row("Bq_direct(q=" + q_label(b.q) + ")", *b.direct);
    }
}

BiasBudget bias_budget(const ExperimentConfig& cfg) {
    BiasBudget b;
    b.n_x = static_cast<std::size_t>(cfg.n_x);
    b.n_u_tree = static_cast<std::size_t>(cfg.n_u_tree);
    b.n_u_inf = static_cast<std::size_t>(cfg.n_u_inf);
    b.groups = static_cast<std::size_t>(cfg.groups);
    b.stratified_x = cfg.stratified;
    return b;
}

struct Outcome {
    CsvTable csv{{"placeholder"}};
    json results;
    std::string plot;
    std::string summary;
};

std::optional<json> theory_json(const ModelSpec& spec, const RegressionFn& f, const BorderPolicy& policy) {
    try {
        const auto t = theoretical_bias(spec, f, policy);
        json j{{"Binf", t.binf}, {"Vtree", t.vtree}, {"epsilon", t.epsilon}};
        if (t.binf_band) j["Binf_band"] = *t.binf_band;
        if (t.vtree_band) j["Vtree_band"] = *t.vtree_band;
        if (t.binf_upper) j["Binf_upper"] = *t.binf_upper;
        return j;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

Outcome run_bias(const ExperimentConfig& cfg) {
    const auto spec = model_spec(cfg);
    const RegressionFn f(parse_function(cfg.fn), spec.dim);
    const auto policy = border_policy(cfg, spec.kind, spec.k);
    const auto q = parse_list(cfg.q, "q");
    const auto report = estimate_bias(spec, f, policy, q, bias_budget(cfg), cfg.seed);
    Outcome o;
    o.csv = CsvTable({"region", "quantity", "estimate", "stderr"});
    add_terms_rows(o.csv, "full", report.full);
    if (report.borderless) add_terms_rows(o.csv, "borderless", *report.borderless);
    o.results = report_json(report);
    if (auto th = theory_json(spec, f, BorderPolicy::full())) o.results["theory_full"] = *th;
    if (policy.borderless()) {
        if (auto th = theory_json(spec, f, policy)) o.results["theory_borderless"] = *th;
    }
    std::ostringstream os;
    os << "B1 = " << report.full.b1.value << " (se " << report.full.b1.se << "), Binf = " << report.full.binf.value
       << " (se " << report.full.binf.se << "), n_u_inf = " << report.n_u_inf << "\n";
    o.summary = os.str();
    return o;
}

Outcome run_rate_sweep_cmd(const ExperimentConfig& cfg, const std::string& csv_name) {
    const ModelKind kind = parse_model(cfg.model);
    const auto grid = parse_grid(cfg.grid, cfg.drop_largest);
    const RegressionFn f(parse_function(cfg.fn), static_cast<std::size_t>(cfg.d));
    const auto policy = border_policy(cfg, kind, *std::min_element(grid.begin(), grid.end()));
    ModelSpec base;
    apply_model_extras(cfg, base);
    const auto sweep = run_rate_sweep(kind, static_cast<std::size_t>(cfg.d), f, grid, policy, bias_budget(cfg),
                                      cfg.seed, &base);
    const bool bl = !sweep.reports.empty() && sweep.reports.front().borderless.has_value();
    std::vector<std::string> header{"k", "B1", "B1_se", "Binf", "Binf_se", "Vtree", "Vtree_se"};
    if (bl) {
        for (const char* h : {"B1_borderless", "B1_borderless_se", "Binf_borderless", "Binf_borderless_se"}) {
            header.push_back(h);
        }
    }
    Outcome o;
    o.csv = CsvTable(header);
    json reports = json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& r = sweep.reports[i];
        std::vector<double> row{static_cast<double>(grid[i]), r.full.b1.value,   r.full.b1.se,   r.full.binf.value,
                                r.full.binf.se,               r.full.vtree.value, r.full.vtree.se};
        if (bl) {
            for (double v : {r.borderless->b1.value, r.borderless->b1.se, r.borderless->binf.value,
                             r.borderless->binf.se}) {
                row.push_back(v);
            }
        }
        o.csv.add_numeric_row(row);
        reports.push_back(report_json(r));
    }
    json fits = json::object();
    std::ostringstream os;
    for (const auto& sf : sweep.fits) {
        if (sf.fit) {
            fits[sf.label] = json{{"slope", sf.fit->slope}, {"intercept", sf.fit->intercept},
                                  {"r_squared", sf.fit->r_squared}};
            os << sf.label << " slope = " << sf.fit->slope << " (R^2 " << sf.fit->r_squared << ")\n";
        } else {
            fits[sf.label] = json{{"error", sf.error}};
            os << sf.label << ": " << sf.error << "\n";
        }
    }
    o.results["k_grid"] = grid;
    o.results["fits"] = fits;
    try {
        const auto ex = rate_exponents(kind, static_cast<std::size_t>(cfg.d));
        json e{{"tree", ex.tree}, {"forest", ex.forest}};
        if (ex.forest_borderless) e["forest_borderless"] = *ex.forest_borderless;
        o.results["theoretical_exponents"] = e;
    } catch (const UnsupportedError& e) {
        o.results["theoretical_exponents"] = e.what();
    }
    o.results["reports"] = reports;
    std::vector<PlotSeries> series{{1, 2, "tree"}, {1, 4, "infinite forest"}};
    if (bl) {
        series.push_back({1, 8, "tree, borderless"});
        series.push_back({1, 10, "infinite forest, borderless"});
    }
    o.plot = gnuplot_script(csv_name, cfg.out + ".png", cfg.model + " / " + cfg.fn, series, true);
    o.summary = os.str();
    return o;
}

Outcome run_kernel(const ExperimentConfig& cfg, const std::string& csv_name) {
    const auto spec = model_spec(cfg);
    const double x = parse_double(cfg.x, "x");
    const auto grid = uniform_grid(static_cast<std::size_t>(cfg.t_intervals));
    const auto table = estimate_kernel(spec, x, grid, static_cast<std::size_t>(cfg.n_u), cfg.seed);
    Outcome o;
    o.csv = CsvTable({"t", "h_estimate", "stderr"});
    for (std::size_t i = 0; i < grid.size(); ++i) o.csv.add_numeric_row({grid[i], table.h[i], table.se[i]});
    o.results["model"] = model_json(spec);
    o.results["x"] = x;
    o.results["n_u"] = table.n_u;
    o.results["mass"] = estimate_json(table.mass);
    o.plot = gnuplot_script(csv_name, cfg.out + ".png", "kernel at x = " + cfg.x, {{1, 2, cfg.model}}, false);
    std::ostringstream os;
    os << "trapezoid mass = " << table.mass.value << " (se " << table.mass.se << ")\n";
    o.summary = os.str();
    return o;
}

Outcome run_check_moments(const ExperimentConfig& cfg) {
    const auto spec = model_spec(cfg);
    auto x = parse_list(cfg.x, "x");
    if (x.size() == 1 && spec.dim > 1) x.assign(spec.dim, x[0]);
    const auto closed = closed_form_moments(spec, x);
    const auto mc = sample_moments(spec, x, static_cast<std::size_t>(cfg.reps), cfg.seed);
    Outcome o;
    o.csv = CsvTable({"moment", "kind", "closed_form", "mc_mean", "mc_se", "z"});
    double max_abs_z = 0.0;
    bool all_ok = true;
    json rows = json::array();
    for (const auto& c : moment_table(closed)) {
        const auto it = std::find_if(mc.begin(), mc.end(), [&](const MomentSample& m) { return m.name == c.name; });
        if (it == mc.end()) continue;
        const double z = it->se > 0.0 ? (it->mean - c.value) / it->se : (it->mean == c.value ? 0.0 : 1e300);
        const bool ok = c.is_upper_bound ? z < 4.0 : std::abs(z) < 4.0;
        all_ok = all_ok && ok;
        if (!c.is_upper_bound) max_abs_z = std::max(max_abs_z, std::abs(z));
        o.csv.add_row({c.name, c.is_upper_bound ? "upper_bound" : "exact", format_number(c.value),
                       format_number(it->mean), format_number(it->se), format_number(z)});
        rows.push_back(json{{"moment", c.name}, {"closed_form", c.value}, {"mc_mean", it->mean}, {"mc_se", it->se},
                            {"z", z}, {"upper_bound", c.is_upper_bound}});
    }
    o.results["model"] = model_json(spec);
    o.results["x"] = x;
    o.results["reps"] = cfg.reps;
    o.results["max_abs_z"] = max_abs_z;
    o.results["all_within_4se"] = all_ok;
    o.results["moments"] = rows;
    std::ostringstream os;
    os << "max |z| = " << max_abs_z << (all_ok ? " (all within 4 SE)" : " (some moment outside 4 SE)") << "\n";
    o.summary = os.str();
    return o;
}

Outcome run_estimation_error(const ExperimentConfig& cfg) {
    const auto spec = model_spec(cfg);
    const RegressionFn f(parse_function(cfg.fn), spec.dim);
    EstimationErrorBudget b;
    b.n_rep = static_cast<std::size_t>(cfg.n_rep);
    b.n_x = static_cast<std::size_t>(cfg.n_x);
    const auto qs = parse_list(cfg.q, "q");
    if (qs.size() != 1 || !std::isfinite(qs[0]) || qs[0] < 1.0) {
        throw ParameterError("estimation-error takes a single finite --q");
    }
    const auto r = estimate_estimation_error(spec, f, static_cast<std::size_t>(cfg.n), cfg.sigma,
                                             static_cast<std::size_t>(qs[0]), b, cfg.seed);
    Outcome o;
    o.csv = CsvTable({"quantity", "value"});
    o.csv.add_row({"mc_estimate", format_number(r.mc.value)});
    o.csv.add_row({"mc_stderr", format_number(r.mc.se)});
    o.csv.add_row({"lower_bound", format_number(r.lower)});
    o.csv.add_row({"upper_bound", format_number(r.upper)});
    if (r.lipschitz_upper) o.csv.add_row({"lipschitz_upper_bound", format_number(*r.lipschitz_upper)});
    o.results["model"] = model_json(spec);
    o.results["mc_estimate"] = estimate_json(r.mc);
    o.results["lower_bound"] = r.lower;
    o.results["lower_bound_degenerate"] = r.lower_degenerate;
    o.results["upper_bound"] = r.upper;
    if (r.lipschitz_upper) o.results["lipschitz_upper_bound"] = *r.lipschitz_upper;
    o.results["cells"] = r.cells;
    o.results["expected_exp_sum"] = estimate_json(r.exp_sum);
    o.results["expected_diam2_sum"] = estimate_json(r.diam2_sum);
    std::ostringstream os;
    os << "estimation error = " << r.mc.value << " in [" << r.lower << ", " << r.upper << "]\n";
    o.summary = os.str();
    return o;
}

Outcome run_risk(const ExperimentConfig& cfg) {
    const auto spec = model_spec(cfg);
    const RegressionFn f(parse_function(cfg.fn), spec.dim);
    const auto qs = parse_list(cfg.q, "q");
    if (qs.size() != 1 || !std::isfinite(qs[0]) || qs[0] < 1.0) throw ParameterError("risk takes a single finite --q");
    RiskBudget b;
    b.n_rep = static_cast<std::size_t>(cfg.n_rep);
    b.n_x = static_cast<std::size_t>(cfg.n_x);
    const auto r = estimate_risk(spec, f, static_cast<std::size_t>(cfg.n), cfg.sigma, static_cast<std::size_t>(qs[0]),
                                 b, cfg.seed);
    Outcome o;
    o.csv = CsvTable({"quantity", "estimate", "stderr"});
    for (const auto& [name, e] : {std::pair<const char*, Estimate>{"risk", r.risk}, {"bias_part", r.bias_part},
                                  {"variance_part", r.variance_part}, {"residual", r.residual}}) {
        o.csv.add_row({name, format_number(e.value), format_number(e.se)});
        o.results[name] = estimate_json(e);
    }
    o.results["model"] = model_json(spec);
    std::ostringstream os;
    os << "risk = " << r.risk.value << " (se " << r.risk.se << ")\n";
    o.summary = os.str();
    return o;
}

Outcome run_forest_size(const ExperimentConfig& cfg) {
    const auto spec = model_spec(cfg);
    const RegressionFn f(parse_function(cfg.fn), spec.dim);
    const auto q = parse_list(cfg.q, "q");
    const auto curve = forest_size_curve(spec, f, q, bias_budget(cfg), cfg.seed);
    Outcome o;
    o.csv = CsvTable({"q", "inv_q", "Bq_formula", "Bq_formula_se", "Bq_direct", "Bq_direct_se"});
    json rows = json::array();
    for (const auto& r : curve.rows) {
        const double inv = 1.0 / r.q;
        o.csv.add_row({q_label(r.q), format_number(inv), format_number(r.formula.value), format_number(r.formula.se),
                       r.direct ? format_number(r.direct->value) : "", r.direct ? format_number(r.direct->se) : ""});
        json row{{"q", q_label(r.q)}, {"formula", estimate_json(r.formula)}};
        if (r.direct) row["direct"] = estimate_json(*r.direct);
        rows.push_back(row);
    }
    o.results["bias"] = report_json(curve.bias);
    o.results["rows"] = rows;
    o.results["q_star"] = curve.q_star ? json(*curve.q_star) : json(nullptr);
    o.results["slope_direct"] = estimate_json(curve.slope_direct);
    std::ostringstream os;
    os << "Vtree = " << curve.bias.full.vtree.value << ", direct slope in 1/q = " << curve.slope_direct.value << "\n";
    o.summary = os.str();
    return o;
}

std::string describe(const std::string& key) {
    static const std::vector<std::pair<std::string, std::string>> text{
        {"model", "toy | purf | bprf | ubprf | midpoint | holdout"},
        {"fn", "sinusoidal | abs | sum | friedman1"},
        {"d", "input dimension"},
        {"k", "size parameter (splits, leaves, or a power of two for depth models)"},
        {"p", "depth for bprf and midpoint"},
        {"grid", "k grid: a:b over powers of two, or a list"},
        {"drop_largest", "drop the largest k of the grid"},
        {"q", "forest sizes, e.g. 1,4,inf"},
        {"n_x", "x points per region"},
        {"n_u_tree", "partitions for the single-tree bias"},
        {"n_u_inf", "partitions for the infinite forest (0 picks the model default)"},
        {"groups", "partition groups and x batches for standard errors"},
        {"stratified", "jittered-grid x points (d = 1)"},
        {"border", "auto | full | toy | purf | custom"},
        {"epsilon", "border width for --border custom"},
        {"n", "sample size"},
        {"sigma", "noise standard deviation"},
        {"n_rep", "data replicates"},
        {"n_prime", "hold-out sample size (0 means k^2)"},
        {"holdout_sigma", "hold-out noise standard deviation"},
        {"mtry", "candidate coordinates per split (0 means max(d/3, 1))"},
        {"weights", "midpoint split-coordinate weights"},
        {"x", "anchor point(s), comma separated"},
        {"reps", "partitions for check-moments"},
        {"n_u", "partitions for kernel"},
        {"t_intervals", "kernel grid intervals"},
        {"seed", "master seed"},
        {"out", "output prefix"},
    };
    for (const auto& [k, v] : text) {
        if (k == key) return v;
    }
    return {};
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return config_from_json(buf.str());
}

// Config file first, then flags given on the command line.
ExperimentConfig parse_args(const std::vector<std::string>& args, bool& help, std::string& help_text) {
    const std::string command = args.at(0);
    CLI::App app{"prf_lab " + command, "prf_lab"};
    std::string config_path;
    app.add_option("--config", config_path, "flat JSON configuration file");
    bool no_plot = false;
    app.add_flag("--no-plot", no_plot, "skip the gnuplot script");
    ExperimentConfig flags;
    std::vector<std::pair<std::string, CLI::Option*>> options;
    for_each_field(
        [&](const char* key, auto& field) {
            using T = std::decay_t<decltype(field)>;
            std::string name = key;
            if (name == "command" || name == "plot") return;
            std::string dashed = name;
            std::replace(dashed.begin(), dashed.end(), '_', '-');
            std::string opt = "--" + dashed;
            if (dashed != name) opt += ",--" + name;
            CLI::Option* o = nullptr;
            if constexpr (std::is_same_v<T, bool>) {
                o = app.add_flag(opt, field, describe(name));
            } else {
                o = app.add_option(opt, field, describe(name));
            }
            options.emplace_back(name, o);
        },
        flags);
    help_text = app.help();
    std::vector<std::string> rest(args.rbegin(), args.rend() - 1);
    try {
        app.parse(rest);
    } catch (const CLI::CallForHelp&) {
        help = true;
        return {};
    } catch (const CLI::ParseError& e) {
        throw ParameterError(e.what());
    }

    ExperimentConfig cfg;
    if (!config_path.empty()) {
        cfg = load_config_file(config_path);
        if (!cfg.command.empty() && cfg.command != command) {
            throw ParameterError("config file is for command '" + cfg.command + "', not '" + command + "'");
        }
    }
    cfg.command = command;
    for_each_field(
        [&](const char* key, auto& target, const auto& given) {
            const auto it = std::find_if(options.begin(), options.end(), [&](const auto& o) { return o.first == key; });
            if (it != options.end() && it->second->count() > 0) target = given;
        },
        cfg, flags);
    if (no_plot) cfg.plot = false;
    if (cfg.out.empty()) {
        cfg.out = "prf_" + command;
        std::replace(cfg.out.begin(), cfg.out.end(), '-', '_');
    }
    return cfg;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ParameterError("cannot write '" + path + "'");
    os << text;
    if (!os) throw ParameterError("failed writing '" + path + "'");
}

std::string file_name(const std::string& path) {
    const auto slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

Outcome dispatch(const ExperimentConfig& cfg) {
    const std::string csv_name = file_name(cfg.out) + ".csv";
    if (cfg.command == "bias") return run_bias(cfg);
    if (cfg.command == "rate-sweep") return run_rate_sweep_cmd(cfg, csv_name);
    if (cfg.command == "kernel") return run_kernel(cfg, csv_name);
    if (cfg.command == "check-moments") return run_check_moments(cfg);
    if (cfg.command == "estimation-error") return run_estimation_error(cfg);
    if (cfg.command == "risk") return run_risk(cfg);
    return run_forest_size(cfg);
}

std::string usage() {
    std::string u = "usage: prf_lab <command> [options]\ncommands:";
    for (const auto& c : kCommands) u += " " + c;
    return u + "\nrun 'prf_lab <command> --help' for the options of a command\n";
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2); }

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParameterError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParameterError("config must be a flat JSON object");
    std::vector<std::string> known;
    ExperimentConfig cfg;
    for_each_field([&](const char* key, const auto&) { known.emplace_back(key); }, cfg);
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ParameterError("unknown config key '" + key + "'");
        }
    }
    for_each_field(
        [&](const char* key, auto& field) {
            if (!j.contains(key)) return;
            try {
                j.at(key).get_to(field);
            } catch (const json::exception&) {
                throw ParameterError(std::string("config key '") + key + "' has the wrong type");
            }
        },
        cfg);
    return cfg;
}

std::vector<std::string> command_names() { return kCommands; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    if (args.empty()) {
        err << usage();
        return kExitConfig;
    }
    if (args[0] == "--help" || args[0] == "-h") {
        out << usage();
        return kExitOk;
    }
    if (args[0] == "--version") {
        out << kVersion << "\n";
        return kExitOk;
    }
    ExperimentConfig cfg;
    try {
        cfg.command = args[0];
        check_config(cfg);
        bool help = false;
        std::string help_text;
        cfg = parse_args(args, help, help_text);
        if (help) {
            out << help_text;
            return kExitOk;
        }
        check_config(cfg);
        if (cfg.command != "rate-sweep") (void)model_spec(cfg);
        (void)border_policy(cfg, parse_model(cfg.model));
    } catch (const std::exception& e) {
        err << "prf_lab: configuration error: " << e.what() << "\n";
        return kExitConfig;
    }

    const auto started = std::chrono::steady_clock::now();
    try {
        Outcome o = dispatch(cfg);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        json doc;
        doc["schema_version"] = kSchemaVersion;
        doc["version"] = kVersion;
        doc["command"] = cfg.command;
        doc["config"] = config_json(cfg);
        doc["results"] = o.results;
        doc["wall_time_s"] = wall;
        write_file(cfg.out + ".csv", o.csv.str());
        write_file(cfg.out + ".json", doc.dump(2) + "\n");
        if (cfg.plot && !o.plot.empty()) write_file(cfg.out + ".gp", o.plot);
        out << o.summary;
        out << "wrote " << cfg.out << ".csv and " << cfg.out << ".json\n";
        return kExitOk;
    } catch (const NumericError& e) {
        err << "prf_lab: numeric error: " << e.what() << "\n";
        if (!e.partial.empty()) err << e.partial << "\n";
        return kExitNumeric;
    } catch (const InvariantError& e) {
        err << "prf_lab: internal check failed: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const ParameterError& e) {
        err << "prf_lab: configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DomainError& e) {
        err << "prf_lab: configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const UnsupportedError& e) {
        err << "prf_lab: configuration error: " << e.what() << "\n";
        return kExitConfig;
    }
}

}  // namespace prf::cli
