#include "bftest/cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "bftest/error.hpp"
#include "bftest/estimators.hpp"
#include "bftest/monte_carlo.hpp"
#include "bftest/report.hpp"
#include "bftest/statistics.hpp"

namespace bftest::cli {

namespace {

using nlohmann::json;

constexpr std::size_t kBetaIndex = 1;
constexpr std::uint64_t kAuditDatasetSeed = 1;
constexpr std::size_t kAuditDatasetSize = 100;

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

double parse_double(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    double value = 0.0;
    const auto result = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || result.ec != std::errc() || result.ptr != t.data() + t.size()) {
        throw ConfigurationError("cannot parse " + what + " '" + text + "'");
    }
    return value;
}

int parse_int(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    int value = 0;
    const auto result = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || result.ec != std::errc() || result.ptr != t.data() + t.size()) {
        throw ConfigurationError("cannot parse " + what + " '" + text + "'");
    }
    return value;
}

// "kind: a=1, b=2" -> (kind, {a: 1, b: 2})
std::pair<std::string, std::map<std::string, std::string>> split_spec(const std::string& spec) {
    const auto colon = spec.find(':');
    std::string kind = trim(spec.substr(0, colon));
    std::map<std::string, std::string> params;
    if (colon != std::string::npos) {
        std::stringstream ss(spec.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (trim(item).empty()) {
                continue;
            }
            const auto eq = item.find('=');
            if (eq == std::string::npos) {
                throw ConfigurationError("expected key=value in '" + spec + "'");
            }
            params[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
        }
    }
    return {kind, params};
}

int single_k(const std::map<std::string, std::string>& params, const std::string& spec) {
    if (params.size() != 1 || !params.count("k")) {
        throw ConfigurationError("expected exactly 'k=<int>' in '" + spec + "'");
    }
    const int k = parse_int(params.at("k"), "k");
    if (k == 0) {
        throw ConfigurationError("k must be nonzero");
    }
    return k;
}

Vector parse_point(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        values.push_back(parse_double(item, "point coordinate"));
    }
    if (values.empty()) {
        throw ConfigurationError("empty point");
    }
    return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigurationError("cannot open dataset '" + path + "'");
    }
    return read_dataset_csv(in);
}

// Writes to --output when given, otherwise to the command's stdout.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) {
                throw ConfigurationError("cannot open output '" + path + "'");
            }
        }
    }
    std::ostream& stream() { return file_ ? *file_ : fallback_; }

private:
    std::ostream& fallback_;
    std::unique_ptr<std::ofstream> file_;
};

json error_entry(const std::string& name, const Error& e) {
    return {{"name", name}, {"error", {{"kind", e.kind()}, {"message", e.what()}}}};
}

// -------------------------------------------------------------------------
// simulate
// -------------------------------------------------------------------------

struct SimulateArgs {
    std::uint64_t seed = SimulationConfig{}.seed;
    std::size_t reps = SimulationConfig{}.reps;
    std::vector<int> k;
    std::vector<std::size_t> n;
    double alpha = 0.05;
    std::string out = "table";
    std::string output;
    bool fixed_design = false;
    bool independent_datasets = false;
    bool estimate_sigma2 = false;
    std::string bfc_variant = "both";
    std::string bf_star_jacobian = "unrestricted";
    unsigned threads = 0;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
    SimulationConfig config;
    config.seed = a.seed;
    config.reps = a.reps;
    if (!a.k.empty()) {
        config.k_list = a.k;
    }
    if (!a.n.empty()) {
        config.n_list = a.n;
    }
    config.alpha = a.alpha;
    config.fixed_design = a.fixed_design;
    config.common_datasets = !a.independent_datasets;
    config.estimate_sigma2 = a.estimate_sigma2;
    config.bf_star_jacobian =
        a.bf_star_jacobian == "restricted" ? JacobianPoint::restricted : JacobianPoint::unrestricted;
    config.threads = a.threads;
    std::erase_if(config.statistics, [&](Statistic s) {
        return (s == Statistic::BFc_transform && a.bfc_variant == "direct") ||
               (s == Statistic::BFc_direct && a.bfc_variant == "transform");
    });
    config.validate();

    const SizeTable table = run_experiment(config);
    Sink sink(a.output, out);
    if (a.out == "csv") {
        write_size_table_csv(table, sink.stream());
    } else if (a.out == "json") {
        sink.stream() << to_json(table).dump(2) << '\n';
    } else {
        write_size_table_pretty(table, sink.stream());
    }
    return kExitOk;
}

// -------------------------------------------------------------------------
// test
// -------------------------------------------------------------------------

struct TestArgs {
    std::string data;
    std::string restriction;
    std::string reparam;
    double sigma2 = 1.0;
    bool estimate_sigma2 = false;
    std::string bf_jacobian = "restricted";
    std::string output;
};

int run_test(const TestArgs& a, std::ostream& out) {
    Dataset data = load_dataset(a.data);
    const auto p = static_cast<std::size_t>(data.X.cols());
    const Restriction restriction = parse_restriction_spec(a.restriction, p);
    std::optional<Reparametrization> reparam;
    if (!a.reparam.empty()) {
        reparam = parse_reparam_spec(a.reparam, p);
    }
    const LinearGaussianModel model = a.estimate_sigma2
                                          ? LinearGaussianModel::with_estimated_variance(data.X, data.y)
                                          : LinearGaussianModel(data.X, data.y, a.sigma2);

    const FitResult unrestricted = fit_unrestricted(model);
    const FitResult restricted = fit_restricted(model, restriction);
    const int df = static_cast<int>(restriction.q);

    json reports = json::array();
    auto add = [&](const std::string& name, auto&& compute) {
        try {
            reports.push_back(to_json(compute()));
        } catch (const Error& e) {
            reports.push_back(error_entry(name, e));
        }
    };
    add("W", [&] { return wald(model, restriction, unrestricted.theta); });
    add("BF", [&] {
        BfOptions options;
        options.jacobian_at =
            a.bf_jacobian == "unrestricted" ? JacobianPoint::unrestricted : JacobianPoint::restricted;
        return bf(model, restriction, unrestricted.theta, restricted.theta, options);
    });
    if (reparam) {
        const Restriction star = compose(restriction, *reparam);
        for (CorrectionVariant v : {CorrectionVariant::transform, CorrectionVariant::direct}) {
            add(std::string("BFc-") + to_string(v), [&] {
                return bf_corrected(model, star, *reparam, unrestricted.theta, restricted.theta, v);
            });
        }
    }
    add("LM", [&] { return lm(model, restriction, restricted.theta); });
    add("D", [&] { return distance(model, unrestricted.theta, restricted.theta, df); });

    json doc = {{"restriction", restriction.name},
                {"n", model.sample_size()},
                {"sigma2", model.sigma2()},
                {"unrestricted_fit", to_json(unrestricted)},
                {"restricted_fit", to_json(restricted)},
                {"reports", reports}};
    if (reparam) {
        doc["reparametrization"] = reparam->name;
    }
    Sink sink(a.output, out);
    sink.stream() << doc.dump(2) << '\n';
    return kExitOk;
}

// -------------------------------------------------------------------------
// audit
// -------------------------------------------------------------------------

struct AuditArgs {
    std::string pair;
    int k = 0;
    std::string point;
    std::string star_point;
    std::string data;
    double tolerance = 1e-7;
    std::string output;
};

int run_audit(const AuditArgs& a, std::ostream& out) {
    if (a.point.empty() == a.star_point.empty()) {
        throw ConfigurationError("give exactly one of --point and --star-point");
    }
    Restriction g;
    Restriction g_star;
    Reparametrization reparam;
    if (a.pair == "power") {
        if (a.k == 0) {
            throw ConfigurationError("the power pair needs a nonzero --k");
        }
        g = coefficient_restriction(2, kBetaIndex, 1.0);
        g_star = power_restriction(2, kBetaIndex, a.k);
        reparam = power_root_reparametrization(2, kBetaIndex, a.k);
    } else if (a.pair == "gregory-veall") {
        g = gregory_veall_restriction();
        g_star = gregory_veall_star_restriction();
        reparam = gregory_veall_reparametrization();
    } else if (a.pair == "identity") {
        g = coefficient_restriction(2, kBetaIndex, 1.0);
        g_star = g;
        reparam = identity_reparametrization(2);
    } else {
        throw ConfigurationError("unknown pair '" + a.pair + "'");
    }

    std::optional<LinearGaussianModel> model;
    if (!a.data.empty()) {
        Dataset data = load_dataset(a.data);
        if (data.X.cols() != 2) {
            throw ConfigurationError("audit datasets need exactly two covariates");
        }
        model.emplace(data.X, data.y, 1.0);
    } else {
        SimulationConfig defaults;
        defaults.seed = kAuditDatasetSeed;
        RandomStream stream = replication_stream(defaults, 1, kAuditDatasetSize, 0);
        model.emplace(generate_dataset(kAuditDatasetSize, defaults.theta0, 1.0, stream));
    }

    Vector theta;
    try {
        theta = a.point.empty() ? reparam.inverse(parse_point(a.star_point)) : parse_point(a.point);
    } catch (const DomainViolation& e) {
        throw ConfigurationError(e.what());
    }
    if (theta.size() != 2) {
        throw ConfigurationError("audit points have two coordinates");
    }
    AuditOptions options;
    options.tolerance = a.tolerance;
    ConditionReport report;
    try {
        report = audit_conditions(*model, g, g_star, reparam, theta, options);
    } catch (const DomainViolation& e) {
        throw ConfigurationError(e.what());
    }
    Sink sink(a.output, out);
    sink.stream() << to_json(report).dump(2) << '\n';
    return report.all_pass() ? kExitOk : kExitAuditFailed;
}

}  // namespace

// -------------------------------------------------------------------------
// Parsing helpers
// -------------------------------------------------------------------------

Dataset read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigurationError("dataset is empty");
    }
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string name;
        while (std::getline(ss, name, ',')) {
            header.push_back(trim(name));
        }
    }
    std::optional<std::size_t> y_column;
    std::map<int, std::size_t> x_columns;  // covariate number -> column
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& h = header[c];
        if (h == "y") {
            if (y_column) {
                throw ConfigurationError("duplicate column 'y'");
            }
            y_column = c;
        } else if (h.size() > 1 && h[0] == 'x') {
            const int j = parse_int(h.substr(1), "column name");
            if (j < 1 || !x_columns.emplace(j, c).second) {
                throw ConfigurationError("bad or duplicate covariate column '" + h + "'");
            }
        } else {
            throw ConfigurationError("unexpected column '" + h + "'");
        }
    }
    if (!y_column || x_columns.empty()) {
        throw ConfigurationError("dataset needs columns y, x1, x2, ...");
    }
    if (x_columns.rbegin()->first != static_cast<int>(x_columns.size())) {
        throw ConfigurationError("covariate columns must be x1..xp without gaps");
    }

    std::vector<std::vector<double>> rows;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) {
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            row.push_back(parse_double(field, "value on line " + std::to_string(line_number)));
        }
        if (row.size() != header.size()) {
            throw ConfigurationError("line " + std::to_string(line_number) + " has " + std::to_string(row.size()) +
                                     " fields, header has " + std::to_string(header.size()));
        }
        rows.push_back(std::move(row));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(x_columns.size());
    Dataset data{Matrix(n, p), Vector(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        data.y(i) = rows[static_cast<std::size_t>(i)][*y_column];
        for (const auto& [j, c] : x_columns) {
            data.X(i, j - 1) = rows[static_cast<std::size_t>(i)][c];
        }
    }
    return data;
}

Restriction parse_restriction_spec(const std::string& spec, std::size_t p) {
    const auto [kind, params] = split_spec(spec);
    if (kind == "linear") {
        if (params.size() != 1) {
            throw ConfigurationError("linear restriction takes one 'coef=value' pair: '" + spec + "'");
        }
        const auto& [name, value] = *params.begin();
        std::size_t index = 0;
        if (name == "beta") {
            index = kBetaIndex;
        } else if (name.size() > 1 && name[0] == 'x') {
            const int j = parse_int(name.substr(1), "coefficient");
            if (j < 1) {
                throw ConfigurationError("bad coefficient '" + name + "'");
            }
            index = static_cast<std::size_t>(j - 1);
        } else {
            throw ConfigurationError("unknown coefficient '" + name + "'");
        }
        if (index >= p) {
            throw ConfigurationError("coefficient '" + name + "' exceeds the number of covariates");
        }
        return coefficient_restriction(p, index, parse_double(value, "restriction value"));
    }
    if (kind == "power") {
        if (p <= kBetaIndex) {
            throw ConfigurationError("power restriction needs at least two covariates");
        }
        return power_restriction(p, kBetaIndex, single_k(params, spec));
    }
    throw ConfigurationError("unknown restriction '" + spec + "'");
}

Reparametrization parse_reparam_spec(const std::string& spec, std::size_t p) {
    const auto [kind, params] = split_spec(spec);
    if (kind == "power-root") {
        if (p <= kBetaIndex) {
            throw ConfigurationError("power-root reparametrization needs at least two covariates");
        }
        return power_root_reparametrization(p, kBetaIndex, single_k(params, spec));
    }
    if (kind == "identity" && params.empty()) {
        return identity_reparametrization(p);
    }
    throw ConfigurationError("unknown reparametrization '" + spec + "'");
}

// -------------------------------------------------------------------------
// Entry point
// -------------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bilinear form tests for (non)linear restrictions under extremum estimation", "bftest"};
    app.set_config("--config", "", "TOML configuration file ([simulate] section)");
    app.allow_config_extras(false);
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo empirical size study");
    simulate->add_option("--seed", sim.seed, "Random seed");
    simulate->add_option("--reps", sim.reps, "Replications per (k, n) cell");
    simulate->add_option("--k", sim.k, "Power exponents (repeatable)");
    simulate->add_option("--n", sim.n, "Sample sizes (repeatable)");
    simulate->add_option("--alpha", sim.alpha, "Nominal level");
    simulate->add_option("--out", sim.out, "Output format")->check(CLI::IsMember({"csv", "json", "table"}));
    simulate->add_option("--output", sim.output, "Output path (default stdout)");
    simulate->add_flag("--fixed-design", sim.fixed_design, "Draw covariates once per sample size");
    simulate->add_flag("--independent-datasets", sim.independent_datasets,
                       "Draw separate datasets for each k instead of sharing them");
    simulate->add_flag("--estimate-sigma2", sim.estimate_sigma2, "Plug in RSS/(n-p) for sigma2");
    simulate->add_option("--bfc-variant", sim.bfc_variant, "Corrected BF variants to report")
        ->check(CLI::IsMember({"transform", "direct", "both"}));
    simulate->add_option("--bf-star-jacobian", sim.bf_star_jacobian,
                         "Evaluation point of the restriction Jacobian in BF*")
        ->check(CLI::IsMember({"restricted", "unrestricted"}));
    simulate->add_option("--threads", sim.threads, "Worker threads (0 = hardware concurrency)");

    TestArgs test;
    auto* test_cmd = app.add_subcommand("test", "Test a restriction on a CSV dataset");
    test_cmd->add_option("--data", test.data, "CSV with columns y, x1, x2, ...")->required();
    test_cmd->add_option("--restriction", test.restriction, "'linear: beta=1' or 'power: k=<int>'")->required();
    test_cmd->add_option("--reparam", test.reparam, "'power-root: k=<int>' or 'identity'");
    test_cmd->add_option("--sigma2", test.sigma2, "Known error variance");
    test_cmd->add_flag("--estimate-sigma2", test.estimate_sigma2, "Plug in RSS/(n-p) for sigma2");
    test_cmd->add_option("--bf-jacobian", test.bf_jacobian, "Evaluation point of G in BF")
        ->check(CLI::IsMember({"restricted", "unrestricted"}));
    test_cmd->add_option("--output", test.output, "Output path (default stdout)");

    AuditArgs audit;
    auto* audit_cmd = app.add_subcommand("audit", "Audit the invariance conditions at a point");
    audit_cmd->add_option("--pair", audit.pair, "power, gregory-veall or identity")->required();
    audit_cmd->add_option("--k", audit.k, "Exponent for the power pair");
    audit_cmd->add_option("--point", audit.point, "theta, comma separated");
    audit_cmd->add_option("--star-point", audit.star_point, "theta* = phi(theta), comma separated");
    audit_cmd->add_option("--data", audit.data, "CSV dataset for the objective (default: synthetic)");
    audit_cmd->add_option("--tolerance", audit.tolerance, "Audit tolerance before scaling");
    audit_cmd->add_option("--output", audit.output, "Output path (default stdout)");

    // --config belongs to the root app but is accepted after the subcommand too.
    std::vector<std::string> ordered;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            ordered.push_back(args[i]);
            ordered.push_back(args[++i]);
        } else if (args[i].rfind("--config=", 0) == 0) {
            ordered.push_back(args[i]);
        } else {
            rest.push_back(args[i]);
        }
    }
    ordered.insert(ordered.end(), rest.begin(), rest.end());
    std::vector<const char*> argv;
    argv.push_back("bftest");
    for (const auto& a : ordered) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "bftest: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) {
            return run_simulate(sim, out);
        }
        if (test_cmd->parsed()) {
            return run_test(test, out);
        }
        return run_audit(audit, out);
    } catch (const ConfigurationError& e) {
        err << "bftest: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "bftest: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace bftest::cli
