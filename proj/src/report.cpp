#include "bftest/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include "bftest/error.hpp"

namespace bftest {

namespace {

using nlohmann::json;

std::string shortest(double v) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), v);
    return std::string(buffer, result.ptr);
}

// JSON has no inf/nan; those become strings.
json number(double v) {
    if (std::isfinite(v)) {
        return v;
    }
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

template <typename T>
T parse_number(const std::string& text, const char* column) {
    T value{};
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
        throw ConfigurationError(std::string("size table CSV: bad ") + column + " '" + text + "'");
    }
    return value;
}

constexpr const char* kCsvHeader = "k,n,statistic,rejections,valid_reps,excluded,empirical_size";

}  // namespace

void write_size_table_csv(const SizeTable& table, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const auto& c : table.cells) {
        out << c.k << ',' << c.n << ',' << label(c.statistic) << ',' << c.rejections << ',' << c.valid_reps << ','
            << c.excluded << ',' << shortest(c.empirical_size()) << '\n';
    }
}

SizeTable read_size_table_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw ConfigurationError("size table CSV: missing or unexpected header");
    }
    SizeTable table;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto fields = split_csv(line);
        if (fields.size() != 7) {
            throw ConfigurationError("size table CSV: expected 7 fields in '" + line + "'");
        }
        SizeCell c;
        c.k = parse_number<int>(fields[0], "k");
        c.n = parse_number<std::size_t>(fields[1], "n");
        const auto statistic = parse_statistic(fields[2]);
        if (!statistic) {
            throw ConfigurationError("size table CSV: unknown statistic '" + fields[2] + "'");
        }
        c.statistic = *statistic;
        c.rejections = parse_number<std::uint64_t>(fields[3], "rejections");
        c.valid_reps = parse_number<std::uint64_t>(fields[4], "valid_reps");
        c.excluded = parse_number<std::uint64_t>(fields[5], "excluded");
        table.cells.push_back(c);
    }
    return table;
}

json to_json(const SizeTable& table) {
    json cells = json::array();
    for (const auto& c : table.cells) {
        cells.push_back({{"k", c.k},
                         {"n", c.n},
                         {"statistic", std::string(label(c.statistic))},
                         {"rejections", c.rejections},
                         {"valid_reps", c.valid_reps},
                         {"excluded", c.excluded},
                         {"empirical_size", c.empirical_size()}});
    }
    json summaries = json::array();
    for (const auto& s : table.summaries) {
        json negatives = json::object();
        for (Statistic stat : kAllStatistics) {
            const auto count = s.negative_values[static_cast<std::size_t>(stat)];
            if (count > 0) {
                negatives[std::string(label(stat))] = count;
            }
        }
        summaries.push_back({{"k", s.k},
                             {"n", s.n},
                             {"reps", s.reps},
                             {"negative_branch", s.negative_branch},
                             {"negative_values", negatives}});
    }
    return {{"cells", cells}, {"summaries", summaries}};
}

void write_size_table_pretty(const SizeTable& table, std::ostream& out) {
    std::vector<Statistic> columns;
    std::vector<std::pair<int, std::size_t>> rows;
    std::map<std::pair<std::pair<int, std::size_t>, Statistic>, const SizeCell*> lookup;
    for (const auto& c : table.cells) {
        if (std::find(columns.begin(), columns.end(), c.statistic) == columns.end()) {
            columns.push_back(c.statistic);
        }
        const std::pair<int, std::size_t> row{c.k, c.n};
        if (std::find(rows.begin(), rows.end(), row) == rows.end()) {
            rows.push_back(row);
        }
        lookup[{row, c.statistic}] = &c;
    }

    constexpr int kWidth = 14;
    const int rule_width = 12 + kWidth * static_cast<int>(columns.size());
    const std::string rule(static_cast<std::size_t>(rule_width), '-');
    out << std::setw(5) << "k" << std::setw(7) << "n";
    for (Statistic s : columns) {
        out << std::setw(kWidth) << label(s);
    }
    out << '\n' << rule << '\n';

    std::uint64_t excluded_total = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& [k, n] = rows[i];
        const bool first_of_group = i == 0 || rows[i - 1].first != k;
        if (first_of_group && i > 0) {
            out << rule << '\n';
        }
        if (first_of_group) {
            out << std::setw(5) << k;
        } else {
            out << std::setw(5) << "";
        }
        out << std::setw(7) << n;
        for (Statistic s : columns) {
            const auto it = lookup.find({rows[i], s});
            if (it == lookup.end()) {
                out << std::setw(kWidth) << "-";
                continue;
            }
            excluded_total += it->second->excluded;
            std::ostringstream cell;
            cell << std::fixed << std::setprecision(4) << it->second->empirical_size();
            out << std::setw(kWidth) << cell.str();
        }
        out << '\n';
    }
    out << rule << '\n';
    if (excluded_total > 0) {
        out << "excluded replications (all cells): " << excluded_total << '\n';
    }
    for (const auto& s : table.summaries) {
        if (s.negative_branch > 0) {
            out << "k=" << s.k << " n=" << s.n << ": beta = -1 branch selected in " << s.negative_branch
                << " of " << s.reps << " restricted fits\n";
        }
    }
}

json to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(number(v(i)));
    }
    return out;
}

json to_json(const TestReport& report) {
    json conditions = json::object();
    for (const auto& [name, value] : report.diagnostics.condition_numbers) {
        conditions[name] = number(value);
    }
    json diagnostics = {{"evaluated_at", report.diagnostics.evaluated_at},
                        {"point", to_json(report.diagnostics.point)},
                        {"condition_numbers", conditions},
                        {"negative", report.diagnostics.negative},
                        {"notes", report.diagnostics.notes}};
    if (!report.diagnostics.variant.empty()) {
        diagnostics["variant"] = report.diagnostics.variant;
    }
    return {{"name", report.name},
            {"value", number(report.value)},
            {"df", report.df},
            {"p_value", number(report.p_value)},
            {"diagnostics", diagnostics}};
}

json to_json(const FitResult& fit) {
    json out = {{"theta", to_json(fit.theta)},
                {"objective", number(fit.objective)},
                {"feasibility", number(fit.feasibility)},
                {"stationarity", number(fit.stationarity)},
                {"converged", fit.converged},
                {"iterations", fit.iterations},
                {"path", fit.path}};
    if (fit.multiplier) {
        out["multiplier"] = to_json(*fit.multiplier);
    }
    if (fit.branch) {
        out["branch"] = *fit.branch;
    }
    return out;
}

json to_json(const ConditionReport& report) {
    json entries = json::array();
    for (const auto& e : report.entries) {
        json entry = {{"condition", e.condition},
                      {"residual", number(e.residual)},
                      {"tolerance", number(e.tolerance)},
                      {"pass", e.pass},
                      {"point", to_json(e.point)}};
        if (!e.note.empty()) {
            entry["note"] = e.note;
        }
        entries.push_back(entry);
    }
    return {{"theta", to_json(report.theta)},
            {"theta_star", to_json(report.theta_star)},
            {"all_pass", report.all_pass()},
            {"conditions", entries}};
}

}  // namespace bftest
