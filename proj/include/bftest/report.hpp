#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "bftest/estimators.hpp"
#include "bftest/monte_carlo.hpp"
#include "bftest/restriction.hpp"
#include "bftest/statistics.hpp"

namespace bftest {

// CSV columns: k,n,statistic,rejections,valid_reps,excluded,empirical_size
void write_size_table_csv(const SizeTable& table, std::ostream& out);
// Reads the cells back; throws ConfigurationError on malformed input.
SizeTable read_size_table_csv(std::istream& in);

nlohmann::json to_json(const SizeTable& table);
// Rows are (k, n); columns are the statistics present in the table.
void write_size_table_pretty(const SizeTable& table, std::ostream& out);

nlohmann::json to_json(const TestReport& report);
nlohmann::json to_json(const FitResult& fit);
nlohmann::json to_json(const ConditionReport& report);
nlohmann::json to_json(const Vector& v);

}  // namespace bftest
