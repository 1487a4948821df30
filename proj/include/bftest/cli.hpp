#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bftest/matrix.hpp"
#include "bftest/restriction.hpp"

namespace bftest::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitAuditFailed = 3;

/// Entry point shared by the bftest executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct Dataset {
    Matrix X;  // columns x1..xp
    Vector y;
};

/// CSV with a header naming y and x1..xp (any column order). Throws
/// ConfigurationError on malformed input.
Dataset read_dataset_csv(std::istream& in);

/// "linear: beta=1", "linear: x2=0.5", or "power: k=5" (beta is the x2
/// coefficient).
Restriction parse_restriction_spec(const std::string& spec, std::size_t p);
/// "power-root: k=5" or "identity".
Reparametrization parse_reparam_spec(const std::string& spec, std::size_t p);

}  // namespace bftest::cli
