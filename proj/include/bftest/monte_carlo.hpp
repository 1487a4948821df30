#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bftest/model.hpp"
#include "bftest/random.hpp"
#include "bftest/statistics.hpp"

namespace bftest {

// Columns of the size study. The starred Wald and BF statistics test
// beta^k = 1 in the original coordinates; the BFc columns test
// beta*^k = 1 after the power-root reparametrization.
enum class Statistic : std::uint8_t { W, W_star, BF, BF_star, BFc_transform, BFc_direct, LM, D };

inline constexpr std::size_t kStatisticCount = 8;
inline constexpr std::array<Statistic, kStatisticCount> kAllStatistics = {
    Statistic::W,  Statistic::W_star,        Statistic::BF,         Statistic::BF_star,
    Statistic::BFc_transform, Statistic::BFc_direct, Statistic::LM, Statistic::D};

std::string_view label(Statistic statistic);
std::optional<Statistic> parse_statistic(std::string_view text);

struct SimulationConfig {
    std::vector<int> k_list = {5, 2, -2, -5};
    std::vector<std::size_t> n_list = {25, 50, 100, 500};
    std::size_t reps = 10000;
    double alpha = 0.05;
    Vector theta0 = Vector::Ones(2);  // (gamma, beta)
    double sigma2 = 1.0;
    std::uint64_t seed = 20240917;
    std::vector<Statistic> statistics{kAllStatistics.begin(), kAllStatistics.end()};
    // Covariates drawn once per n instead of once per replication.
    bool fixed_design = false;
    // Replication r of every k shares one dataset (keyed by seed, n, r).
    bool common_datasets = true;
    // Plug in RSS/(n-p) instead of the true sigma2.
    bool estimate_sigma2 = false;
    // Evaluation point of the power-restriction Jacobian in BF*.
    JacobianPoint bf_star_jacobian = JacobianPoint::unrestricted;
    // Worker threads; 0 picks the hardware concurrency. BFTEST_THREADS caps it.
    unsigned threads = 0;

    void validate() const;  // throws ConfigurationError
};

struct SizeCell {
    int k = 0;
    std::size_t n = 0;
    Statistic statistic = Statistic::W;
    std::uint64_t rejections = 0;
    std::uint64_t valid_reps = 0;
    std::uint64_t excluded = 0;

    double empirical_size() const;
};

// Per-(k, n) bookkeeping that is not a rejection rate.
struct CellSummary {
    int k = 0;
    std::size_t n = 0;
    std::uint64_t reps = 0;
    std::uint64_t negative_branch = 0;  // restricted fit of beta^k = 1 chose beta = -1
    std::array<std::uint64_t, kStatisticCount> negative_values{};
};

struct SizeTable {
    std::vector<SizeCell> cells;
    std::vector<CellSummary> summaries;

    const SizeCell* find(int k, std::size_t n, Statistic statistic) const;
};

/// X with i.i.d. U(0,1) entries (row-major draw order), y = X theta0 + eps
/// with eps i.i.d. N(0, sigma2). Known-variance model.
LinearGaussianModel generate_dataset(std::size_t n, const Vector& theta0, double sigma2, RandomStream& stream);
LinearGaussianModel generate_dataset(const Matrix& design, const Vector& theta0, double sigma2,
                                     RandomStream& stream);
Matrix generate_design(std::size_t n, std::size_t p, RandomStream& stream);

/// Stream for replication r of cell (k, n).
RandomStream replication_stream(const SimulationConfig& config, int k, std::size_t n, std::uint64_t r);

// Statistic values of one replication; nullopt marks an excluded value.
struct ReplicationOutcome {
    std::array<std::optional<double>, kStatisticCount> values;
    bool negative_branch = false;
};

ReplicationOutcome run_replication(int k, std::size_t n, std::uint64_t r, const SimulationConfig& config);

struct CellResult {
    std::vector<SizeCell> cells;  // one per configured statistic
    CellSummary summary;
};

CellResult run_cell(int k, std::size_t n, const SimulationConfig& config);
SizeTable run_experiment(const SimulationConfig& config);

/// Worker count after applying the BFTEST_THREADS cap.
unsigned resolve_thread_count(unsigned requested);

}  // namespace bftest
