#include "bftest/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>

#include "bftest/chisq.hpp"
#include "bftest/error.hpp"
#include "bftest/estimators.hpp"
#include "bftest/restriction.hpp"

namespace bftest {

namespace {

constexpr std::uint32_t kPurposeReplication = 1;
constexpr std::uint32_t kPurposeDesign = 2;
constexpr int kMaxAbsK = (1 << 23) - 1;
constexpr std::size_t kBetaIndex = 1;

std::size_t index_of(Statistic s) { return static_cast<std::size_t>(s); }

std::uint32_t stream_word3(const SimulationConfig& config, std::uint32_t purpose, int k) {
    const std::uint32_t k_part = config.common_datasets ? 0u : (static_cast<std::uint32_t>(k) & 0xFFFFFFu);
    return (purpose << 24) | k_part;
}

RandomStream design_stream(const SimulationConfig& config, int k, std::size_t n) {
    return RandomStream(config.seed, 0u, static_cast<std::uint32_t>(n), stream_word3(config, kPurposeDesign, k));
}

// Everything a replication needs that depends only on (k, n, config).
struct CellContext {
    int k;
    std::size_t n;
    const SimulationConfig& config;
    double critical;
    std::array<bool, kStatisticCount> wanted{};
    Restriction linear;
    Restriction power;
    Reparametrization root;
    std::optional<Matrix> design;

    CellContext(int k_, std::size_t n_, const SimulationConfig& cfg)
        : k(k_),
          n(n_),
          config(cfg),
          critical(cfg.alpha >= 1.0 ? 0.0 : chisq_critical_value(cfg.alpha, 1)),
          linear(coefficient_restriction(2, kBetaIndex, 1.0)),
          power(power_restriction(2, kBetaIndex, k_)),
          root(power_root_reparametrization(2, kBetaIndex, k_)) {
        for (Statistic s : cfg.statistics) {
            wanted[index_of(s)] = true;
        }
        if (cfg.fixed_design) {
            RandomStream stream = design_stream(cfg, k_, n_);
            design = generate_design(n_, 2, stream);
        }
    }

    bool rejects(double value) const { return config.alpha >= 1.0 || value > critical; }
};

ReplicationOutcome replicate(const CellContext& ctx, std::uint64_t r) {
    ReplicationOutcome out;
    const SimulationConfig& cfg = ctx.config;
    RandomStream stream = replication_stream(cfg, ctx.k, ctx.n, r);

    std::optional<LinearGaussianModel> model;
    Vector unrestricted;
    Vector restricted;
    try {
        LinearGaussianModel known = ctx.design ? generate_dataset(*ctx.design, cfg.theta0, cfg.sigma2, stream)
                                               : generate_dataset(ctx.n, cfg.theta0, cfg.sigma2, stream);
        if (cfg.estimate_sigma2) {
            model.emplace(LinearGaussianModel::with_estimated_variance(known.design(), known.response()));
        } else {
            model.emplace(std::move(known));
        }
        unrestricted = fit_unrestricted(*model).theta;
        restricted = fit_restricted(*model, ctx.linear).theta;
    } catch (const Error&) {
        return out;  // every statistic excluded
    }

    auto record = [&](Statistic s, auto&& compute) {
        if (!ctx.wanted[index_of(s)]) {
            return;
        }
        try {
            out.values[index_of(s)] = compute();
        } catch (const Error&) {
        }
    };

    record(Statistic::W, [&] { return wald(*model, ctx.linear, unrestricted).value; });
    record(Statistic::BF, [&] { return bf(*model, ctx.linear, unrestricted, restricted).value; });
    record(Statistic::LM, [&] { return lm(*model, ctx.linear, restricted).value; });
    record(Statistic::D, [&] { return distance(*model, unrestricted, restricted, 1).value; });
    record(Statistic::W_star, [&] { return wald(*model, ctx.power, unrestricted).value; });
    if (ctx.wanted[index_of(Statistic::BF_star)]) {
        try {
            const FitResult power_fit = fit_restricted(*model, ctx.power);
            out.negative_branch = power_fit.branch && *power_fit.branch < 0.0;
            BfOptions options;
            options.jacobian_at = cfg.bf_star_jacobian;
            out.values[index_of(Statistic::BF_star)] =
                bf(*model, ctx.power, unrestricted, power_fit.theta, options).value;
        } catch (const Error&) {
        }
    }
    // In star coordinates H0* is again theta*[1]^k - 1 = 0.
    record(Statistic::BFc_transform, [&] {
        return bf_corrected(*model, ctx.power, ctx.root, unrestricted, restricted, CorrectionVariant::transform)
            .value;
    });
    record(Statistic::BFc_direct, [&] {
        return bf_corrected(*model, ctx.power, ctx.root, unrestricted, restricted, CorrectionVariant::direct)
            .value;
    });
    return out;
}

struct Tally {
    std::array<std::uint64_t, kStatisticCount> rejections{};
    std::array<std::uint64_t, kStatisticCount> valid{};
    std::array<std::uint64_t, kStatisticCount> negative{};
    std::uint64_t negative_branch = 0;

    void add(const ReplicationOutcome& outcome, const CellContext& ctx) {
        for (std::size_t i = 0; i < kStatisticCount; ++i) {
            if (!outcome.values[i]) {
                continue;
            }
            const double v = *outcome.values[i];
            ++valid[i];
            rejections[i] += ctx.rejects(v) ? 1 : 0;
            negative[i] += v < -kNegativeStatisticTolerance ? 1 : 0;
        }
        negative_branch += outcome.negative_branch ? 1 : 0;
    }

    void merge(const Tally& other) {
        for (std::size_t i = 0; i < kStatisticCount; ++i) {
            rejections[i] += other.rejections[i];
            valid[i] += other.valid[i];
            negative[i] += other.negative[i];
        }
        negative_branch += other.negative_branch;
    }
};

}  // namespace

std::string_view label(Statistic statistic) {
    switch (statistic) {
        case Statistic::W: return "W";
        case Statistic::W_star: return "W*";
        case Statistic::BF: return "BF";
        case Statistic::BF_star: return "BF*";
        case Statistic::BFc_transform: return "BFc-transform";
        case Statistic::BFc_direct: return "BFc-direct";
        case Statistic::LM: return "LM";
        case Statistic::D: return "D";
    }
    return "?";
}

std::optional<Statistic> parse_statistic(std::string_view text) {
    for (Statistic s : kAllStatistics) {
        if (label(s) == text) {
            return s;
        }
    }
    return std::nullopt;
}

void SimulationConfig::validate() const {
    if (k_list.empty() || n_list.empty()) {
        throw ConfigurationError("k and n lists must be non-empty");
    }
    for (int k : k_list) {
        if (k == 0 || k > kMaxAbsK || k < -kMaxAbsK) {
            throw ConfigurationError("k must be a nonzero integer with |k| < 2^23, got " + std::to_string(k));
        }
    }
    for (std::size_t n : n_list) {
        if (n < 3 || n > 0xFFFFFFFFu) {
            throw ConfigurationError("sample sizes must satisfy 3 <= n < 2^32, got " + std::to_string(n));
        }
    }
    if (reps < 1 || reps > 0xFFFFFFFFull) {
        throw ConfigurationError("reps must lie in [1, 2^32)");
    }
    if (!(alpha > 0.0) || alpha > 1.0) {
        throw ConfigurationError("alpha must lie in (0, 1]");
    }
    if (!(sigma2 > 0.0)) {
        throw ConfigurationError("sigma2 must be positive");
    }
    if (theta0.size() != 2 || !theta0.allFinite()) {
        throw ConfigurationError("theta0 must be a finite (gamma, beta) pair");
    }
    if (statistics.empty()) {
        throw ConfigurationError("no statistics selected");
    }
}

double SizeCell::empirical_size() const {
    return valid_reps == 0 ? 0.0 : static_cast<double>(rejections) / static_cast<double>(valid_reps);
}

const SizeCell* SizeTable::find(int k, std::size_t n, Statistic statistic) const {
    for (const auto& c : cells) {
        if (c.k == k && c.n == n && c.statistic == statistic) {
            return &c;
        }
    }
    return nullptr;
}

Matrix generate_design(std::size_t n, std::size_t p, RandomStream& stream) {
    Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            X(i, j) = stream.uniform();
        }
    }
    return X;
}

LinearGaussianModel generate_dataset(const Matrix& design, const Vector& theta0, double sigma2,
                                     RandomStream& stream) {
    const double sd = std::sqrt(sigma2);
    Vector y = design * theta0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        y(i) += sd * stream.normal();
    }
    return LinearGaussianModel(design, std::move(y), sigma2);
}

LinearGaussianModel generate_dataset(std::size_t n, const Vector& theta0, double sigma2, RandomStream& stream) {
    Matrix X = generate_design(n, static_cast<std::size_t>(theta0.size()), stream);
    return generate_dataset(X, theta0, sigma2, stream);
}

RandomStream replication_stream(const SimulationConfig& config, int k, std::size_t n, std::uint64_t r) {
    return RandomStream(config.seed, static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(n),
                        stream_word3(config, kPurposeReplication, k));
}

ReplicationOutcome run_replication(int k, std::size_t n, std::uint64_t r, const SimulationConfig& config) {
    const CellContext ctx(k, n, config);
    return replicate(ctx, r);
}

unsigned resolve_thread_count(unsigned requested) {
    unsigned threads = requested;
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    if (const char* cap = std::getenv("BFTEST_THREADS")) {
        char* end = nullptr;
        const unsigned long value = std::strtoul(cap, &end, 10);
        if (end != cap && *end == '\0' && value >= 1) {
            threads = std::min<unsigned>(threads, static_cast<unsigned>(value));
        }
    }
    return threads;
}

CellResult run_cell(int k, std::size_t n, const SimulationConfig& config) {
    config.validate();
    const CellContext ctx(k, n, config);
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(resolve_thread_count(config.threads), config.reps));

    Tally total;
    if (workers <= 1) {
        for (std::uint64_t r = 0; r < config.reps; ++r) {
            total.add(replicate(ctx, r), ctx);
        }
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<Tally> partial(workers);
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::uint64_t r = next.fetch_add(1); r < config.reps; r = next.fetch_add(1)) {
                    partial[w].add(replicate(ctx, r), ctx);
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
        for (const auto& t : partial) {
            total.merge(t);
        }
    }

    CellResult result;
    result.summary.k = k;
    result.summary.n = n;
    result.summary.reps = config.reps;
    result.summary.negative_branch = total.negative_branch;
    result.summary.negative_values = total.negative;
    for (Statistic s : config.statistics) {
        SizeCell cell;
        cell.k = k;
        cell.n = n;
        cell.statistic = s;
        cell.rejections = total.rejections[index_of(s)];
        cell.valid_reps = total.valid[index_of(s)];
        cell.excluded = config.reps - cell.valid_reps;
        result.cells.push_back(cell);
    }
    return result;
}

SizeTable run_experiment(const SimulationConfig& config) {
    config.validate();
    SizeTable table;
    for (int k : config.k_list) {
        for (std::size_t n : config.n_list) {
            CellResult cell = run_cell(k, n, config);
            table.cells.insert(table.cells.end(), cell.cells.begin(), cell.cells.end());
            table.summaries.push_back(cell.summary);
        }
    }
    return table;
}

}  // namespace bftest
