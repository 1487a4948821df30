#include <cmath>

#include "catch_amalgamated.hpp"

#include "bftest/error.hpp"
#include "bftest/estimators.hpp"
#include "bftest/monte_carlo.hpp"
#include "bftest/restriction.hpp"
#include "bftest/statistics.hpp"
#include "support.hpp"

using namespace bftest;

namespace {

SimulationConfig small_config() {
    SimulationConfig c;
    c.reps = 200;
    c.k_list = {5, -2};
    c.n_list = {25, 50};
    c.threads = 1;
    return c;
}

std::size_t at(Statistic s) { return static_cast<std::size_t>(s); }

}  // namespace

TEST_CASE("statistic labels round-trip") {
    for (Statistic s : kAllStatistics) {
        REQUIRE(parse_statistic(label(s)));
        CHECK(*parse_statistic(label(s)) == s);
    }
    CHECK_FALSE(parse_statistic("nope"));
}

TEST_CASE("config validation") {
    SimulationConfig c;
    CHECK_NOTHROW(c.validate());
    c.alpha = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
    c = {};
    c.reps = 0;
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
    c = {};
    c.k_list = {0};
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
    c = {};
    c.n_list = {2};
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
    c = {};
    c.sigma2 = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
}

TEST_CASE("dataset generation is deterministic") {
    SimulationConfig c;
    RandomStream a = replication_stream(c, 5, 25, 17);
    RandomStream b = replication_stream(c, 5, 25, 17);
    const LinearGaussianModel m1 = generate_dataset(25, c.theta0, 1.0, a);
    const LinearGaussianModel m2 = generate_dataset(25, c.theta0, 1.0, b);
    CHECK(m1.design() == m2.design());
    CHECK(m1.response() == m2.response());

    RandomStream other = replication_stream(c, 5, 25, 18);
    CHECK(generate_dataset(25, c.theta0, 1.0, other).response() != m1.response());
}

TEST_CASE("dataset moments") {
    SimulationConfig c;
    RandomStream s = replication_stream(c, 5, 100000, 0);
    const LinearGaussianModel m = generate_dataset(100000, c.theta0, 1.0, s);
    CHECK(std::abs(m.design().mean() - 0.5) < 0.005);
    CHECK(m.design().minCoeff() > 0.0);
    CHECK(m.design().maxCoeff() < 1.0);
    const Vector e = m.response() - m.design() * c.theta0;
    const double mean = e.mean();
    const double var = (e.array() - mean).square().sum() / (e.size() - 1);
    CHECK(std::abs(var - 1.0) < 0.02);
    CHECK(std::abs(mean) < 0.015);
}

TEST_CASE("common datasets are shared across k, independent ones are not") {
    SimulationConfig common;
    SimulationConfig independent;
    independent.common_datasets = false;
    RandomStream a = replication_stream(common, 5, 25, 3);
    RandomStream b = replication_stream(common, -2, 25, 3);
    CHECK(a.next_u32() == b.next_u32());
    RandomStream c = replication_stream(independent, 5, 25, 3);
    RandomStream d = replication_stream(independent, -2, 25, 3);
    CHECK(c.next_u32() != d.next_u32());
}

TEST_CASE("per replication W, BF, LM and D coincide and BFc tracks BF") {
    SimulationConfig c;
    for (int k : {5, 2, -2, -5}) {
        for (std::uint64_t r = 0; r < 100; ++r) {
            const ReplicationOutcome o = run_replication(k, 25, r, c);
            REQUIRE(o.values[at(Statistic::BF)]);
            const double bf_value = *o.values[at(Statistic::BF)];
            for (Statistic s : {Statistic::W, Statistic::LM, Statistic::D}) {
                REQUIRE(o.values[at(s)]);
                CHECK(testing::relative_gap(*o.values[at(s)], bf_value) < 1e-8);
            }
            if (o.values[at(Statistic::BFc_transform)]) {
                CHECK(testing::relative_gap(*o.values[at(Statistic::BFc_transform)], bf_value) < 1e-8);
            } else {
                CHECK(k % 2 == 0);
            }
        }
    }
}

TEST_CASE("cell counts are consistent") {
    const SimulationConfig c = small_config();
    const SizeTable t = run_experiment(c);
    CHECK(t.cells.size() == 2 * 2 * kStatisticCount);
    CHECK(t.summaries.size() == 4);
    for (const SizeCell& cell : t.cells) {
        CHECK(cell.rejections <= cell.valid_reps);
        CHECK(cell.valid_reps + cell.excluded == c.reps);
        CHECK(cell.empirical_size() >= 0.0);
        CHECK(cell.empirical_size() <= 1.0);
    }
    for (Statistic s : {Statistic::W, Statistic::BF, Statistic::LM, Statistic::D}) {
        CHECK(t.find(5, 25, s)->rejections == t.find(5, 25, Statistic::BF)->rejections);
    }
    CHECK(t.find(5, 25, Statistic::BFc_transform)->rejections == t.find(5, 25, Statistic::BF)->rejections);
    // shared datasets: the linear-hypothesis columns agree across k
    CHECK(t.find(5, 50, Statistic::W)->rejections == t.find(-2, 50, Statistic::W)->rejections);
    CHECK(t.find(7, 50, Statistic::W) == nullptr);
}

TEST_CASE("alpha of one rejects every valid replication") {
    SimulationConfig c = small_config();
    c.alpha = 1.0;
    c.reps = 50;
    const SizeTable t = run_experiment(c);
    for (const SizeCell& cell : t.cells) {
        CHECK(cell.rejections == cell.valid_reps);
    }
}

TEST_CASE("results do not depend on the worker count") {
    SimulationConfig c = small_config();
    const SizeTable serial = run_experiment(c);
    c.threads = 4;
    const SizeTable parallel = run_experiment(c);
    REQUIRE(serial.cells.size() == parallel.cells.size());
    for (std::size_t i = 0; i < serial.cells.size(); ++i) {
        CHECK(serial.cells[i].rejections == parallel.cells[i].rejections);
        CHECK(serial.cells[i].valid_reps == parallel.cells[i].valid_reps);
    }
    const SizeTable again = run_experiment(c);
    for (std::size_t i = 0; i < serial.cells.size(); ++i) {
        CHECK(again.cells[i].rejections == parallel.cells[i].rejections);
    }
}

TEST_CASE("statistic subsets and fixed designs") {
    SimulationConfig c = small_config();
    c.statistics = {Statistic::W_star, Statistic::BF_star};
    c.fixed_design = true;
    const SizeTable t = run_experiment(c);
    CHECK(t.cells.size() == 2 * 2 * 2);
    CHECK(t.find(5, 25, Statistic::W) == nullptr);
    CHECK(t.find(5, 25, Statistic::W_star) != nullptr);
}

TEST_CASE("even k logs negative branches and exclusions") {
    SimulationConfig c;
    c.k_list = {2};
    c.n_list = {25};
    c.reps = 2000;
    c.threads = 1;
    const SizeTable t = run_experiment(c);
    REQUIRE(t.summaries.size() == 1);
    CHECK(t.summaries[0].reps == 2000);
    const SizeCell* bfc = t.find(2, 25, Statistic::BFc_transform);
    CHECK(bfc->excluded > 0);
    CHECK(t.find(2, 25, Statistic::BF)->excluded == 0);
}

TEST_CASE("estimated variance mode runs") {
    SimulationConfig c = small_config();
    c.estimate_sigma2 = true;
    c.reps = 100;
    const SizeTable t = run_experiment(c);
    for (const SizeCell& cell : t.cells) {
        CHECK(cell.valid_reps + cell.excluded == 100);
    }
}

TEST_CASE("thread count resolution") {
    CHECK(resolve_thread_count(3) >= 1);
    CHECK(resolve_thread_count(0) >= 1);
}
