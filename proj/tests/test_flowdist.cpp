#include <doctest.h>

#include <random>
#include <sstream>

#include "fsdlab/flowdist.hpp"

using namespace fsdlab;

TEST_CASE("from_histogram basics") {
    auto d = from_histogram({1, 1});
    CHECK(d.W() == 2);
    CHECK(d.theta(1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(d.theta(2) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(d.mean_size() == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("from_histogram five-bin example") {
    auto d = from_histogram({22, 21, 20, 19, 8});
    CHECK(d.theta(1) == doctest::Approx(22.0 / 90.0).epsilon(1e-14));
    CHECK(d.theta(2) == doctest::Approx(21.0 / 90.0).epsilon(1e-14));
    CHECK(d.theta(3) == doctest::Approx(20.0 / 90.0).epsilon(1e-14));
    CHECK(d.theta(4) == doctest::Approx(19.0 / 90.0).epsilon(1e-14));
    CHECK(d.theta(5) == doctest::Approx(8.0 / 90.0).epsilon(1e-14));
    // direct arithmetic: sum k M_k / sum M_k = 240/90
    CHECK(d.mean_size() == doctest::Approx(240.0 / 90.0).epsilon(1e-14));
}

TEST_CASE("from_histogram rejects zero bins and empty input") {
    CHECK_THROWS_AS(from_histogram({0, 5}), ZeroMass);
    CHECK_THROWS_AS(from_histogram({0, 0}), Empty);
    CHECK_THROWS_AS(from_histogram({}), Empty);
    // smoothing escape hatch keeps all bins positive
    auto d = from_histogram({0, 5}, 0.5);
    CHECK(d.theta(1) == doctest::Approx(0.5 / 6.0));
    CHECK(d.theta(2) == doctest::Approx(5.5 / 6.0));
}

TEST_CASE("integer round-trip: theta * N recovers counts") {
    std::vector<std::uint64_t> counts{7, 3, 11, 2, 9};
    std::uint64_t N = 32;
    auto d = from_histogram(counts);
    for (int k = 1; k <= 5; ++k) {
        double recovered = d.theta(k) * static_cast<double>(N);
        CHECK(recovered == doctest::Approx(static_cast<double>(counts[static_cast<size_t>(k - 1)]))
                               .epsilon(1e-12));
    }
}

TEST_CASE("truncated exponential shape") {
    auto d = truncated_exponential(50, 1.0);
    CHECK(d.theta(1) / d.theta(2) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    // monotone decreasing
    for (int k = 2; k <= 50; ++k) CHECK(d.theta(k) < d.theta(k - 1));
    // rate -> 0 approaches uniform
    auto u = truncated_exponential(2, 1e-13);
    CHECK(u.theta(1) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("mean size is strictly decreasing in rate") {
    double prev = truncated_exponential(40, 0.01).mean_size();
    for (double rate : {0.05, 0.1, 0.3, 0.7, 1.5, 3.0}) {
        double cur = truncated_exponential(40, rate).mean_size();
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("solve_rate_for_mean") {
    double rate = solve_rate_for_mean(50, 16.039);
    CHECK(std::abs(truncated_exponential(50, rate).mean_size() - 16.039) <= 1e-9);

    // uniform boundary: the solver lands on a vanishing rate
    double tiny = solve_rate_for_mean(50, 25.5);
    CHECK(tiny <= 1e-10);
    CHECK(std::abs(truncated_exponential(50, std::max(tiny, 1e-12)).mean_size() - 25.5) <= 1e-9);

    CHECK_THROWS_AS(solve_rate_for_mean(50, 40.0), OutOfRange);
    CHECK_THROWS_AS(solve_rate_for_mean(50, 1.0), OutOfRange);
}

TEST_CASE("read_flow_records line format with truncation") {
    std::istringstream in("1\n1\n3\n");
    auto pop = read_flow_records(in, 3);
    CHECK(pop.N == 3);
    CHECK(pop.histogram == std::vector<std::uint64_t>{2, 0, 1});

    std::istringstream in2("5\n900\n");
    auto pop2 = read_flow_records(in2, 10);
    CHECK(pop2.N == 1);  // 900 discarded by the truncation rule
    CHECK(pop2.histogram[4] == 1);
}

TEST_CASE("read_flow_records csv format") {
    std::istringstream in("size,count\n1,10\n2,5\n");
    auto pop = read_flow_records(in, 2);
    CHECK(pop.N == 15);
    CHECK(pop.histogram == std::vector<std::uint64_t>{10, 5});
}

TEST_CASE("read_flow_records errors carry line numbers") {
    std::istringstream bad("1\nxyz\n");
    try {
        read_flow_records(bad, 4);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    std::istringstream empty("");
    CHECK_THROWS_AS(read_flow_records(empty, 4), EmptyInput);
}

TEST_CASE("distribution csv round trip") {
    auto d = truncated_exponential(12, 0.4);
    std::ostringstream out;
    out << "size,theta\n";
    out.precision(17);
    for (int k = 1; k <= 12; ++k) out << k << "," << d.theta(k) << "\n";
    std::istringstream in(out.str());
    auto d2 = read_distribution_csv(in);
    for (int k = 1; k <= 12; ++k)
        CHECK(d2.theta(k) == doctest::Approx(d.theta(k)).epsilon(1e-14));

    std::istringstream counts("size,count\n1,3\n2,1\n");
    auto d3 = read_distribution_csv(counts);
    CHECK(d3.theta(1) == doctest::Approx(0.75));

    std::istringstream gap("size,theta\n1,0.5\n3,0.5\n");
    CHECK_THROWS_AS(read_distribution_csv(gap), ParseError);
}
