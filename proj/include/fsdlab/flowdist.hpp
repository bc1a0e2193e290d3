#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fsdlab/error.hpp"

namespace fsdlab {

/// Flow size distribution over sizes 1..W. Immutable after construction;
/// every theta_k is strictly inside (0,1) and the vector sums to one.
class FlowSizeDistribution {
public:
    /// Validates and normalizes invariants; throws ZeroMass/Empty/OutOfRange.
    explicit FlowSizeDistribution(std::vector<double> theta);

    int W() const noexcept { return static_cast<int>(theta_.size()); }
    const std::vector<double>& theta() const noexcept { return theta_; }
    double theta(int k) const { return theta_.at(static_cast<size_t>(k - 1)); }  // k in 1..W
    double mean_size() const noexcept { return mean_; }

private:
    std::vector<double> theta_;
    double mean_ = 0.0;
};

/// Multiset of observed flow sizes, kept as a histogram.
struct FlowPopulation {
    int W = 0;
    std::vector<std::uint64_t> histogram;  // counts per size 1..W
    std::uint64_t N = 0;

    /// theta_j = M_j / N; throws ZeroMass if any interior bin is empty.
    FlowSizeDistribution to_distribution() const;
};

/// theta_j = count_j / sum(counts). Zero bins are rejected (the Fisher
/// analysis assumes theta_k > 0); smooth_eps > 0 adds eps to every bin first.
FlowSizeDistribution from_histogram(const std::vector<std::uint64_t>& counts,
                                    double smooth_eps = 0.0);

/// theta_k proportional to exp(-rate*k), k = 1..W.
FlowSizeDistribution truncated_exponential(int W, double rate);

/// Bisection on the strictly decreasing map rate -> mean size.
/// Requires 1 < target_D <= (W+1)/2; result satisfies |D(rate)-target| <= 1e-9.
double solve_rate_for_mean(int W, double target_D);

/// Reads newline-separated sizes or CSV `size,count`; sizes above W are discarded.
FlowPopulation read_flow_records(const std::string& path, int W);
FlowPopulation read_flow_records(std::istream& in, int W, const std::string& label = "<stream>");

/// Distribution CSV with header `size,theta` or `size,count`; sizes must be
/// exactly 1..W contiguous ascending (W inferred from the file).
FlowSizeDistribution read_distribution_csv(const std::string& path, double smooth_eps = 0.0);
FlowSizeDistribution read_distribution_csv(std::istream& in, const std::string& label = "<stream>",
                                           double smooth_eps = 0.0);

/// Writes `size,theta` CSV.
void write_distribution_csv(const FlowSizeDistribution& dist, const std::string& path);

}  // namespace fsdlab
