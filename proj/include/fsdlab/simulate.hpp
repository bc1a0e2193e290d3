#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fsdlab/flowdist.hpp"
#include "fsdlab/method.hpp"

namespace fsdlab {

/// Counter-based stream: a splitmix64 walk seeded per (seed, replicate, flow),
/// so results are independent of evaluation order and thread count.
class FlowRng {
public:
    explicit FlowRng(std::uint64_t state) : state_(state) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

/// Keyed construction; replicates and flows get independent streams.
FlowRng flow_rng(std::uint64_t seed, std::uint64_t replicate, std::uint64_t flow);

struct SimConfig {
    std::uint64_t seed = 0;
    int replicates = 1;
    std::uint64_t n_flows = 0;  // used when sampling from a distribution
};

/// Observed sampled-size counts M'_0..M'_W for one replicate; sums to N.
struct SampledCounts {
    std::uint64_t N = 0;
    std::vector<std::uint64_t> counts;  // size W+1, index j = 0..W

    int W() const { return static_cast<int>(counts.size()) - 1; }
};

/// Optional post-inference hook: maps the inferred size of one flow (and its
/// true size) to a perturbed value, emulating imperfect sequence-number maps.
using NoiseHook = std::function<int(int inferred_j, int true_k, FlowRng& rng)>;

/// Samples one flow of size k; returns the observed (possibly SEQ-inferred)
/// size in 0..k. The law over draws is column k of the method's B.
int sample_flow(const MethodSpec& spec, int k, FlowRng& rng);

/// Independent sampling of n_flows drawn from dist, one SampledCounts per replicate.
std::vector<SampledCounts> sample_population(const FlowSizeDistribution& dist,
                                             const MethodSpec& spec, const SimConfig& config,
                                             const NoiseHook& noise = nullptr);

/// Same, but for a fixed recorded population (sizes taken from the histogram).
std::vector<SampledCounts> sample_population(const FlowPopulation& pop, const MethodSpec& spec,
                                             const SimConfig& config,
                                             const NoiseHook& noise = nullptr);

/// Exact first/second moments of the SEQ-assisted observed size for a flow of
/// size k, against the physical packet count of the matching SEQ-less method.
struct SeqGain {
    double e_inferred = 0.0;  // E[inferred size], j = 0 outcomes included
    double e_physical = 0.0;  // E[physically sampled packets], SEQ-less twin
    double gain = 0.0;        // r = e_inferred / e_physical, >= 1, -> 1/p_p
    double var_inferred = 0.0;
};
SeqGain seq_gain_exact(const MethodSpec& spec, int k);

/// Large-flow variance approximation 4/p + k(k-2)p + (2k-3).
double seq_gain_var_approx(double p_p, int k);

/// Smallest flow size reaching a fraction alpha of the asymptotic gain 1/p_p:
/// ceil(q(1+alpha)/(p(1-alpha))), at least 1.
int seq_gain_threshold(double alpha, double p_p);

}  // namespace fsdlab
