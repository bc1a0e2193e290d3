#include "fsdlab/simulate.hpp"

#include <algorithm>
#include <cmath>

namespace fsdlab {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 33)) * 0xFF51AFD7ED558CCDull;
    z = (z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53ull;
    return z ^ (z >> 33);
}

// last index in {from..k} whose Bernoulli(p) draw succeeds, or 0 if none
int last_sampled_index(FlowRng& rng, int from, int k, double p) {
    int last = 0;
    for (int i = from; i <= k; ++i)
        if (rng.next_unit() < p) last = i;
    return last;
}

// first sampled packet position as a closed-form geometric, 1-based; may exceed k
int geometric_first_hit(FlowRng& rng, double p) {
    if (p >= 1.0) return 1;
    double u = rng.next_unit();
    if (u <= 0.0) u = 0x1.0p-53;
    // P(first hit = i) = q^(i-1) p
    return 1 + static_cast<int>(std::floor(std::log1p(-u) / std::log1p(-p)));
}

}  // namespace

FlowRng flow_rng(std::uint64_t seed, std::uint64_t replicate, std::uint64_t flow) {
    std::uint64_t h = mix64(seed ^ 0x243F6A8885A308D3ull);
    h = mix64(h ^ (replicate + 0x13198A2E03707344ull));
    h = mix64(h ^ (flow + 0xA4093822299F31D0ull));
    return FlowRng(h);
}

int sample_flow(const MethodSpec& spec, int k, FlowRng& rng) {
    if (k < 1) throw OutOfRange("flow size must be at least 1");
    switch (spec.method) {
        case Method::PS: {
            int n = 0;
            for (int i = 1; i <= k; ++i)
                if (rng.next_unit() < spec.p_p) ++n;
            return n;
        }
        case Method::PS_SEQ: {
            int n = 0, first = 0, last = 0;
            for (int i = 1; i <= k; ++i)
                if (rng.next_unit() < spec.p_p) {
                    ++n;
                    if (first == 0) first = i;
                    last = i;
                }
            return n <= 1 ? n : last - first + 1;
        }
        case Method::PS_SYN: {
            if (rng.next_unit() >= spec.p_p) return 0;  // SYN missed: flow discarded
            int n = 1;
            for (int i = 2; i <= k; ++i)
                if (rng.next_unit() < spec.p_p) ++n;
            return n;
        }
        case Method::PS_SYN_SEQ: {
            if (rng.next_unit() >= spec.p_p) return 0;
            int last = last_sampled_index(rng, 2, k, spec.p_p);
            return last == 0 ? 1 : last;  // SYN is packet 1, SEQ fills the gap
        }
        case Method::FS: return rng.next_unit() < spec.p_f ? k : 0;
        case Method::SH: {
            int first = geometric_first_hit(rng, spec.p_p);
            return first <= k ? k - first + 1 : 0;
        }
        case Method::DS: {
            if (rng.next_unit() >= spec.p_f) return 0;
            int last = last_sampled_index(rng, 2, k, spec.p_p);
            return last == 0 ? 1 : last;
        }
    }
    throw Unsupported("unreachable");
}

namespace {

std::vector<SampledCounts> run_replicates(
    const MethodSpec& spec, const SimConfig& config, int W, const NoiseHook& noise,
    const std::function<int(std::uint64_t, FlowRng&)>& flow_size) {
    if (config.replicates < 1) throw OutOfRange("need at least one replicate");
    if (config.n_flows < 1) throw OutOfRange("need at least one flow");
    std::vector<SampledCounts> out(static_cast<size_t>(config.replicates));
    for (int rep = 0; rep < config.replicates; ++rep) {
        SampledCounts& sc = out[static_cast<size_t>(rep)];
        sc.counts.assign(static_cast<size_t>(W) + 1, 0);
        sc.N = config.n_flows;
        for (std::uint64_t i = 0; i < config.n_flows; ++i) {
            FlowRng rng = flow_rng(config.seed, static_cast<std::uint64_t>(rep), i);
            int k = flow_size(i, rng);
            int j = sample_flow(spec, k, rng);
            if (noise) j = std::clamp(noise(j, k, rng), 0, W);
            sc.counts[static_cast<size_t>(j)] += 1;
        }
    }
    return out;
}

}  // namespace

std::vector<SampledCounts> sample_population(const FlowSizeDistribution& dist,
                                             const MethodSpec& spec, const SimConfig& config,
                                             const NoiseHook& noise) {
    // inverse-CDF size draw; cumulative table shared across replicates
    std::vector<double> cdf(dist.theta().begin(), dist.theta().end());
    for (size_t i = 1; i < cdf.size(); ++i) cdf[i] += cdf[i - 1];
    cdf.back() = 1.0;
    auto flow_size = [&cdf](std::uint64_t, FlowRng& rng) {
        double u = rng.next_unit();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        return static_cast<int>(it - cdf.begin()) + 1;
    };
    return run_replicates(spec, config, dist.W(), noise, flow_size);
}

std::vector<SampledCounts> sample_population(const FlowPopulation& pop, const MethodSpec& spec,
                                             const SimConfig& config, const NoiseHook& noise) {
    if (pop.N == 0) throw EmptyInput("population holds no flows");
    std::vector<std::uint64_t> cum(pop.histogram.size());
    std::uint64_t acc = 0;
    for (size_t i = 0; i < pop.histogram.size(); ++i) {
        acc += pop.histogram[i];
        cum[i] = acc;
    }
    auto flow_size = [&cum](std::uint64_t i, FlowRng&) {
        auto it = std::upper_bound(cum.begin(), cum.end(), i);
        return static_cast<int>(it - cum.begin()) + 1;
    };
    SimConfig cfg = config;
    cfg.n_flows = pop.N;
    return run_replicates(spec, cfg, pop.W, noise, flow_size);
}

SeqGain seq_gain_exact(const MethodSpec& spec, int k) {
    if (k < 1) throw OutOfRange("flow size must be at least 1");
    double pf, pp;
    switch (spec.method) {
        case Method::PS_SEQ: pf = -1.0; pp = spec.p_p; break;       // pf < 0 marks PS+SEQ
        case Method::PS_SYN_SEQ: pf = spec.p_p; pp = spec.p_p; break;
        case Method::DS: pf = spec.p_f; pp = spec.p_p; break;
        default:
            throw UnsupportedMethod("SEQ gain applies to PS+SEQ, PS+SYN+SEQ and DS only");
    }
    double q = 1.0 - pp;
    double m1 = 0.0, m2 = 0.0;
    SeqGain g;
    if (spec.method == Method::PS_SEQ) {
        // column k: q^k, k p q^(k-1), (k-j+1) p^2 q^(k-j)
        if (k >= 1) {
            double b1 = k * pp * std::pow(q, k - 1);
            m1 += b1;
            m2 += b1;
        }
        for (int j = 2; j <= k; ++j) {
            double b = (k - j + 1) * pp * pp * std::pow(q, k - j);
            m1 += j * b;
            m2 += static_cast<double>(j) * j * b;
        }
        g.e_physical = k * pp;
    } else {
        // column k: qf, pf q^(k-1), pf pp q^(k-j)
        double b1 = pf * std::pow(q, k - 1);
        m1 += b1;
        m2 += b1;
        for (int j = 2; j <= k; ++j) {
            double b = pf * pp * std::pow(q, k - j);
            m1 += j * b;
            m2 += static_cast<double>(j) * j * b;
        }
        g.e_physical = pf * (1.0 + (k - 1) * pp);
    }
    g.e_inferred = m1;
    g.var_inferred = m2 - m1 * m1;
    g.gain = g.e_inferred / g.e_physical;
    return g;
}

double seq_gain_var_approx(double p_p, int k) {
    return 4.0 / p_p + static_cast<double>(k) * (k - 2) * p_p + (2.0 * k - 3.0);
}

int seq_gain_threshold(double alpha, double p_p) {
    if (!(alpha > 0.0) || alpha >= 1.0)
        throw OutOfRange("alpha must lie strictly inside (0,1); the threshold diverges at 1");
    if (!(p_p > 0.0) || p_p > 1.0) throw OutOfRange("p_p must lie in (0,1]");
    double q = 1.0 - p_p;
    double raw = q * (1.0 + alpha) / (p_p * (1.0 - alpha));
    return std::max(1, static_cast<int>(std::ceil(raw - 1e-6)));  // slack absorbs the exact-integer boundary
}

}  // namespace fsdlab
