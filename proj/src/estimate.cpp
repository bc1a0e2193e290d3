#include "fsdlab/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fsdlab {

namespace {

Eigen::VectorXd observed_tail(const SampledCounts& counts) {
    const int W = counts.W();
    if (W < 1) throw OutOfRange("counts must cover sizes 0..W with W >= 1");
    std::uint64_t total = std::accumulate(counts.counts.begin(), counts.counts.end(),
                                          std::uint64_t{0});
    if (total != counts.N) throw OutOfRange("counts do not sum to N (is the j=0 row present?)");
    Eigen::VectorXd m(W);
    for (int j = 1; j <= W; ++j) m(j - 1) = static_cast<double>(counts.counts[static_cast<size_t>(j)]);
    return m;
}

}  // namespace

EstimatorKind parse_estimator(const std::string& name) {
    if (name == "unbiased") return EstimatorKind::Unbiased;
    if (name == "mle") return EstimatorKind::MleSyn;
    if (name == "mle-sh") return EstimatorKind::MleSh;
    throw OutOfRange("estimator must be 'unbiased', 'mle' or 'mle-sh'");
}

Eigen::VectorXd estimate_unbiased(const SampledCounts& counts, const MethodSpec& spec) {
    if (!spec.syn_based())
        throw UnsupportedMethod(
            "the histogram-inversion estimator needs unbiased flow pickup (PS+SYN, "
            "PS+SYN+SEQ, FS or DS)");
    if (counts.N == 0) throw EmptyInput("no flows observed");
    Eigen::VectorXd m = observed_tail(counts);
    Eigen::MatrixXd inv = analytic_inverse(spec, counts.W());
    return inv * (m / static_cast<double>(counts.N));
}

Eigen::VectorXd estimate_mle_syn(const SampledCounts& counts, const MethodSpec& spec) {
    if (!spec.syn_based())
        throw UnsupportedMethod("the closed-form MLE needs b0 = q*1 (PS+SYN family, FS, DS)");
    Eigen::VectorXd m = observed_tail(counts);
    double survivors = m.sum();
    if (survivors <= 0.0) throw AllEvaporated("every sampled flow evaporated");
    Eigen::MatrixXd inv = analytic_inverse(spec, counts.W());
    return inv * (m * (spec.survival_rate() / survivors));
}

Eigen::VectorXd estimate_mle_sh(const SampledCounts& counts, const MethodSpec& spec) {
    if (spec.method != Method::SH) throw UnsupportedMethod("this closed form is specific to SH");
    if (counts.N == 0) throw EmptyInput("no flows observed");
    Eigen::VectorXd v = observed_tail(counts);
    v(0) = spec.p_p * (static_cast<double>(counts.counts[0]) + v(0));
    Eigen::MatrixXd inv = analytic_inverse(spec, counts.W());
    return inv * (v / static_cast<double>(counts.N));
}

Eigen::VectorXd estimate(const SampledCounts& counts, const MethodSpec& spec, EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Unbiased: return estimate_unbiased(counts, spec);
        case EstimatorKind::MleSyn: return estimate_mle_syn(counts, spec);
        case EstimatorKind::MleSh: return estimate_mle_sh(counts, spec);
    }
    throw Unsupported("unreachable");
}

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, tau = 0.0;
    int rho = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        cum += u[static_cast<size_t>(i)];
        double t = (cum - 1.0) / static_cast<double>(i + 1);
        if (u[static_cast<size_t>(i)] - t > 0.0) {
            rho = static_cast<int>(i + 1);
            tau = t;
        }
    }
    (void)rho;
    return (v.array() - tau).cwiseMax(0.0);
}

VarianceReport empirical_variance_vs_crlb(const FlowSizeDistribution& dist, const MethodSpec& spec,
                                          const SimConfig& config, EstimatorKind kind,
                                          int window) {
    if (config.replicates < 30)
        throw OutOfRange("variance-vs-CRLB comparison needs at least 30 replicates");
    const int W = dist.W();
    auto reps = sample_population(dist, spec, config);

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(W);
    Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(W);
    std::vector<bool> populated(static_cast<size_t>(W), false);
    for (const auto& sc : reps) {
        Eigen::VectorXd th = estimate(sc, spec, kind);
        sum += th;
        sumsq += th.cwiseProduct(th);
        for (int k = 1; k <= W; ++k)
            if (sc.counts[static_cast<size_t>(k)] > 0) populated[static_cast<size_t>(k - 1)] = true;
    }
    const double R = static_cast<double>(reps.size());
    VarianceReport rep;
    rep.mean = sum / R;
    rep.variance = (sumsq - R * rep.mean.cwiseProduct(rep.mean)) / (R - 1.0);

    FisherBundle fb = make_bundle(build(spec, W), dist, /*compute_J=*/false);
    rep.crlb_over_n = fb.crlb_diag / static_cast<double>(config.n_flows);

    rep.smoothing_window = window > 0 ? window : (W > 200 ? 100 : 1);
    rep.variance_smoothed = rep.variance;
    if (rep.smoothing_window > 1) {
        double acc = 0.0;
        for (int k = 0; k < W; ++k) {
            acc += rep.variance(k);
            if (k >= rep.smoothing_window) acc -= rep.variance(k - rep.smoothing_window);
            rep.variance_smoothed(k) = acc / std::min(k + 1, rep.smoothing_window);
        }
    }

    rep.ratio = Eigen::VectorXd::Zero(W);
    rep.populated = populated;
    for (int k = 0; k < W; ++k)
        if (populated[static_cast<size_t>(k)] && rep.crlb_over_n(k) > 0.0)
            rep.ratio(k) = rep.variance(k) / rep.crlb_over_n(k);
    return rep;
}

}  // namespace fsdlab
