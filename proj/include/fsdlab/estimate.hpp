#pragma once

#include <Eigen/Dense>

#include "fsdlab/fisher.hpp"
#include "fsdlab/simulate.hpp"

namespace fsdlab {

enum class EstimatorKind { Unbiased, MleSyn, MleSh };

EstimatorKind parse_estimator(const std::string& name);

/// theta_hat = Btilde^-1 [M'_1..M'_W]^T / N for SYN-based methods.
/// Unbiased; components may be negative and are returned raw.
Eigen::VectorXd estimate_unbiased(const SampledCounts& counts, const MethodSpec& spec);

/// Closed-form MLE for methods with b0 = q*1: the unbiased form with N
/// replaced by sum(M'_j)/p. Sums to one exactly.
Eigen::VectorXd estimate_mle_syn(const SampledCounts& counts, const MethodSpec& spec);

/// Closed-form MLE for SH; folds M'_0 into the first coordinate.
Eigen::VectorXd estimate_mle_sh(const SampledCounts& counts, const MethodSpec& spec);

/// Dispatch on kind (with method checks). Presentation-only simplex projection
/// is available separately; it breaks unbiasedness.
Eigen::VectorXd estimate(const SampledCounts& counts, const MethodSpec& spec, EstimatorKind kind);

/// Euclidean projection onto the probability simplex.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v);

/// Per-size empirical estimator variance across replicates vs. CRLB/N.
struct VarianceReport {
    Eigen::VectorXd mean;           // mean of theta_hat over replicates
    Eigen::VectorXd variance;       // unbiased sample variance per component
    Eigen::VectorXd variance_smoothed;  // trailing moving average (window below)
    Eigen::VectorXd crlb_over_n;    // Cplus diagonal / N
    Eigen::VectorXd ratio;          // variance / crlb_over_n, 0 where unpopulated
    std::vector<bool> populated;    // false where no replicate observed the size
    int smoothing_window = 1;
};

/// Simulates, estimates and compares against the CRLB. Needs >= 30 replicates.
/// window <= 0 picks the default: 100 when W > 200, else none.
VarianceReport empirical_variance_vs_crlb(const FlowSizeDistribution& dist, const MethodSpec& spec,
                                          const SimConfig& config, EstimatorKind kind,
                                          int window = 0);

}  // namespace fsdlab
