#pragma once

#include <Eigen/Dense>

#include "fsdlab/method.hpp"

namespace fsdlab {

/// Maximum W for which the dense binomial inverses (PS, PS+SYN) are emitted;
/// beyond this their entries leave double range for small p.
inline constexpr int kBinomialInverseMaxW = 300;

/// Maximum supported W for B itself.
inline constexpr int kMaxW = 5000;

/// Column-stochastic sampling matrix B ((W+1) x W, row j = observed size,
/// column k = original size) together with the analytic inverse of its
/// square lower block.
struct SamplingMatrix {
    MethodSpec spec;
    int W = 0;
    Eigen::MatrixXd B;          // (W+1) x W
    Eigen::RowVectorXd b0;      // top row
    Eigen::MatrixXd Btilde;     // W x W upper-triangular block (rows j = 1..W)
    Eigen::MatrixXd BtildeInv;  // analytic inverse of Btilde
    int inv_bandwidth = 0;      // BtildeInv_{jk} = 0 for k - j > inv_bandwidth (W-1 if dense)
    // closed form of BtildeInv^T b0: the evaporation row pushed through the
    // inverse. Exact per method, so the information rank-one update never has
    // to cancel the alternating binomial entries numerically.
    Eigen::VectorXd evap_weights;

    bool b0_is_zero() const { return b0.cwiseAbs().maxCoeff() == 0.0; }
    bool b0_is_constant() const { return (b0.array() == b0(0)).all(); }
};

/// Builds B and the closed-form inverse of its lower block.
/// PS/PS+SYN inverses are gated to W <= kBinomialInverseMaxW (Unsupported).
SamplingMatrix build(const MethodSpec& spec, int W);

/// Closed-form inverse of Btilde alone (no numerical inversion involved).
Eigen::MatrixXd analytic_inverse(const MethodSpec& spec, int W);

/// B without the inverse; supports W up to kMaxW for every method.
Eigen::MatrixXd build_matrix_only(const MethodSpec& spec, int W);

/// Writes B as CSV, row j = 0 first.
void write_matrix_csv(const Eigen::MatrixXd& B, const std::string& path);

}  // namespace fsdlab
