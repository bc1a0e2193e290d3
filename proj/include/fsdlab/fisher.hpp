#pragma once

#include <optional>

#include <Eigen/Dense>

#include "fsdlab/flowdist.hpp"
#include "fsdlab/sampmat.hpp"

namespace fsdlab {

/// Any sampled-flow probability at or below this is treated as an underflow
/// (the Fisher weights 1/d_j would drown in infinities).
inline constexpr double kUnderflowFloor = 1e-300;

/// Sampled-flow distribution, information matrices and the constrained CRLB
/// for one (method, distribution) pair. All entries refer to a single flow;
/// divide Cplus by N for the N-flow bound.
struct FisherBundle {
    MethodSpec spec;
    int W = 0;
    Eigen::VectorXd d;               // W+1 sampled-size probabilities, index j = 0..W
    std::optional<Eigen::MatrixXd> J;  // unconstrained Fisher matrix (skipped for large W)
    Eigen::MatrixXd Jtilde_inv;      // inverse of the b0-less information
    Eigen::MatrixXd Jinv;            // unconstrained inverse via the rank-one update
    Eigen::MatrixXd Cplus;           // constrained pseudo-inverse Jinv - theta theta^T
    Eigen::VectorXd crlb_diag;       // diagonal of Cplus
};

/// d = B theta. Throws Underflow when a structurally reachable outcome has
/// probability <= kUnderflowFloor.
Eigen::VectorXd sampled_dist(const SamplingMatrix& m, const FlowSizeDistribution& dist);
Eigen::VectorXd sampled_dist(const Eigen::MatrixXd& B, const FlowSizeDistribution& dist);

/// J = B^T D(theta) B by explicit accumulation; rows with no support are skipped.
Eigen::MatrixXd fisher_unconstrained(const Eigen::MatrixXd& B, const FlowSizeDistribution& dist);

/// Inverse of the b0-less information, from the analytic block inverse.
Eigen::MatrixXd jtilde_inverse(const SamplingMatrix& m, const Eigen::VectorXd& d);

/// Unconstrained inverse via the rank-one downdate of Jtilde_inv;
/// reduces to Jtilde_inv when b0 = 0.
Eigen::MatrixXd inverse_prop1(const SamplingMatrix& m, const FlowSizeDistribution& dist);

/// Full bundle. compute_J controls whether the O(W^3) forward matrix is kept.
FisherBundle make_bundle(const SamplingMatrix& m, const FlowSizeDistribution& dist,
                         bool compute_J = true);

/// Per-method closed-form diagonals of the unconstrained inverse.
/// PS is subject to the same W cap as its analytic block inverse.
Eigen::VectorXd closed_form_diag(const MethodSpec& spec, const FlowSizeDistribution& dist);

/// Structure check for SH/DS (FS degenerates to diagonal): inverts the b0-less
/// information numerically and verifies it is tridiagonal with the expected
/// off-diagonal entries.
struct TridiagonalReport {
    bool pass = false;
    double off_band_mass = 0.0;      // max |entry| outside the tridiagonal band, relative
    double off_diag_formula_err = 0.0;  // worst relative error of the off-diagonal formula
};
TridiagonalReport tridiagonal_check(const MethodSpec& spec, const FlowSizeDistribution& dist);

}  // namespace fsdlab
