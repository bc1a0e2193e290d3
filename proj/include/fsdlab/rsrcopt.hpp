#pragma once

#include <Eigen/Dense>

#include "fsdlab/flowdist.hpp"
#include "fsdlab/method.hpp"

namespace fsdlab {

/// Router-side budget for one measurement interval. tau_s is the total
/// effective per-operation memory access time.
struct ResourceProfile {
    double capacity_bps = 0.0;      // link capacity C in bits/second
    double packet_bits = 320.0;     // smallest packet P (default 40 bytes)
    double tau_s = 0.0;             // memory access time in seconds
    double t_max = 0.0;             // flow-table capacity in records
    double active_flows = 0.0;      // average active flows D*lambda_F

    void validate() const {
        if (!(capacity_bps > 0) || !(packet_bits > 0) || !(tau_s > 0) || !(t_max > 0) ||
            !(active_flows > 0))
            throw OutOfRange("every resource-profile field must be strictly positive");
    }
};

/// Feasibility caps: p_f <= min(T_max/(D lambda_F), P/(tau C)), p_p <= P/(2 tau C),
/// both clamped to 1. The factor 2 covers a lookup plus an update.
struct ResourceCaps {
    double pf_hat = 0.0;
    double pp_hat = 0.0;
    bool pf_table_bound = false;  // true when the flow-table term is the binding one
    bool pf_clamped = false;      // cap hit 1
    bool pp_clamped = false;
};

ResourceCaps constraints(const ResourceProfile& profile);

/// The ESR-optimal operating point sits at the corner of the constraint box.
MethodSpec optimal_ds(const ResourceProfile& profile);

/// CRLB diagonals at the corner for the base profile and the 2x T_max / 2x C
/// variants. Throws CapSaturated when a cap clamps at 1 or the binding
/// constraint switches, which voids the scaling claims.
struct ScalingReport {
    ResourceCaps base, double_tmax, double_capacity;
    Eigen::VectorXd diag_base;
    Eigen::VectorXd ratio_tmax;      // elementwise diag(2x T_max) / diag(base), ~ 1/2
    Eigen::VectorXd ratio_capacity;  // elementwise diag(2x C) / diag(base), ~ 2
};

ScalingReport crlb_scaling_report(const ResourceProfile& profile,
                                  const FlowSizeDistribution& dist);

}  // namespace fsdlab
