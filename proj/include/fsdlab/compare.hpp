#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fsdlab/fisher.hpp"
#include "fsdlab/normalize.hpp"

namespace fsdlab {

/// One method to include in a comparison; DS entries carry their free p_p.
struct MethodRequest {
    Method method = Method::FS;
    std::optional<double> ds_pp;  // required for DS
};

struct MethodResult {
    MethodSpec spec;
    Eigen::VectorXd crlb_diag;
    Eigen::VectorXd crlb_sqrt;
};

/// Equal-rate comparison: every method is normalized to the same average rate
/// before its CRLB diagonals are computed. Methods that cannot reach the rate
/// are dropped with a warning rather than failing the run.
struct ComparisonRun {
    NormKind kind = NormKind::ESR;
    double p = 0.0;
    std::vector<MethodResult> results;
    std::vector<std::string> warnings;
};

ComparisonRun run_comparison(const FlowSizeDistribution& dist, NormKind kind, double p,
                             const std::vector<MethodRequest>& methods);

/// Behaviour of the DS diagonals along the equal-ESR curve: decreasing in p_p
/// for j >= 2 always; for j = 1 only when theta_2 >= (D-1)/D theta_1(1-theta_1),
/// otherwise the optimum is interior and solves
/// p_p* = sqrt(theta_2 / ((D-1)(theta_1(1-theta_1) - theta_2))).
struct DsMonotonicityReport {
    bool condition_j1 = false;    // the displayed condition above
    bool monotone_j2_plus = false;
    bool monotone_j1 = false;
    double pp_star_formula = 0.0;
    std::optional<double> pp_star_located;  // golden-section argmin when interior
};

DsMonotonicityReport check_ds_monotonicity(const FlowSizeDistribution& dist, double p,
                                           const std::vector<double>& pp_grid);

struct ShVsFsReport {
    double sh_pp = 0.0;
    bool fs_le_sh_j2_plus = false;
    bool condition_j1 = false;  // theta_2 >= theta_1 (1 - theta_1)
    bool fs_le_sh_j1 = false;
};

ShVsFsReport check_sh_vs_fs(const FlowSizeDistribution& dist, double p, NormKind kind);

struct DsVsShReport {
    bool hypothesis_met = false;  // pD >= 1, p_p,SH <= (pD-1)/(D-1) and <= p_p,DS
    double sh_pp = 0.0;
    double sh_pp_bound = 0.0;
    bool ds_le_sh_all = false;  // meaningful only when hypothesis_met
};

DsVsShReport check_ds_vs_sh(const FlowSizeDistribution& dist, double p, double ds_pp);

/// Per-size outcome of a two-method diagonal comparison.
struct DiagComparison {
    MethodSpec a, b;
    Eigen::VectorXd diag_a, diag_b;
    std::vector<int> a_better_at;  // sizes where a strictly beats b (1e-9 rel slack)
    std::vector<int> b_better_at;
};

DiagComparison check_ps_vs_pssyn(const FlowSizeDistribution& dist, double p, NormKind kind);
DiagComparison check_pssynseq_vs_psseq(const FlowSizeDistribution& dist, double p, NormKind kind);

/// Plot-ready rows `k,method,sqrt_crlb`.
void write_comparison_csv(const ComparisonRun& run, const std::string& path);

}  // namespace fsdlab
