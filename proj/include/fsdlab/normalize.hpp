#pragma once

#include <optional>
#include <vector>

#include "fsdlab/flowdist.hpp"
#include "fsdlab/method.hpp"

namespace fsdlab {

/// PPR equalizes the rate of initially processed packets; ESR the rate of
/// packets that actually enter the flow table.
enum class NormKind { PPR, ESR };

NormKind parse_norm_kind(const std::string& name);
std::string norm_kind_name(NormKind kind);

struct NormalizationSpec {
    NormKind kind = NormKind::ESR;
    double p = 1.0;  // target average rate in (0,1]
};

/// Average sampling rate of a configured method under the given normalization.
/// X+SEQ and X collect the same physical packets, so they normalize identically.
double rate(const MethodSpec& spec, const FlowSizeDistribution& dist, NormKind kind);

/// Free parameter for DS inversion: fix one of (p_p, p_f), solve for the other.
struct DsFreeParam {
    enum Which { PP, PF } which = PP;
    double value = 1.0;
};

/// Parameters achieving average rate p. DS needs ds_free; SH inverts its rate
/// map by bisection. Throws Infeasible when the required parameter leaves (0,1].
MethodSpec invert(Method method, double p, const FlowSizeDistribution& dist, NormKind kind,
                  std::optional<DsFreeParam> ds_free = std::nullopt);

/// One point of the DS equal-ESR family p_f(p_p; p).
struct DsCurvePoint {
    double p_p = 0.0;
    double p_f = 0.0;
    bool feasible = false;
};

/// The equal-ESR constraint curve p_f = pD/(p_p(D-1)+1) on a p_p grid.
/// Infeasible points are flagged, not fatal.
std::vector<DsCurvePoint> ds_esr_curve(double p, const FlowSizeDistribution& dist,
                                       const std::vector<double>& pp_grid);

}  // namespace fsdlab
