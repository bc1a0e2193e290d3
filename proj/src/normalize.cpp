#include "fsdlab/normalize.hpp"

#include <cmath>

namespace fsdlab {

namespace {

// Average packets sampled per packet under SH: (pp/D) sum_j j sum_{k>=j} q^(k-j) theta_k.
// The inner sums use exponent differences only, so tiny pp and large W stay bounded.
double sh_average_rate(double pp, const FlowSizeDistribution& dist) {
    const int W = dist.W();
    double q = 1.0 - pp;
    double total = 0.0;
    double tail = 0.0;  // T_j = theta_j + q T_{j+1}
    for (int j = W; j >= 1; --j) {
        tail = dist.theta(j) + q * tail;
        total += static_cast<double>(j) * tail;
    }
    return pp * total / dist.mean_size();
}

double sh_invert_rate(double p, const FlowSizeDistribution& dist) {
    if (!(p > 0.0) || p > 1.0) throw Infeasible("SH target rate must lie in (0,1]");
    double lo = 1e-12, hi = 1.0;
    if (sh_average_rate(lo, dist) > p) return lo;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (sh_average_rate(mid, dist) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double checked_param(double value, const char* what) {
    if (!(value > 0.0) || value > 1.0 + 1e-12)
        throw Infeasible(std::string(what) + " = " + std::to_string(value) +
                         " falls outside (0,1] under this normalization");
    return std::min(value, 1.0);
}

}  // namespace

NormKind parse_norm_kind(const std::string& name) {
    if (name == "ppr") return NormKind::PPR;
    if (name == "esr") return NormKind::ESR;
    throw OutOfRange("normalization must be 'ppr' or 'esr'");
}

std::string norm_kind_name(NormKind kind) { return kind == NormKind::PPR ? "ppr" : "esr"; }

double rate(const MethodSpec& spec, const FlowSizeDistribution& dist, NormKind kind) {
    const double D = dist.mean_size();
    switch (spec.method) {
        case Method::PS:
        case Method::PS_SEQ: return spec.p_p;
        case Method::FS: return spec.p_f;
        case Method::SH: return sh_average_rate(spec.p_p, dist);
        case Method::PS_SYN:
        case Method::PS_SYN_SEQ:
            if (kind == NormKind::PPR) return spec.p_p;
            return spec.p_p * (spec.p_p * (D - 1.0) + 1.0) / D;
        case Method::DS:
            if (kind == NormKind::PPR) return spec.p_f / D + spec.p_p * (1.0 - 1.0 / D);
            return spec.p_f * (spec.p_p * (D - 1.0) + 1.0) / D;
    }
    throw Unsupported("unreachable");
}

MethodSpec invert(Method method, double p, const FlowSizeDistribution& dist, NormKind kind,
                  std::optional<DsFreeParam> ds_free) {
    if (!(p > 0.0) || p > 1.0) throw Infeasible("target rate must lie in (0,1]");
    const double D = dist.mean_size();
    switch (method) {
        case Method::PS: return MethodSpec::ps(p);
        case Method::PS_SEQ: return MethodSpec::ps_seq(p);
        case Method::FS: return MethodSpec::fs(p);
        case Method::SH: return MethodSpec::sh(sh_invert_rate(p, dist));
        case Method::PS_SYN:
        case Method::PS_SYN_SEQ: {
            double pp;
            if (kind == NormKind::PPR || D - 1.0 < 1e-15) {
                pp = p;
            } else {
                pp = (-1.0 + std::sqrt(1.0 + 4.0 * p * D * (D - 1.0))) / (2.0 * (D - 1.0));
            }
            pp = checked_param(pp, "p_p");
            return method == Method::PS_SYN ? MethodSpec::ps_syn(pp) : MethodSpec::ps_syn_seq(pp);
        }
        case Method::DS: {
            if (!ds_free) throw Infeasible("DS inversion needs the free parameter fixed");
            double pp, pf;
            if (ds_free->which == DsFreeParam::PP) {
                pp = checked_param(ds_free->value, "p_p");
                pf = (kind == NormKind::PPR) ? p * D - pp * (D - 1.0)
                                             : p * D / (pp * (D - 1.0) + 1.0);
                pf = checked_param(pf, "p_f");
            } else {
                pf = checked_param(ds_free->value, "p_f");
                if (D - 1.0 < 1e-15) {
                    if (std::abs(pf - p) > 1e-12)
                        throw Infeasible("at D = 1 the DS rate is p_f alone");
                    pp = 1.0;
                } else {
                    pp = (kind == NormKind::PPR) ? (p * D - pf) / (D - 1.0)
                                                 : (p * D / pf - 1.0) / (D - 1.0);
                    pp = checked_param(pp, "p_p");
                }
            }
            return MethodSpec::ds(pf, pp);
        }
    }
    throw Unsupported("unreachable");
}

std::vector<DsCurvePoint> ds_esr_curve(double p, const FlowSizeDistribution& dist,
                                       const std::vector<double>& pp_grid) {
    if (!(p > 0.0) || p > 1.0) throw Infeasible("target rate must lie in (0,1]");
    const double D = dist.mean_size();
    std::vector<DsCurvePoint> out;
    out.reserve(pp_grid.size());
    for (double pp : pp_grid) {
        DsCurvePoint pt;
        pt.p_p = pp;
        if (pp > 0.0 && pp <= 1.0) {
            pt.p_f = p * D / (pp * (D - 1.0) + 1.0);
            pt.feasible = pt.p_f > 0.0 && pt.p_f <= 1.0;
        }
        out.push_back(pt);
    }
    return out;
}

}  // namespace fsdlab
