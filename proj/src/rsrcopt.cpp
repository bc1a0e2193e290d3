#include "fsdlab/rsrcopt.hpp"

#include <algorithm>

#include "fsdlab/fisher.hpp"

namespace fsdlab {

ResourceCaps constraints(const ResourceProfile& profile) {
    profile.validate();
    ResourceCaps caps;
    double table_term = profile.t_max / profile.active_flows;
    double packet_term = profile.packet_bits / (profile.tau_s * profile.capacity_bps);
    caps.pf_table_bound = table_term <= packet_term;
    double pf = std::min(table_term, packet_term);
    double pp = profile.packet_bits / (2.0 * profile.tau_s * profile.capacity_bps);
    caps.pf_clamped = pf > 1.0;
    caps.pp_clamped = pp > 1.0;
    caps.pf_hat = std::min(pf, 1.0);
    caps.pp_hat = std::min(pp, 1.0);
    return caps;
}

MethodSpec optimal_ds(const ResourceProfile& profile) {
    // The equal-ESR variance is monotone decreasing along the constraint curve,
    // so the optimum sits at the box corner.
    ResourceCaps caps = constraints(profile);
    return MethodSpec::ds(caps.pf_hat, caps.pp_hat);
}

ScalingReport crlb_scaling_report(const ResourceProfile& profile,
                                  const FlowSizeDistribution& dist) {
    ScalingReport rep;
    rep.base = constraints(profile);

    ResourceProfile more_table = profile;
    more_table.t_max *= 2.0;
    rep.double_tmax = constraints(more_table);

    ResourceProfile more_capacity = profile;
    more_capacity.capacity_bps *= 2.0;
    rep.double_capacity = constraints(more_capacity);

    for (const ResourceCaps& c : {rep.base, rep.double_tmax, rep.double_capacity}) {
        if (c.pf_clamped || c.pp_clamped)
            throw CapSaturated("a sampling cap clamps at 1; the O(1/T_max) and O(C) scaling "
                               "claims do not apply");
        if (c.pf_table_bound != rep.base.pf_table_bound)
            throw CapSaturated("the binding p_f constraint switches between variants; scaling "
                               "claims need an interior flow-table-bound regime");
    }
    if (!rep.base.pf_table_bound)
        throw CapSaturated("p_f is packet-time bound, not flow-table bound; the 1/T_max scaling "
                           "claim does not apply");

    auto corner_diag = [&dist](const ResourceCaps& caps) {
        MethodSpec spec = MethodSpec::ds(caps.pf_hat, caps.pp_hat);
        return make_bundle(build(spec, dist.W()), dist, /*compute_J=*/false).crlb_diag;
    };
    rep.diag_base = corner_diag(rep.base);
    Eigen::VectorXd diag_tmax = corner_diag(rep.double_tmax);
    Eigen::VectorXd diag_cap = corner_diag(rep.double_capacity);
    rep.ratio_tmax = diag_tmax.cwiseQuotient(rep.diag_base);
    rep.ratio_capacity = diag_cap.cwiseQuotient(rep.diag_base);
    return rep;
}

}  // namespace fsdlab
