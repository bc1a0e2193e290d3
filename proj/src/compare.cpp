#include "fsdlab/compare.hpp"

#include <cmath>
#include <fstream>

namespace fsdlab {

namespace {

constexpr double kRelSlack = 1e-9;  // absorbs roundoff in algebraically-equal cases

Eigen::VectorXd crlb_diag_for(const MethodSpec& spec, const FlowSizeDistribution& dist) {
    return make_bundle(build(spec, dist.W()), dist, /*compute_J=*/false).crlb_diag;
}

bool le_with_slack(double a, double b) { return a <= b + kRelSlack * std::max(std::abs(a), std::abs(b)); }

}  // namespace

ComparisonRun run_comparison(const FlowSizeDistribution& dist, NormKind kind, double p,
                             const std::vector<MethodRequest>& methods) {
    ComparisonRun run;
    run.kind = kind;
    run.p = p;
    for (const MethodRequest& req : methods) {
        try {
            std::optional<DsFreeParam> free;
            if (req.method == Method::DS) {
                if (!req.ds_pp) throw Infeasible("DS request is missing its free p_p");
                free = DsFreeParam{DsFreeParam::PP, *req.ds_pp};
            }
            MethodSpec spec = invert(req.method, p, dist, kind, free);
            MethodResult res;
            res.spec = spec;
            res.crlb_diag = crlb_diag_for(spec, dist);
            res.crlb_sqrt = res.crlb_diag.cwiseMax(0.0).cwiseSqrt();
            run.results.push_back(std::move(res));
        } catch (const Error& e) {
            run.warnings.push_back(MethodSpec::method_name(req.method) + " dropped: " + e.what());
        }
    }
    return run;
}

DsMonotonicityReport check_ds_monotonicity(const FlowSizeDistribution& dist, double p,
                                           const std::vector<double>& pp_grid) {
    const int W = dist.W();
    const double D = dist.mean_size();
    DsMonotonicityReport rep;
    rep.condition_j1 =
        dist.theta(2) >= (D - 1.0) / D * dist.theta(1) * (1.0 - dist.theta(1)) - 1e-15;

    auto diag_at = [&](double pp) {
        MethodSpec spec = invert(Method::DS, p, dist, NormKind::ESR,
                                 DsFreeParam{DsFreeParam::PP, pp});
        return make_bundle(build(spec, W), dist, false).Jinv.diagonal().eval();
    };

    std::vector<Eigen::VectorXd> diags;
    std::vector<double> grid;
    for (double pp : pp_grid) {
        try {
            diags.push_back(diag_at(pp));
            grid.push_back(pp);
        } catch (const Infeasible&) {
            // outside the feasible window; skipped
        }
    }
    rep.monotone_j2_plus = true;
    rep.monotone_j1 = true;
    for (size_t i = 1; i < diags.size(); ++i) {
        for (int j = 2; j <= W; ++j)
            if (!le_with_slack(diags[i](j - 1), diags[i - 1](j - 1))) rep.monotone_j2_plus = false;
        if (!le_with_slack(diags[i](0), diags[i - 1](0))) rep.monotone_j1 = false;
    }

    const double t1 = dist.theta(1), t2 = dist.theta(2);
    double denom = (D - 1.0) * (t1 * (1.0 - t1) - t2);
    rep.pp_star_formula = denom > 0.0 ? std::sqrt(t2 / denom) : 1.0;

    if (!rep.condition_j1 && !grid.empty()) {
        // golden-section on the j=1 diagonal along the ESR curve
        double lo = grid.front(), hi = 1.0;
        auto f = [&](double pp) { return diag_at(pp)(0); };
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = lo, b = hi;
        double c = b - gr * (b - a), d = a + gr * (b - a);
        double fc = f(c), fd = f(d);
        for (int it = 0; it < 120 && (b - a) > 1e-10; ++it) {
            if (fc < fd) {
                b = d; d = c; fd = fc;
                c = b - gr * (b - a);
                fc = f(c);
            } else {
                a = c; c = d; fc = fd;
                d = a + gr * (b - a);
                fd = f(d);
            }
        }
        rep.pp_star_located = 0.5 * (a + b);
    }
    return rep;
}

ShVsFsReport check_sh_vs_fs(const FlowSizeDistribution& dist, double p, NormKind kind) {
    ShVsFsReport rep;
    MethodSpec sh = invert(Method::SH, p, dist, kind);
    MethodSpec fs = invert(Method::FS, p, dist, kind);
    rep.sh_pp = sh.p_p;
    Eigen::VectorXd dsh = crlb_diag_for(sh, dist);
    Eigen::VectorXd dfs = crlb_diag_for(fs, dist);
    rep.fs_le_sh_j2_plus = true;
    for (int j = 2; j <= dist.W(); ++j)
        if (!le_with_slack(dfs(j - 1), dsh(j - 1))) rep.fs_le_sh_j2_plus = false;
    rep.condition_j1 = dist.theta(2) >= dist.theta(1) * (1.0 - dist.theta(1)) - 1e-15;
    rep.fs_le_sh_j1 = le_with_slack(dfs(0), dsh(0));
    return rep;
}

DsVsShReport check_ds_vs_sh(const FlowSizeDistribution& dist, double p, double ds_pp) {
    DsVsShReport rep;
    const double D = dist.mean_size();
    MethodSpec sh = invert(Method::SH, p, dist, NormKind::ESR);
    rep.sh_pp = sh.p_p;
    if (p * D < 1.0) {
        rep.sh_pp_bound = 0.0;
        rep.hypothesis_met = false;  // bound would be negative
        return rep;
    }
    rep.sh_pp_bound = (p * D - 1.0) / (D - 1.0);
    rep.hypothesis_met = rep.sh_pp <= rep.sh_pp_bound && rep.sh_pp <= ds_pp;
    if (!rep.hypothesis_met) return rep;

    MethodSpec ds = invert(Method::DS, p, dist, NormKind::ESR, DsFreeParam{DsFreeParam::PP, ds_pp});
    Eigen::VectorXd dds = crlb_diag_for(ds, dist);
    Eigen::VectorXd dsh = crlb_diag_for(sh, dist);
    rep.ds_le_sh_all = true;
    for (int j = 1; j <= dist.W(); ++j)
        if (!le_with_slack(dds(j - 1), dsh(j - 1))) rep.ds_le_sh_all = false;
    return rep;
}

namespace {

DiagComparison compare_two(const MethodSpec& a, const MethodSpec& b,
                           const FlowSizeDistribution& dist) {
    DiagComparison cmp;
    cmp.a = a;
    cmp.b = b;
    cmp.diag_a = crlb_diag_for(a, dist);
    cmp.diag_b = crlb_diag_for(b, dist);
    for (int j = 1; j <= dist.W(); ++j) {
        double da = cmp.diag_a(j - 1), db = cmp.diag_b(j - 1);
        if (da < db && !le_with_slack(db, da)) cmp.a_better_at.push_back(j);
        if (db < da && !le_with_slack(da, db)) cmp.b_better_at.push_back(j);
    }
    return cmp;
}

}  // namespace

DiagComparison check_ps_vs_pssyn(const FlowSizeDistribution& dist, double p, NormKind kind) {
    return compare_two(invert(Method::PS, p, dist, kind), invert(Method::PS_SYN, p, dist, kind),
                       dist);
}

DiagComparison check_pssynseq_vs_psseq(const FlowSizeDistribution& dist, double p, NormKind kind) {
    return compare_two(invert(Method::PS_SYN_SEQ, p, dist, kind),
                       invert(Method::PS_SEQ, p, dist, kind), dist);
}

void write_comparison_csv(const ComparisonRun& run, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << "k,method,sqrt_crlb\n";
    out.precision(17);
    for (const MethodResult& res : run.results)
        for (int k = 1; k <= res.crlb_sqrt.size(); ++k)
            out << k << "," << res.spec.name() << "," << res.crlb_sqrt(k - 1) << "\n";
    return;
}

}  // namespace fsdlab
