// fsdlab: flow-size-distribution sampling analysis toolkit.
//
// Subcommands build sampling matrices, compute Fisher/CRLB quantities,
// normalize methods to equal packet budgets, run seeded simulations, apply
// the closed-form estimators and solve the router-constrained operating
// point. JSON outputs embed a manifest so runs can be reproduced exactly.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fsdlab/compare.hpp"
#include "fsdlab/estimate.hpp"
#include "fsdlab/fisher.hpp"
#include "fsdlab/flowdist.hpp"
#include "fsdlab/normalize.hpp"
#include "fsdlab/rsrcopt.hpp"
#include "fsdlab/simulate.hpp"
#include "fsdlab/version.hpp"

using json = nlohmann::json;
using namespace fsdlab;

namespace {

std::string utc_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Manifest {
    std::string command;
    json inputs = json::object();
    std::optional<std::uint64_t> seed;
    std::string timestamp;

    json to_json() const {
        json m{{"command", command},
               {"inputs", inputs},
               {"tool_version", kVersion},
               {"timestamp", timestamp}};
        m["seed"] = seed ? json(*seed) : json(nullptr);
        return m;
    }
};

// temp file + rename so partially written outputs never appear under the final name
void write_atomic(const std::string& path, const std::string& body) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ParseError("cannot write " + tmp);
        out << body;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw ParseError("cannot move " + tmp + " into place");
}

void emit_result(const std::string& path, const Manifest& manifest, const json& payload) {
    json doc{{"manifest", manifest.to_json()}, {"payload", payload}};
    std::string body = doc.dump(2);
    body.push_back('\n');
    if (path.empty() || path == "-")
        std::cout << body;
    else
        write_atomic(path, body);
}

json vec_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

struct DistOptions {
    std::string file;
    int texp_w = 0;
    double texp_d = 0.0;
    double smooth_eps = 0.0;

    FlowSizeDistribution load() const {
        if (!file.empty()) return read_distribution_csv(file, smooth_eps);
        if (texp_w > 0) {
            if (!(texp_d > 1.0)) throw OutOfRange("--texp-d must exceed 1");
            return truncated_exponential(texp_w, solve_rate_for_mean(texp_w, texp_d));
        }
        throw OutOfRange("a distribution is required (--dist or --texp-w/--texp-d)");
    }

    void attach(CLI::App* cmd, bool required = true) {
        auto* f = cmd->add_option("--dist", file, "distribution CSV (size,theta or size,count)");
        auto* w = cmd->add_option("--texp-w", texp_w, "truncated-exponential W");
        cmd->add_option("--texp-d", texp_d, "truncated-exponential mean size D")->needs(w);
        cmd->add_option("--smooth", smooth_eps, "additive smoothing epsilon for zero bins");
        w->excludes(f);
        if (required) {
            // at least one source; checked in load()
        }
    }
};

struct MethodOptions {
    std::string method = "fs";
    double pp = 0.0;
    double pf = 0.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--method", method, "ps|psseq|pssyn|pssynseq|fs|sh|ds")->required();
        cmd->add_option("--pp", pp, "packet-level rate p_p in (0,1]");
        cmd->add_option("--pf", pf, "flow/SYN-level rate p_f in (0,1]");
    }

    MethodSpec spec() const {
        Method m = MethodSpec::parse_method(method);
        switch (m) {
            case Method::PS: return MethodSpec::ps(pp);
            case Method::PS_SEQ: return MethodSpec::ps_seq(pp);
            case Method::PS_SYN: return MethodSpec::ps_syn(pp);
            case Method::PS_SYN_SEQ: return MethodSpec::ps_syn_seq(pp);
            case Method::FS: return MethodSpec::fs(pf);
            case Method::SH: return MethodSpec::sh(pp);
            case Method::DS: return MethodSpec::ds(pf, pp);
        }
        throw Unsupported("unreachable");
    }

    json to_json() const {
        json j{{"method", method}};
        if (pp > 0) j["pp"] = pp;
        if (pf > 0) j["pf"] = pf;
        return j;
    }
};

json spec_to_json(const MethodSpec& s) {
    json j{{"method", s.name()}};
    if (s.uses_pp()) j["pp"] = s.p_p;
    if (s.uses_pf()) j["pf"] = s.p_f;
    return j;
}

SampledCounts read_counts_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw EmptyInput("empty counts file " + path);
    if (line.find("j,count") != 0) throw ParseError(path + ": expected header 'j,count'");
    std::vector<std::uint64_t> counts;
    int lineno = 1;
    long long expected = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError(path + ":" + std::to_string(lineno) + ": missing comma");
        long long j = std::stoll(line.substr(0, comma));
        long long c = std::stoll(line.substr(comma + 1));
        if (j != expected)
            throw ParseError(path + ": rows must start at j=0 and ascend contiguously");
        if (c < 0) throw ParseError(path + ": negative count");
        counts.push_back(static_cast<std::uint64_t>(c));
        ++expected;
    }
    if (counts.size() < 2) throw EmptyInput(path + ": need the j=0 row plus at least one size");
    SampledCounts sc;
    sc.counts = std::move(counts);
    for (auto c : sc.counts) sc.N += c;
    return sc;
}

void write_counts_csv(const std::string& path, const std::vector<SampledCounts>& reps) {
    std::string body = "replicate,j,count\n";
    for (size_t r = 0; r < reps.size(); ++r)
        for (size_t j = 0; j < reps[r].counts.size(); ++j)
            body += std::to_string(r) + "," + std::to_string(j) + "," +
                    std::to_string(reps[r].counts[j]) + "\n";
    write_atomic(path, body);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flow size distribution sampling analysis"};
    app.require_subcommand(1);
    std::string timestamp;
    app.add_option("--timestamp", timestamp,
                   "fixed ISO-8601 manifest timestamp (default: current UTC time)");

    // ---- matrix ----
    auto* c_matrix = app.add_subcommand("matrix", "dump a sampling matrix B as CSV");
    MethodOptions matrix_method;
    int matrix_w = 0;
    std::string matrix_out;
    matrix_method.attach(c_matrix);
    c_matrix->add_option("--w", matrix_w, "maximum flow size W")->required();
    c_matrix->add_option("--out", matrix_out, "output CSV path")->required();

    // ---- fisher ----
    auto* c_fisher = app.add_subcommand("fisher", "CRLB diagonals for one method");
    DistOptions fisher_dist;
    MethodOptions fisher_method;
    std::string fisher_out, fisher_csv;
    fisher_dist.attach(c_fisher);
    fisher_method.attach(c_fisher);
    c_fisher->add_option("--out", fisher_out, "output JSON path (- for stdout)");
    c_fisher->add_option("--csv", fisher_csv, "optional CSV of k,sqrt_crlb");

    // ---- normalize ----
    auto* c_norm = app.add_subcommand("normalize", "parameters achieving a target rate");
    DistOptions norm_dist;
    std::string norm_method, norm_kind = "esr", norm_out;
    double norm_p = 0.0, norm_ds_pp = 0.0, norm_ds_pf = 0.0;
    norm_dist.attach(c_norm);
    c_norm->add_option("--method", norm_method)->required();
    c_norm->add_option("--norm", norm_kind, "ppr|esr");
    c_norm->add_option("--p", norm_p, "target average rate")->required();
    c_norm->add_option("--ds-pp", norm_ds_pp, "DS free p_p");
    c_norm->add_option("--ds-pf", norm_ds_pf, "DS free p_f");
    c_norm->add_option("--out", norm_out);

    // ---- compare ----
    auto* c_cmp = app.add_subcommand("compare", "equal-rate CRLB comparison across methods");
    DistOptions cmp_dist;
    std::string cmp_kind = "esr", cmp_out, cmp_json;
    double cmp_p = 0.0;
    std::vector<std::string> cmp_methods;
    std::vector<double> cmp_ds_pp;
    cmp_dist.attach(c_cmp);
    c_cmp->add_option("--norm", cmp_kind, "ppr|esr");
    c_cmp->add_option("--p", cmp_p, "target average rate")->required();
    c_cmp->add_option("--methods", cmp_methods, "comma-separated method list")
        ->delimiter(',')
        ->required();
    c_cmp->add_option("--ds-pp", cmp_ds_pp, "free p_p per DS entry (repeatable)");
    c_cmp->add_option("--out", cmp_out, "plot-ready CSV (k,method,sqrt_crlb)");
    c_cmp->add_option("--json", cmp_json, "JSON report path");

    // ---- simulate ----
    auto* c_sim = app.add_subcommand("simulate", "seeded Monte Carlo sampling");
    DistOptions sim_dist;
    MethodOptions sim_method;
    std::string sim_records, sim_out;
    std::uint64_t sim_n = 0, sim_seed = 0;
    int sim_reps = 1, sim_records_w = 0;
    sim_dist.attach(c_sim, false);
    sim_method.attach(c_sim);
    c_sim->add_option("--records", sim_records, "flow-record file instead of --dist");
    c_sim->add_option("--records-w", sim_records_w, "truncation W for --records");
    c_sim->add_option("--n", sim_n, "flows per replicate (with --dist)");
    c_sim->add_option("--replicates", sim_reps)->required();
    c_sim->add_option("--seed", sim_seed)->required();
    c_sim->add_option("--out", sim_out, "counts CSV (replicate,j,count)")->required();

    // ---- estimate ----
    auto* c_est = app.add_subcommand("estimate", "closed-form estimators from counts");
    MethodOptions est_method;
    std::string est_counts, est_out, est_kind = "unbiased";
    bool est_project = false;
    est_method.attach(c_est);
    c_est->add_option("--counts", est_counts, "counts CSV (j,count with j=0 row)")->required();
    c_est->add_option("--estimator", est_kind, "unbiased|mle|mle-sh");
    c_est->add_flag("--project-simplex", est_project,
                    "project onto the simplex for presentation (breaks unbiasedness)");
    c_est->add_option("--out", est_out, "output JSON path (- for stdout)");

    // ---- evaluate ----
    auto* c_eval = app.add_subcommand("evaluate", "simulate + estimate, variance vs CRLB");
    DistOptions eval_dist;
    MethodOptions eval_method;
    std::string eval_out, eval_kind = "unbiased";
    std::uint64_t eval_n = 0, eval_seed = 0;
    int eval_reps = 0, eval_window = 0;
    eval_dist.attach(c_eval);
    eval_method.attach(c_eval);
    c_eval->add_option("--n", eval_n, "flows per replicate")->required();
    c_eval->add_option("--replicates", eval_reps)->required();
    c_eval->add_option("--seed", eval_seed)->required();
    c_eval->add_option("--estimator", eval_kind, "unbiased|mle|mle-sh");
    c_eval->add_option("--window", eval_window, "smoothing window (default 100 when W>200)");
    c_eval->add_option("--out", eval_out, "output JSON path (- for stdout)");

    // ---- optimize ----
    auto* c_opt = app.add_subcommand("optimize", "router-constrained DS operating point");
    DistOptions opt_dist;
    double opt_gbps = 0.0, opt_tau_ns = 0.0, opt_tmax = 0.0, opt_flows = 0.0, opt_pkt = 320.0;
    std::string opt_out;
    opt_dist.attach(c_opt, false);
    c_opt->add_option("--capacity-gbps", opt_gbps)->required();
    c_opt->add_option("--tau-ns", opt_tau_ns, "effective per-operation access time")->required();
    c_opt->add_option("--tmax", opt_tmax, "flow-table capacity in records")->required();
    c_opt->add_option("--active-flows", opt_flows, "average active flows D*lambda_F")->required();
    c_opt->add_option("--packet-bits", opt_pkt, "smallest packet size in bits");
    c_opt->add_option("--out", opt_out, "output JSON path (- for stdout)");

    // ---- seqgain ----
    auto* c_seq = app.add_subcommand("seqgain", "effective packet gain of SEQ inference");
    MethodOptions seq_method;
    int seq_k = 0;
    double seq_alpha = 0.0;
    std::string seq_out;
    seq_method.attach(c_seq);
    c_seq->add_option("--k", seq_k, "flow size")->required();
    c_seq->add_option("--alpha", seq_alpha, "gain fraction for the size threshold");
    c_seq->add_option("--out", seq_out, "output JSON path (- for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // exit 2 on usage errors, 0 for --help
    }

    Manifest manifest;
    manifest.timestamp = timestamp.empty() ? utc_now() : timestamp;

    try {
        if (app.got_subcommand(c_matrix)) {
            manifest.command = "matrix";
            Eigen::MatrixXd B = build_matrix_only(matrix_method.spec(), matrix_w);
            write_matrix_csv(B, matrix_out);
        } else if (app.got_subcommand(c_fisher)) {
            manifest.command = "fisher";
            manifest.inputs = {{"dist", fisher_dist.file}, {"method", fisher_method.to_json()}};
            FlowSizeDistribution dist = fisher_dist.load();
            MethodSpec spec = fisher_method.spec();
            FisherBundle fb = make_bundle(build(spec, dist.W()), dist, /*compute_J=*/false);
            json payload{{"method", spec.name()},
                         {"params", spec_to_json(spec)},
                         {"W", dist.W()},
                         {"d", vec_to_json(fb.d)},
                         {"crlb_diag", vec_to_json(fb.crlb_diag)},
                         {"crlb_sqrt", vec_to_json(fb.crlb_diag.cwiseMax(0.0).cwiseSqrt())}};
            emit_result(fisher_out, manifest, payload);
            if (!fisher_csv.empty()) {
                std::string body = "k,sqrt_crlb\n";
                for (int k = 1; k <= dist.W(); ++k)
                    body += std::to_string(k) + "," +
                            std::to_string(std::sqrt(std::max(0.0, fb.crlb_diag(k - 1)))) + "\n";
                write_atomic(fisher_csv, body);
            }
        } else if (app.got_subcommand(c_norm)) {
            manifest.command = "normalize";
            manifest.inputs = {{"method", norm_method}, {"norm", norm_kind}, {"p", norm_p}};
            FlowSizeDistribution dist = norm_dist.load();
            NormKind kind = parse_norm_kind(norm_kind);
            std::optional<DsFreeParam> free;
            if (norm_ds_pp > 0) free = DsFreeParam{DsFreeParam::PP, norm_ds_pp};
            if (norm_ds_pf > 0) free = DsFreeParam{DsFreeParam::PF, norm_ds_pf};
            MethodSpec spec =
                invert(MethodSpec::parse_method(norm_method), norm_p, dist, kind, free);
            json payload{{"spec", spec_to_json(spec)},
                         {"achieved_rate", rate(spec, dist, kind)},
                         {"norm", norm_kind}};
            emit_result(norm_out, manifest, payload);
        } else if (app.got_subcommand(c_cmp)) {
            manifest.command = "compare";
            manifest.inputs = {{"norm", cmp_kind}, {"p", cmp_p}, {"methods", cmp_methods}};
            FlowSizeDistribution dist = cmp_dist.load();
            NormKind kind = parse_norm_kind(cmp_kind);
            std::vector<MethodRequest> reqs;
            size_t ds_at = 0;
            for (const std::string& name : cmp_methods) {
                MethodRequest req;
                req.method = MethodSpec::parse_method(name);
                if (req.method == Method::DS) {
                    if (ds_at >= cmp_ds_pp.size())
                        throw Infeasible("each DS entry needs a --ds-pp value");
                    req.ds_pp = cmp_ds_pp[ds_at++];
                }
                reqs.push_back(req);
            }
            ComparisonRun run = run_comparison(dist, kind, cmp_p, reqs);
            if (!cmp_out.empty()) write_comparison_csv(run, cmp_out);
            json methods = json::array();
            for (const auto& res : run.results)
                methods.push_back({{"spec", spec_to_json(res.spec)},
                                   {"crlb_sqrt", vec_to_json(res.crlb_sqrt)}});
            json payload{{"norm", cmp_kind},
                         {"p", cmp_p},
                         {"methods", methods},
                         {"warnings", run.warnings}};
            if (!cmp_json.empty()) emit_result(cmp_json, manifest, payload);
            for (const auto& w : run.warnings) std::cerr << "warning: " << w << "\n";
        } else if (app.got_subcommand(c_sim)) {
            manifest.command = "simulate";
            manifest.seed = sim_seed;
            SimConfig cfg{sim_seed, sim_reps, sim_n};
            std::vector<SampledCounts> reps;
            if (!sim_records.empty()) {
                if (sim_records_w <= 0) throw OutOfRange("--records needs --records-w");
                FlowPopulation pop = read_flow_records(sim_records, sim_records_w);
                reps = sample_population(pop, sim_method.spec(), cfg);
            } else {
                reps = sample_population(sim_dist.load(), sim_method.spec(), cfg);
            }
            write_counts_csv(sim_out, reps);
        } else if (app.got_subcommand(c_est)) {
            manifest.command = "estimate";
            manifest.inputs = {{"counts", est_counts}, {"method", est_method.to_json()}};
            SampledCounts counts = read_counts_csv(est_counts);
            MethodSpec spec = est_method.spec();
            EstimatorKind kind = parse_estimator(est_kind);
            if (spec.method == Method::SH) kind = EstimatorKind::MleSh;
            Eigen::VectorXd th = estimate(counts, spec, kind);
            json payload{{"method", spec.name()},
                         {"N", counts.N},
                         {"estimator", est_kind},
                         {"theta_hat", vec_to_json(th)},
                         {"sum", th.sum()}};
            if (est_project) payload["theta_hat_projected"] = vec_to_json(project_simplex(th));
            emit_result(est_out, manifest, payload);
        } else if (app.got_subcommand(c_eval)) {
            manifest.command = "evaluate";
            manifest.seed = eval_seed;
            FlowSizeDistribution dist = eval_dist.load();
            MethodSpec spec = eval_method.spec();
            EstimatorKind kind = parse_estimator(eval_kind);
            if (spec.method == Method::SH) kind = EstimatorKind::MleSh;
            SimConfig cfg{eval_seed, eval_reps, eval_n};
            VarianceReport vr = empirical_variance_vs_crlb(dist, spec, cfg, kind, eval_window);
            json ratio = json::array(), flags = json::array();
            for (int k = 0; k < dist.W(); ++k) {
                if (vr.populated[static_cast<size_t>(k)])
                    ratio.push_back(vr.ratio(k));
                else
                    ratio.push_back(nullptr);
                flags.push_back(static_cast<bool>(vr.populated[static_cast<size_t>(k)]));
            }
            json payload{{"method", spec.name()},
                         {"mean", vec_to_json(vr.mean)},
                         {"variance", vec_to_json(vr.variance)},
                         {"variance_smoothed", vec_to_json(vr.variance_smoothed)},
                         {"crlb_over_n", vec_to_json(vr.crlb_over_n)},
                         {"ratio", ratio},
                         {"populated", flags},
                         {"smoothing_window", vr.smoothing_window}};
            emit_result(eval_out, manifest, payload);
        } else if (app.got_subcommand(c_opt)) {
            manifest.command = "optimize";
            manifest.inputs = {{"capacity_gbps", opt_gbps},
                               {"tau_ns", opt_tau_ns},
                               {"tmax", opt_tmax},
                               {"active_flows", opt_flows}};
            ResourceProfile profile;
            profile.capacity_bps = opt_gbps * 1e9;
            profile.tau_s = opt_tau_ns * 1e-9;
            profile.t_max = opt_tmax;
            profile.active_flows = opt_flows;
            profile.packet_bits = opt_pkt;
            ResourceCaps caps = constraints(profile);
            json payload{{"pf_hat", caps.pf_hat}, {"pp_hat", caps.pp_hat}};
            if (!opt_dist.file.empty() || opt_dist.texp_w > 0) {
                FlowSizeDistribution dist = opt_dist.load();
                MethodSpec spec = optimal_ds(profile);
                payload["esr"] = rate(spec, dist, NormKind::ESR);
                FisherBundle fb = make_bundle(build(spec, dist.W()), dist, false);
                payload["crlb_diag_at_corner"] = vec_to_json(fb.crlb_diag);
            }
            emit_result(opt_out, manifest, payload);
        } else if (app.got_subcommand(c_seq)) {
            manifest.command = "seqgain";
            MethodSpec spec = seq_method.spec();
            SeqGain g = seq_gain_exact(spec, seq_k);
            json payload{{"method", spec.name()},
                         {"k", seq_k},
                         {"gain", g.gain},
                         {"e_inferred", g.e_inferred},
                         {"e_physical", g.e_physical},
                         {"var_inferred", g.var_inferred},
                         {"var_approx", seq_gain_var_approx(spec.p_p, seq_k)}};
            if (seq_alpha > 0) payload["k_threshold"] = seq_gain_threshold(seq_alpha, spec.p_p);
            emit_result(seq_out, manifest, payload);
        }
    } catch (const Error& e) {
        std::cerr << e.name() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
