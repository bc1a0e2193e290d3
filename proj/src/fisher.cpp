#include "fsdlab/fisher.hpp"

#include <cmath>

namespace fsdlab {

namespace {

Eigen::VectorXd theta_vec(const FlowSizeDistribution& dist) {
    return Eigen::Map<const Eigen::VectorXd>(dist.theta().data(), dist.W());
}

double log_choose(int k, int j) {
    return std::lgamma(k + 1.0) - std::lgamma(j + 1.0) - std::lgamma(k - j + 1.0);
}

void require_dims(const SamplingMatrix& m, const FlowSizeDistribution& dist) {
    if (m.W != dist.W()) throw OutOfRange("matrix and distribution disagree on W");
}

}  // namespace

Eigen::VectorXd sampled_dist(const Eigen::MatrixXd& B, const FlowSizeDistribution& dist) {
    if (B.cols() != dist.W()) throw OutOfRange("matrix and distribution disagree on W");
    Eigen::VectorXd d = B * theta_vec(dist);
    for (Eigen::Index j = 0; j < d.size(); ++j) {
        bool reachable = B.row(j).cwiseAbs().maxCoeff() > 0.0;
        if (reachable && d(j) <= kUnderflowFloor)
            throw Underflow("sampled-size probability d_" + std::to_string(j) +
                            " underflows; increase the sampling rate or reduce W");
    }
    return d;
}

Eigen::VectorXd sampled_dist(const SamplingMatrix& m, const FlowSizeDistribution& dist) {
    require_dims(m, dist);
    return sampled_dist(m.B, dist);
}

Eigen::MatrixXd fisher_unconstrained(const Eigen::MatrixXd& B, const FlowSizeDistribution& dist) {
    Eigen::VectorXd d = sampled_dist(B, dist);
    const int W = static_cast<int>(B.cols());
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(W, W);
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
        if (B.row(j).cwiseAbs().maxCoeff() == 0.0) continue;  // unreachable outcome
        J.noalias() += (B.row(j).transpose() * B.row(j)) / d(j);
    }
    return J;
}

Eigen::MatrixXd jtilde_inverse(const SamplingMatrix& m, const Eigen::VectorXd& d) {
    const int W = m.W;
    const int bw = m.inv_bandwidth;
    const Eigen::MatrixXd& inv = m.BtildeInv;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(W, W);
    // (Jt^-1)_{ik} = sum_j inv(i,j) d_{j+1} inv(k,j); row i has support [i, i+bw],
    // so entries with k - i > bw vanish. Multiply d in first so astronomically
    // large inverse entries never pair up.
    for (int i = 0; i < W; ++i) {
        for (int k = i; k <= std::min(W - 1, i + bw); ++k) {
            int jhi = std::min(i + bw, W - 1);
            double s = 0.0;
            for (int j = k; j <= jhi; ++j) s += (inv(i, j) * d(j + 1)) * inv(k, j);
            out(i, k) = s;
            out(k, i) = s;
        }
    }
    return out;
}

namespace {

// Rank-one downdate of the b0-less inverse. For a constant evaporation row
// (b0 = q*1) the update collapses to -(q/p) theta theta^T. Otherwise the
// update vector is assembled from the closed-form evaporation weights
// c = BtildeInv^T b0: v = BtildeInv (d .* c), s = d0 + sum c^2 d. Going
// through c keeps every partial sum single-signed, where the direct product
// Jt_inv * b0 would cancel at the magnitude of the binomial inverse entries.
Eigen::MatrixXd apply_rank_one(const SamplingMatrix& m, const Eigen::MatrixXd& Jt_inv,
                               const Eigen::VectorXd& d, const Eigen::VectorXd& theta) {
    if (m.b0_is_zero()) return Jt_inv;
    double q0 = m.b0(0);
    if (m.b0_is_constant()) {
        double p = 1.0 - q0;
        return Jt_inv - (q0 / p) * theta * theta.transpose();
    }
    const int W = m.W;
    Eigen::VectorXd dc(W);
    double s = d(0);
    for (int k = 0; k < W; ++k) {
        dc(k) = d(k + 1) * m.evap_weights(k);
        s += m.evap_weights(k) * dc(k);
    }
    Eigen::VectorXd v(W);
    for (int j = 0; j < W; ++j) {
        double acc = 0.0;
        int hi = std::min(W - 1, j + m.inv_bandwidth);
        for (int k = j; k <= hi; ++k) acc += m.BtildeInv(j, k) * dc(k);
        v(j) = acc;
    }
    return Jt_inv - (v * v.transpose()) / s;
}

}  // namespace

Eigen::MatrixXd inverse_prop1(const SamplingMatrix& m, const FlowSizeDistribution& dist) {
    require_dims(m, dist);
    Eigen::VectorXd d = sampled_dist(m, dist);
    Eigen::MatrixXd Jt_inv = jtilde_inverse(m, d);
    return apply_rank_one(m, Jt_inv, d, theta_vec(dist));
}

FisherBundle make_bundle(const SamplingMatrix& m, const FlowSizeDistribution& dist,
                         bool compute_J) {
    require_dims(m, dist);
    FisherBundle b;
    b.spec = m.spec;
    b.W = m.W;
    b.d = sampled_dist(m, dist);
    b.Jtilde_inv = jtilde_inverse(m, b.d);
    Eigen::VectorXd th = theta_vec(dist);
    b.Jinv = apply_rank_one(m, b.Jtilde_inv, b.d, th);
    b.Cplus = b.Jinv - th * th.transpose();
    b.crlb_diag = b.Cplus.diagonal();
    if (compute_J) b.J = fisher_unconstrained(m.B, dist);
    return b;
}

namespace {

Eigen::VectorXd ps_closed_form(const FlowSizeDistribution& dist, double p) {
    const int W = dist.W();
    if (W > kBinomialInverseMaxW)
        throw Unsupported("PS closed-form diagonals are limited to W <= " +
                          std::to_string(kBinomialInverseMaxW));
    double q = 1.0 - p;
    Eigen::VectorXd d = sampled_dist(build_matrix_only(MethodSpec::ps(p), W), dist);
    double lp = std::log(p);
    double lq = q > 0.0 ? std::log(q) : 0.0;
    double denom = 0.0;
    for (int k = 0; k <= W; ++k)
        denom += (q == 0.0 && k > 0) ? 0.0 : std::exp(2.0 * k * (lq - lp) + std::log(d(k)));
    Eigen::VectorXd out(W);
    for (int j = 1; j <= W; ++j) {
        double t1 = 0.0, num = 0.0;
        for (int k = j; k <= W; ++k) {
            if (q == 0.0 && k != j) continue;
            double lc = log_choose(k, j);
            t1 += std::exp(2.0 * lc + 2.0 * (k - j) * lq - 2.0 * k * lp + std::log(d(k)));
            num += std::exp(lc + (2.0 * k - j) * lq - 2.0 * k * lp + std::log(d(k)));
        }
        out(j - 1) = t1 - num * num / denom;
    }
    return out;
}

Eigen::VectorXd ps_seq_closed_form(const FlowSizeDistribution& dist, double p) {
    const int W = dist.W();
    double q = 1.0 - p;
    Eigen::VectorXd dv = sampled_dist(build_matrix_only(MethodSpec::ps_seq(p), W), dist);
    auto d = [&](int j) { return j <= W ? dv(j) : 0.0; };
    double ip2 = 1.0 / (p * p);
    double ip4 = ip2 * ip2;
    double r = d(0) + q * q * ip2 * d(1) + std::pow(q, 4) * ip4 * d(2);
    Eigen::VectorXd out(W);
    // First entry of the correction uses q p^-2 d1 (the displayed form in the
    // source text carries an extra q/p^2 that fails the product identity).
    double c1 = q * ip2 * d(1) + 2.0 * std::pow(q, 3) * ip4 * d(2);
    out(0) = ip2 * d(1) + 4.0 * q * q * ip4 * d(2) + std::pow(q, 4) * ip4 * d(3) - c1 * c1 / r;
    if (W >= 2) {
        double c2 = q * q * ip4 * d(2);
        out(1) = ip4 * d(2) + 4.0 * q * q * ip4 * d(3) + std::pow(q, 4) * ip4 * d(4) - c2 * c2 / r;
    }
    for (int j = 3; j <= W; ++j)
        out(j - 1) = ip4 * d(j) + 4.0 * q * q * ip4 * d(j + 1) + std::pow(q, 4) * ip4 * d(j + 2);
    return out;
}

Eigen::VectorXd ps_syn_closed_form(const FlowSizeDistribution& dist, double p) {
    const int W = dist.W();
    if (W > kBinomialInverseMaxW)
        throw Unsupported("PS+SYN closed-form diagonals are limited to W <= " +
                          std::to_string(kBinomialInverseMaxW));
    double q = 1.0 - p;
    Eigen::VectorXd d = sampled_dist(build_matrix_only(MethodSpec::ps_syn(p), W), dist);
    double lp = std::log(p);
    double lq = q > 0.0 ? std::log(q) : 0.0;
    Eigen::VectorXd out(W);
    for (int j = 1; j <= W; ++j) {
        double t = 0.0;
        for (int k = j; k <= W; ++k) {
            if (q == 0.0 && k != j) continue;
            t += std::exp(2.0 * log_choose(k - 1, j - 1) + 2.0 * (k - j) * lq - 2.0 * k * lp +
                          std::log(d(k)));
        }
        out(j - 1) = t - (q / p) * dist.theta(j) * dist.theta(j);
    }
    return out;
}

// DS diagonals; PS+SYN+SEQ is pf == pp, FS is pp == 1.
Eigen::VectorXd ds_closed_form(const FlowSizeDistribution& dist, double pf, double pp) {
    const int W = dist.W();
    double qf = 1.0 - pf;
    double qp = 1.0 - pp;
    // S_j = sum_{k>j} qp^(k-j) theta_k
    Eigen::VectorXd S = Eigen::VectorXd::Zero(W + 1);
    for (int j = W - 1; j >= 1; --j) S(j) = qp * (dist.theta(j + 1) + S(j + 1));
    Eigen::VectorXd out(W);
    out(0) = dist.theta(1) / pf + S(1) / (pf * pp) - (qf / pf) * dist.theta(1) * dist.theta(1);
    for (int j = 2; j < W; ++j)
        out(j - 1) = dist.theta(j) / (pf * pp) + (1.0 + qp) / (pf * pp) * S(j) -
                     (qf / pf) * dist.theta(j) * dist.theta(j);
    if (W >= 2)
        out(W - 1) = dist.theta(W) / (pf * pp) - (qf / pf) * dist.theta(W) * dist.theta(W);
    return out;
}

Eigen::VectorXd sh_closed_form(const FlowSizeDistribution& dist, double p) {
    const int W = dist.W();
    double q = 1.0 - p;
    Eigen::VectorXd S = Eigen::VectorXd::Zero(W + 1);
    for (int j = W - 1; j >= 1; --j) S(j) = q * (dist.theta(j + 1) + S(j + 1));
    Eigen::VectorXd out(W);
    out(0) = dist.theta(1) + S(1) / p;
    for (int j = 2; j < W; ++j) out(j - 1) = dist.theta(j) / p + (1.0 + q) / p * S(j);
    if (W >= 2) out(W - 1) = dist.theta(W) / p;
    return out;
}

}  // namespace

Eigen::VectorXd closed_form_diag(const MethodSpec& spec, const FlowSizeDistribution& dist) {
    switch (spec.method) {
        case Method::PS: return ps_closed_form(dist, spec.p_p);
        case Method::PS_SEQ: return ps_seq_closed_form(dist, spec.p_p);
        case Method::PS_SYN: return ps_syn_closed_form(dist, spec.p_p);
        case Method::PS_SYN_SEQ: return ds_closed_form(dist, spec.p_p, spec.p_p);
        case Method::FS: return ds_closed_form(dist, spec.p_f, 1.0);
        case Method::SH: return sh_closed_form(dist, spec.p_p);
        case Method::DS: return ds_closed_form(dist, spec.p_f, spec.p_p);
    }
    throw Unsupported("unreachable");
}

TridiagonalReport tridiagonal_check(const MethodSpec& spec, const FlowSizeDistribution& dist) {
    if (spec.method != Method::SH && spec.method != Method::DS && spec.method != Method::FS)
        throw UnsupportedMethod("tridiagonal structure applies to SH, DS (and trivially FS)");
    const int W = dist.W();
    SamplingMatrix m = build(spec, W);
    Eigen::VectorXd d = sampled_dist(m, dist);
    Eigen::MatrixXd Jt = Eigen::MatrixXd::Zero(W, W);
    for (int j = 1; j <= W; ++j)
        Jt.noalias() += (m.Btilde.row(j - 1).transpose() * m.Btilde.row(j - 1)) / d(j);
    Eigen::MatrixXd Jt_inv = Jt.partialPivLu().inverse();  // numeric oracle, not the analytic path

    double scale = Jt_inv.cwiseAbs().maxCoeff();
    TridiagonalReport rep;
    for (int i = 0; i < W; ++i)
        for (int k = 0; k < W; ++k)
            if (std::abs(i - k) > 1)
                rep.off_band_mass = std::max(rep.off_band_mass, std::abs(Jt_inv(i, k)) / scale);

    double qp = 1.0 - spec.p_p;
    double coeff;
    switch (spec.method) {
        case Method::SH: coeff = -qp / (spec.p_p * spec.p_p); break;
        case Method::DS: {
            double fp = spec.p_f * spec.p_p;
            coeff = -qp / (fp * fp);
            break;
        }
        default: coeff = 0.0; break;  // FS: no off-diagonal
    }
    for (int k = 1; k < W; ++k) {
        // expected (Jt^-1)_{k,k+1} = coeff * d_{k+1}
        double expected = coeff * d(k + 1);
        double got = Jt_inv(k - 1, k);
        double denom = std::max(std::abs(expected), scale * 1e-300);
        if (spec.method == Method::FS) {
            rep.off_diag_formula_err = std::max(rep.off_diag_formula_err, std::abs(got) / scale);
        } else {
            rep.off_diag_formula_err =
                std::max(rep.off_diag_formula_err, std::abs(got - expected) / denom);
        }
    }
    rep.pass = rep.off_band_mass <= 1e-9 && rep.off_diag_formula_err <= 1e-8;
    return rep;
}

}  // namespace fsdlab
