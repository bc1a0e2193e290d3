#include "fsdlab/sampmat.hpp"

#include <cmath>
#include <fstream>

namespace fsdlab {

namespace {

// log C(k, j)
double log_choose(int k, int j) {
    return std::lgamma(k + 1.0) - std::lgamma(j + 1.0) - std::lgamma(k - j + 1.0);
}

// C(k,j) p^j q^(k-j), evaluated in log space so W in the thousands works.
double binom_pmf(int k, int j, double p, double q) {
    if (j < 0 || j > k) return 0.0;
    if (p == 1.0) return j == k ? 1.0 : 0.0;
    if (q == 1.0) return j == 0 ? 1.0 : 0.0;
    return std::exp(log_choose(k, j) + j * std::log(p) + (k - j) * std::log(q));
}

void check_dims(int W) {
    if (W < 2) throw OutOfRange("sampling matrices need W >= 2");
    if (W > kMaxW) throw Unsupported("W exceeds the supported maximum " + std::to_string(kMaxW));
}

void fill_ps(Eigen::MatrixXd& B, int W, double p) {
    double q = 1.0 - p;
    for (int k = 1; k <= W; ++k)
        for (int j = 0; j <= k; ++j) B(j, k - 1) = binom_pmf(k, j, p, q);
}

void fill_ps_seq(Eigen::MatrixXd& B, int W, double p) {
    double q = 1.0 - p;
    for (int k = 1; k <= W; ++k) {
        B(0, k - 1) = std::pow(q, k);
        B(1, k - 1) = k * p * std::pow(q, k - 1);
        for (int j = 2; j <= k; ++j) B(j, k - 1) = (k - j + 1) * (p * p) * std::pow(q, k - j);
    }
}

void fill_ps_syn(Eigen::MatrixXd& B, int W, double p) {
    double q = 1.0 - p;
    for (int k = 1; k <= W; ++k) {
        B(0, k - 1) = q;
        for (int j = 1; j <= k; ++j) B(j, k - 1) = p * binom_pmf(k - 1, j - 1, p, q);
    }
}

// DS family: SYN kept with pf, later packets with pp, SEQ inference in between.
// PS+SYN+SEQ is pf == pp, FS is pp == 1.
void fill_ds(Eigen::MatrixXd& B, int W, double pf, double pp) {
    double qf = 1.0 - pf;
    double qp = 1.0 - pp;
    for (int k = 1; k <= W; ++k) {
        B(0, k - 1) = qf;
        B(1, k - 1) = pf * std::pow(qp, k - 1);
        for (int j = 2; j <= k; ++j) B(j, k - 1) = (pf * pp) * std::pow(qp, k - j);
    }
}

void fill_fs(Eigen::MatrixXd& B, int W, double pf) {
    double qf = 1.0 - pf;
    for (int k = 1; k <= W; ++k) {
        B(0, k - 1) = qf;
        B(k, k - 1) = pf;
    }
}

void fill_sh(Eigen::MatrixXd& B, int W, double p) {
    double q = 1.0 - p;
    for (int k = 1; k <= W; ++k) {
        B(0, k - 1) = std::pow(q, k);
        for (int j = 1; j <= k; ++j) B(j, k - 1) = p * std::pow(q, k - j);
    }
}

// Signed binomial inverse (-1)^(k-j) C(g(k),g(j)) q^(k-j) p^(-k); shift = 0
// for PS, 1 for PS+SYN where the binomial runs over (k-1, j-1).
Eigen::MatrixXd binomial_inverse(int W, double p, int shift) {
    if (W > kBinomialInverseMaxW)
        throw Unsupported("analytic PS-family inverse is limited to W <= " +
                          std::to_string(kBinomialInverseMaxW) +
                          "; entries overflow double range beyond that");
    double q = 1.0 - p;
    Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(W, W);
    for (int j = 1; j <= W; ++j)
        for (int k = j; k <= W; ++k) {
            double mag;
            if (q == 0.0) {
                mag = (k == j) ? std::pow(p, -k) : 0.0;
            } else {
                mag = std::exp(log_choose(k - shift, j - shift) + (k - j) * std::log(q) -
                               k * std::log(p));
            }
            double v = ((k - j) % 2 == 0) ? mag : -mag;
            if (!std::isfinite(v))
                throw Unsupported("analytic inverse entry overflows double range at W=" +
                                  std::to_string(W) + ", p=" + std::to_string(p));
            inv(j - 1, k - 1) = v;
        }
    return inv;
}

Eigen::MatrixXd ps_seq_inverse(int W, double p) {
    double q = 1.0 - p;
    double ip2 = 1.0 / (p * p);
    Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(W, W);
    inv(0, 0) = 1.0 / p;
    for (int j = 2; j <= W; ++j) inv(j - 1, j - 1) = ip2;
    for (int j = 1; j + 1 <= W; ++j) inv(j - 1, j) = -2.0 * q * ip2;
    for (int j = 1; j + 2 <= W; ++j) inv(j - 1, j + 1) = q * q * ip2;
    return inv;
}

Eigen::MatrixXd ds_inverse(int W, double pf, double pp) {
    double qp = 1.0 - pp;
    Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(W, W);
    inv(0, 0) = 1.0 / pf;
    for (int j = 2; j <= W; ++j) inv(j - 1, j - 1) = 1.0 / (pf * pp);
    if (qp > 0.0)
        for (int j = 1; j + 1 <= W; ++j) inv(j - 1, j) = -qp / (pf * pp);
    return inv;
}

Eigen::MatrixXd sh_inverse(int W, double p) {
    double q = 1.0 - p;
    Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(W, W);
    for (int j = 1; j <= W; ++j) inv(j - 1, j - 1) = 1.0 / p;
    if (q > 0.0)
        for (int j = 1; j + 1 <= W; ++j) inv(j - 1, j) = -q / p;
    return inv;
}

}  // namespace

Eigen::MatrixXd build_matrix_only(const MethodSpec& spec, int W) {
    check_dims(W);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(W + 1, W);
    switch (spec.method) {
        case Method::PS: fill_ps(B, W, spec.p_p); break;
        case Method::PS_SEQ: fill_ps_seq(B, W, spec.p_p); break;
        case Method::PS_SYN: fill_ps_syn(B, W, spec.p_p); break;
        case Method::PS_SYN_SEQ: fill_ds(B, W, spec.p_p, spec.p_p); break;
        case Method::FS: fill_fs(B, W, spec.p_f); break;
        case Method::SH: fill_sh(B, W, spec.p_p); break;
        case Method::DS: fill_ds(B, W, spec.p_f, spec.p_p); break;
    }
    return B;
}

Eigen::MatrixXd analytic_inverse(const MethodSpec& spec, int W) {
    check_dims(W);
    switch (spec.method) {
        case Method::PS: return binomial_inverse(W, spec.p_p, 0);
        case Method::PS_SEQ: return ps_seq_inverse(W, spec.p_p);
        case Method::PS_SYN: return binomial_inverse(W, spec.p_p, 1);
        case Method::PS_SYN_SEQ: return ds_inverse(W, spec.p_p, spec.p_p);
        case Method::FS: return ds_inverse(W, spec.p_f, 1.0);
        case Method::SH: return sh_inverse(W, spec.p_p);
        case Method::DS: return ds_inverse(W, spec.p_f, spec.p_p);
    }
    throw Unsupported("unreachable");
}

SamplingMatrix build(const MethodSpec& spec, int W) {
    SamplingMatrix m;
    m.spec = spec;
    m.W = W;
    m.B = build_matrix_only(spec, W);
    m.b0 = m.B.row(0);
    m.Btilde = m.B.bottomRows(W);
    m.BtildeInv = analytic_inverse(spec, W);
    m.evap_weights = Eigen::VectorXd::Zero(W);
    switch (spec.method) {
        case Method::PS: {
            // telescoping of q^l against the signed binomials: (-1)^(k-1) (q/p)^k
            m.inv_bandwidth = W - 1;
            double r = (1.0 - spec.p_p) / spec.p_p;
            double run = 1.0;
            for (int k = 1; k <= W; ++k) {
                run *= r;
                m.evap_weights(k - 1) = (k % 2 == 1) ? run : -run;
            }
            break;
        }
        case Method::PS_SYN: {
            m.inv_bandwidth = W - 1;
            double q = 1.0 - spec.p_p;
            m.evap_weights.setConstant(q / spec.p_p);
            break;
        }
        case Method::PS_SEQ: {
            // the banded inverse cancels all but the first two columns
            m.inv_bandwidth = 2;
            double r = (1.0 - spec.p_p) / spec.p_p;
            m.evap_weights(0) = r;
            if (W >= 2) m.evap_weights(1) = -r * r;
            break;
        }
        case Method::SH: {
            m.inv_bandwidth = 1;
            m.evap_weights(0) = (1.0 - spec.p_p) / spec.p_p;
            break;
        }
        case Method::FS:
            m.inv_bandwidth = 0;
            m.evap_weights.setConstant((1.0 - spec.p_f) / spec.p_f);
            break;
        case Method::PS_SYN_SEQ:
        case Method::DS: {
            m.inv_bandwidth = 1;
            double pf = spec.method == Method::DS ? spec.p_f : spec.p_p;
            m.evap_weights.setConstant((1.0 - pf) / pf);
            break;
        }
    }
    return m;
}

void write_matrix_csv(const Eigen::MatrixXd& B, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out.precision(17);
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
        for (Eigen::Index k = 0; k < B.cols(); ++k) {
            if (k) out << ",";
            out << B(j, k);
        }
        out << "\n";
    }
}

}  // namespace fsdlab
