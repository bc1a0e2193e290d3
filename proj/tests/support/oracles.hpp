// Test-side numerical oracles, independent of the library's production paths.
// The multiprecision routines exist because the dense binomial inverses mix
// magnitudes ~C(W, W/2) p^-W: double arithmetic cannot certify them directly.
#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/mpfr.hpp>

#include "fsdlab/fisher.hpp"
#include "fsdlab/flowdist.hpp"

namespace oracles {

using mpfloat = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<100>,
                                              boost::multiprecision::et_off>;
// wide enough for the p^(-2W) dynamic range inside J at W = 200
using mpbig = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<520>,
                                            boost::multiprecision::et_off>;
using MpMatrix = std::vector<std::vector<mpfloat>>;
template <class F>
using MpMatrixT = std::vector<std::vector<F>>;

inline MpMatrix promote(const Eigen::MatrixXd& m) {
    MpMatrix out(static_cast<size_t>(m.rows()),
                 std::vector<mpfloat>(static_cast<size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out[static_cast<size_t>(i)][static_cast<size_t>(j)] = m(i, j);
    return out;
}

// The (W+1) x W sampling matrix rebuilt in multiprecision straight from the
// method parameters: Pascal-triangle binomials and mp powers, a route fully
// independent of the library's lgamma/exp evaluation.
template <class F = mpfloat>
inline MpMatrixT<F> build_mp(const fsdlab::MethodSpec& spec, int W) {
    using fsdlab::Method;
    MpMatrixT<F> B(static_cast<size_t>(W) + 1, std::vector<F>(static_cast<size_t>(W), F(0)));
    F pp = spec.p_p, pf = spec.p_f;
    F qp = 1 - pp, qf = 1 - pf;
    // power tables keep the rebuild at O(W^2)
    std::vector<F> pow_pp(static_cast<size_t>(W) + 1), pow_qp(static_cast<size_t>(W) + 1);
    pow_pp[0] = 1;
    pow_qp[0] = 1;
    for (int e = 1; e <= W; ++e) {
        pow_pp[static_cast<size_t>(e)] = pow_pp[static_cast<size_t>(e - 1)] * pp;
        pow_qp[static_cast<size_t>(e)] = pow_qp[static_cast<size_t>(e - 1)] * qp;
    }

    // choose[j] = C(row, j), advanced row by row
    std::vector<F> choose(static_cast<size_t>(W) + 1, F(0));
    choose[0] = 1;
    switch (spec.method) {
        case Method::PS:
            for (int k = 1; k <= W; ++k) {
                for (int j = k; j >= 1; --j) choose[static_cast<size_t>(j)] += choose[static_cast<size_t>(j - 1)];
                for (int j = 0; j <= k; ++j)
                    B[static_cast<size_t>(j)][static_cast<size_t>(k - 1)] =
                        choose[static_cast<size_t>(j)] * pow_pp[static_cast<size_t>(j)] * pow_qp[static_cast<size_t>(k - j)];
            }
            break;
        case Method::PS_SEQ:
            for (int k = 1; k <= W; ++k) {
                B[0][static_cast<size_t>(k - 1)] = pow_qp[static_cast<size_t>(k)];
                B[1][static_cast<size_t>(k - 1)] = k * pp * pow_qp[static_cast<size_t>(k - 1)];
                for (int j = 2; j <= k; ++j)
                    B[static_cast<size_t>(j)][static_cast<size_t>(k - 1)] =
                        (k - j + 1) * pp * pp * pow_qp[static_cast<size_t>(k - j)];
            }
            break;
        case Method::PS_SYN:
            for (int k = 1; k <= W; ++k) {
                if (k >= 2)
                    for (int j = k - 1; j >= 1; --j)
                        choose[static_cast<size_t>(j)] += choose[static_cast<size_t>(j - 1)];
                B[0][static_cast<size_t>(k - 1)] = qp;
                for (int j = 1; j <= k; ++j)
                    B[static_cast<size_t>(j)][static_cast<size_t>(k - 1)] =
                        choose[static_cast<size_t>(j - 1)] * pow_pp[static_cast<size_t>(j)] * pow_qp[static_cast<size_t>(k - j)];
            }
            break;
        case Method::PS_SYN_SEQ:
            pf = pp;
            qf = qp;
            [[fallthrough]];
        case Method::DS:
            for (int k = 1; k <= W; ++k) {
                B[0][static_cast<size_t>(k - 1)] = qf;
                B[1][static_cast<size_t>(k - 1)] = pf * pow_qp[static_cast<size_t>(k - 1)];
                for (int j = 2; j <= k; ++j)
                    B[static_cast<size_t>(j)][static_cast<size_t>(k - 1)] = pf * pp * pow_qp[static_cast<size_t>(k - j)];
            }
            break;
        case Method::FS:
            for (int k = 1; k <= W; ++k) {
                B[0][static_cast<size_t>(k - 1)] = qf;
                B[static_cast<size_t>(k)][static_cast<size_t>(k - 1)] = pf;
            }
            break;
        case Method::SH:
            for (int k = 1; k <= W; ++k) {
                B[0][static_cast<size_t>(k - 1)] = pow_qp[static_cast<size_t>(k)];
                for (int j = 1; j <= k; ++j)
                    B[static_cast<size_t>(j)][static_cast<size_t>(k - 1)] = pp * pow_qp[static_cast<size_t>(k - j)];
            }
            break;
    }
    return B;
}

// Columns of the inverse of the upper-triangular lower block of an mp matrix,
// by back substitution (0-based column indices into the W x W block).
inline MpMatrix invert_upper_columns(const MpMatrix& B, const std::vector<int>& cols) {
    const int n = static_cast<int>(B.size()) - 1;
    auto U = [&B](int i, int j) { return B[static_cast<size_t>(i) + 1][static_cast<size_t>(j)]; };
    MpMatrix out(static_cast<size_t>(n), std::vector<mpfloat>(cols.size(), mpfloat(0)));
    for (size_t c = 0; c < cols.size(); ++c) {
        int k = cols[c];
        std::vector<mpfloat> x(static_cast<size_t>(n), mpfloat(0));
        x[static_cast<size_t>(k)] = mpfloat(1) / U(k, k);
        for (int i = k - 1; i >= 0; --i) {
            mpfloat s = 0;
            for (int j = i + 1; j <= k; ++j) s += U(i, j) * x[static_cast<size_t>(j)];
            x[static_cast<size_t>(i)] = -s / U(i, i);
        }
        for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)][c] = x[static_cast<size_t>(i)];
    }
    return out;
}

// Dense inverse by Gauss-Jordan with partial pivoting, in multiprecision.
template <class F = mpfloat>
inline MpMatrixT<F> invert_dense(MpMatrixT<F> a) {
    const size_t n = a.size();
    MpMatrixT<F> inv(n, std::vector<F>(n, F(0)));
    for (size_t i = 0; i < n; ++i) inv[i][i] = 1;
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (abs(a[r][col]) > abs(a[piv][col])) piv = r;
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        F diag = a[col][col];
        for (size_t j = 0; j < n; ++j) {
            a[col][j] /= diag;
            inv[col][j] /= diag;
        }
        for (size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            F f = a[r][col];
            if (f == 0) continue;
            for (size_t j = 0; j < n; ++j) {
                a[r][j] -= f * a[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

// J = B^T diag(1/d) B built and inverted in multiprecision; B is the exact
// rebuild so input rounding cannot leak into the oracle.
template <class F = mpfloat>
inline MpMatrixT<F> fisher_inverse_mp(const MpMatrixT<F>& B,
                                      const fsdlab::FlowSizeDistribution& dist) {
    const int W = static_cast<int>(B[0].size());
    const int rows = static_cast<int>(B.size());
    std::vector<F> th(static_cast<size_t>(W));
    for (int k = 0; k < W; ++k) th[static_cast<size_t>(k)] = dist.theta()[static_cast<size_t>(k)];
    std::vector<F> d(static_cast<size_t>(rows), F(0));
    for (int j = 0; j < rows; ++j)
        for (int k = 0; k < W; ++k)
            d[static_cast<size_t>(j)] += B[static_cast<size_t>(j)][static_cast<size_t>(k)] * th[static_cast<size_t>(k)];
    MpMatrixT<F> J(static_cast<size_t>(W), std::vector<F>(static_cast<size_t>(W), F(0)));
    for (int j = 0; j < rows; ++j) {
        if (d[static_cast<size_t>(j)] == 0) continue;  // unreachable outcome row
        for (int i = 0; i < W; ++i) {
            const F& bji = B[static_cast<size_t>(j)][static_cast<size_t>(i)];
            if (bji == 0) continue;
            F bi = bji / d[static_cast<size_t>(j)];
            for (int k = i; k < W; ++k)
                J[static_cast<size_t>(i)][static_cast<size_t>(k)] +=
                    bi * B[static_cast<size_t>(j)][static_cast<size_t>(k)];
        }
    }
    for (int i = 0; i < W; ++i)
        for (int k = 0; k < i; ++k)
            J[static_cast<size_t>(i)][static_cast<size_t>(k)] = J[static_cast<size_t>(k)][static_cast<size_t>(i)];
    return invert_dense<F>(std::move(J));
}

// Constrained-CRLB diagonals for PS and PS+SYN through their closed forms,
// evaluated in multiprecision; stays meaningful at small p where the double
// path loses the leading-order cancellation.
inline std::vector<double> ps_family_crlb_diag_mp(const fsdlab::MethodSpec& spec,
                                                  const fsdlab::FlowSizeDistribution& dist) {
    using fsdlab::Method;
    const int W = dist.W();
    auto B = build_mp<mpfloat>(spec, W);
    std::vector<mpfloat> th(static_cast<size_t>(W));
    for (int k = 0; k < W; ++k) th[static_cast<size_t>(k)] = dist.theta()[static_cast<size_t>(k)];
    std::vector<mpfloat> d(static_cast<size_t>(W) + 1, mpfloat(0));
    for (int j = 0; j <= W; ++j)
        for (int k = 0; k < W; ++k)
            d[static_cast<size_t>(j)] += B[static_cast<size_t>(j)][static_cast<size_t>(k)] * th[static_cast<size_t>(k)];
    mpfloat p = spec.p_p, q = 1 - p;
    // Pascal triangle rows as needed
    std::vector<std::vector<mpfloat>> C(static_cast<size_t>(W) + 1,
                                        std::vector<mpfloat>(static_cast<size_t>(W) + 1, mpfloat(0)));
    for (int n = 0; n <= W; ++n) {
        C[static_cast<size_t>(n)][0] = 1;
        for (int r = 1; r <= n; ++r)
            C[static_cast<size_t>(n)][static_cast<size_t>(r)] =
                C[static_cast<size_t>(n - 1)][static_cast<size_t>(r - 1)] +
                (r <= n - 1 ? C[static_cast<size_t>(n - 1)][static_cast<size_t>(r)] : mpfloat(0));
    }
    std::vector<double> out(static_cast<size_t>(W));
    if (spec.method == Method::PS) {
        mpfloat denom = 0;
        for (int k = 0; k <= W; ++k) denom += pow(q / p, 2 * k) * d[static_cast<size_t>(k)];
        for (int j = 1; j <= W; ++j) {
            mpfloat t1 = 0, num = 0;
            for (int k = j; k <= W; ++k) {
                mpfloat ckj = C[static_cast<size_t>(k)][static_cast<size_t>(j)];
                mpfloat pk = pow(p, -2 * k);
                t1 += ckj * ckj * pow(q, 2 * (k - j)) * pk * d[static_cast<size_t>(k)];
                num += ckj * pow(q, 2 * k - j) * pk * d[static_cast<size_t>(k)];
            }
            out[static_cast<size_t>(j - 1)] = static_cast<double>(
                t1 - num * num / denom - th[static_cast<size_t>(j - 1)] * th[static_cast<size_t>(j - 1)]);
        }
    } else if (spec.method == Method::PS_SYN) {
        for (int j = 1; j <= W; ++j) {
            mpfloat t = 0;
            for (int k = j; k <= W; ++k) {
                mpfloat ckj = C[static_cast<size_t>(k - 1)][static_cast<size_t>(j - 1)];
                t += ckj * ckj * pow(q, 2 * (k - j)) * pow(p, -2 * k) * d[static_cast<size_t>(k)];
            }
            mpfloat tj = th[static_cast<size_t>(j - 1)];
            out[static_cast<size_t>(j - 1)] = static_cast<double>(t - (q / p) * tj * tj - tj * tj);
        }
    } else {
        throw fsdlab::UnsupportedMethod("mp diagonals cover PS and PS+SYN only");
    }
    return out;
}

// Fisher information straight from the definition: sum over outcomes of the
// score outer product, scores accumulated element by element.
inline Eigen::MatrixXd brute_force_fisher(const Eigen::MatrixXd& B,
                                          const fsdlab::FlowSizeDistribution& dist) {
    const int W = static_cast<int>(B.cols());
    Eigen::VectorXd theta(W);
    for (int k = 0; k < W; ++k) theta(k) = dist.theta()[static_cast<size_t>(k)];
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(W, W);
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
        double dj = 0.0;
        for (int k = 0; k < W; ++k) dj += B(j, k) * theta(k);
        bool reachable = false;
        for (int k = 0; k < W; ++k)
            if (B(j, k) != 0.0) reachable = true;
        if (!reachable) continue;
        for (int i = 0; i < W; ++i)
            for (int k = 0; k < W; ++k) {
                double score_i = B(j, i) / dj;  // d/dtheta_i log f(j; theta)
                double score_k = B(j, k) / dj;
                J(i, k) += score_i * score_k * dj;
            }
    }
    return J;
}

inline double min_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    return es.eigenvalues().minCoeff();
}

inline double max_abs_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Symmetric-PSD test with the relative floor used throughout the suite.
inline bool is_psd(const Eigen::MatrixXd& m, double rel_tol = 1e-8) {
    double scale = std::max(max_abs_eigenvalue(m), 1e-300);
    return min_eigenvalue(m) >= -rel_tol * scale;
}

/// Dirichlet(1) draw with every component at least min_theta (rejection).
inline fsdlab::FlowSizeDistribution random_theta(std::mt19937_64& rng, int W,
                                                 double min_theta = 1e-6) {
    std::gamma_distribution<double> g(1.0, 1.0);
    while (true) {
        std::vector<double> th(static_cast<size_t>(W));
        double sum = 0.0;
        for (double& t : th) {
            t = g(rng);
            sum += t;
        }
        bool ok = true;
        for (double& t : th) {
            t /= sum;
            if (t < min_theta) ok = false;
        }
        if (ok) return fsdlab::FlowSizeDistribution(std::move(th));
    }
}

inline double rel_err(double got, double want) {
    double denom = std::max({std::abs(got), std::abs(want), 1e-300});
    return std::abs(got - want) / denom;
}

}  // namespace oracles
