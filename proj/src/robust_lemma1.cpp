#include <stdexcept>

#include "mfris/robust.hpp"

namespace mfris {

using conic::cd;
using conic::Expr;
using conic::ExprMatrix;

double QuadraticForm::eval(const Eigen::VectorXcd& x) const {
    const std::complex<double> quad = (x.adjoint() * A * x)(0, 0);
    const std::complex<double> lin = (a.adjoint() * x)(0, 0);
    return quad.real() + 2.0 * lin.real() + a0;
}

double Lemma1Coefficients::eval(const Eigen::VectorXcd& dh, const Eigen::MatrixXcd& dG) const {
    const Eigen::Index n = dh.size();
    const Eigen::Index mn = dG.size();
    Eigen::VectorXcd x(n + mn);
    x.head(n) = dh;
    const Eigen::MatrixXcd dGc = dG.conjugate();
    x.tail(mn) = Eigen::Map<const Eigen::VectorXcd>(dGc.data(), mn);
    const std::complex<double> quad = (x.adjoint() * A * x)(0, 0);
    const std::complex<double> lin = (a.adjoint() * x)(0, 0);
    return quad.real() + 2.0 * lin.real() + a0;
}

namespace {

// Stacked-error direction constants: left(x) = cL + x^H L with
// L = [f0; f0 (x) conj(v0)] under column-major vec of dG*.
Eigen::VectorXcd stack_direction(const Eigen::VectorXcd& f0, const Eigen::VectorXcd& v0) {
    const Eigen::Index n = f0.size();
    const Eigen::Index m = v0.size();
    Eigen::VectorXcd L(n + n * m);
    L.head(n) = f0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < m; ++i) L(n + j * m + i) = f0(j) * std::conj(v0(i));
    return L;
}

} // namespace

Lemma1Coefficients lemma1_coefficients(const Eigen::VectorXcd& h_est,
                                       const Eigen::MatrixXcd& G_est, const Eigen::VectorXcd& f,
                                       const Eigen::VectorXcd& v, const Eigen::VectorXcd& f_exp,
                                       const Eigen::VectorXcd& v_exp) {
    const Eigen::Index n = h_est.size();
    const Eigen::Index m = v.size();
    if (G_est.rows() != m || G_est.cols() != n || f.size() != n)
        throw std::invalid_argument("lemma1_coefficients: dimension mismatch");

    const std::complex<double> cL =
        (h_est.adjoint() * f_exp)(0, 0) + (v_exp.adjoint() * G_est * f_exp)(0, 0);
    const std::complex<double> cR =
        (f.adjoint() * h_est)(0, 0) + (f.adjoint() * G_est.adjoint() * v)(0, 0);

    const Eigen::VectorXcd L = stack_direction(f_exp, v_exp);
    Eigen::VectorXcd R(n + n * m); // right(x) = cR + R^T x
    for (Eigen::Index j = 0; j < n; ++j) R(j) = std::conj(f(j));
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < m; ++i) R(n + j * m + i) = std::conj(f(j)) * v(i);

    Lemma1Coefficients out;
    const Eigen::MatrixXcd LRt = L * R.transpose();
    out.A = LRt + LRt.adjoint() - L * L.adjoint();
    out.a = std::conj(cL) * R.conjugate() + cR * L - std::conj(cL) * L;
    out.a0 = 2.0 * (cL * cR).real() - std::norm(cL);
    return out;
}

double lemma1_direct(const Eigen::VectorXcd& h_est, const Eigen::MatrixXcd& G_est,
                     const Eigen::VectorXcd& dh, const Eigen::MatrixXcd& dG,
                     const Eigen::VectorXcd& f, const Eigen::VectorXcd& v,
                     const Eigen::VectorXcd& f_exp, const Eigen::VectorXcd& v_exp) {
    const Eigen::VectorXcd h = h_est + dh;
    const Eigen::MatrixXcd G = G_est + dG;
    const std::complex<double> left = (h.adjoint() * f_exp)(0, 0) + (v_exp.adjoint() * G * f_exp)(0, 0);
    const std::complex<double> right = (f.adjoint() * h)(0, 0) + (f.adjoint() * G.adjoint() * v)(0, 0);
    const std::complex<double> g1 = left * right;
    const double g2 = std::norm(left);
    return 2.0 * g1.real() - g2;
}

QuadFormExpr lemma1_expr(const Eigen::VectorXcd& h_est, const Eigen::MatrixXcd& G_est,
                         const std::vector<conic::Expr>& f, const std::vector<conic::Expr>& v,
                         const Eigen::VectorXcd& f_exp, const Eigen::VectorXcd& v_exp) {
    const Eigen::Index n = h_est.size();
    const Eigen::Index m = static_cast<Eigen::Index>(v.size());
    const Eigen::Index dim = n + n * m;

    // cR = f^H h_est + f^H G_est^H v ; affine as long as one of f, v is constant
    Expr cR;
    for (Eigen::Index j = 0; j < n; ++j) cR += f[j].conjugate() * cd(h_est(j));
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) {
            const cd gij = std::conj(G_est(i, j)); // (G^H)_{j,i}
            if (f[j].is_constant()) {
                cR += v[i] * (std::conj(f[j].constant()) * gij);
            } else if (v[i].is_constant()) {
                cR += f[j].conjugate() * (gij * v[i].constant());
            } else {
                throw std::invalid_argument("lemma1_expr: both factors variable");
            }
        }
    }
    const cd cL =
        (h_est.adjoint() * f_exp)(0, 0) + (v_exp.adjoint() * G_est * f_exp)(0, 0);

    const Eigen::VectorXcd L = stack_direction(f_exp, v_exp);
    // R entries: R_j = conj(f_j), R_{n+j*m+i} = conj(f_j) v_i
    std::vector<Expr> R(dim);
    for (Eigen::Index j = 0; j < n; ++j) R[j] = f[j].conjugate();
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < m; ++i) {
            if (f[j].is_constant()) {
                R[n + j * m + i] = v[i] * std::conj(f[j].constant());
            } else {
                R[n + j * m + i] = f[j].conjugate() * v[i].constant();
            }
        }

    QuadFormExpr out;
    out.A = ExprMatrix(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) {
            // (L R^T + (L R^T)^H - L L^H)_{ij}
            Expr e = R[j] * cd(L(i));
            e += R[i].conjugate() * cd(std::conj(L(j)));
            e -= Expr(cd(L(i) * std::conj(L(j))));
            out.A(i, j) = e;
        }
    out.a.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        Expr e = R[i].conjugate() * cd(std::conj(cL));
        e += cR * cd(L(i));
        e -= Expr(cd(std::conj(cL) * L(i)));
        out.a[i] = e;
    }
    out.a0 = cR * cd(cL) + (cR * cd(cL)).conjugate() - Expr(std::norm(cL));
    return out;
}

} // namespace mfris
