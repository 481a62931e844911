#include <stdexcept>

#include "mfris/robust.hpp"

namespace mfris {

using conic::cd;
using conic::Expr;
using conic::ExprMatrix;
using conic::Program;

std::vector<int> s_procedure_lmi(Program& prog, const QuadFormExpr& f0,
                                 const std::vector<QuadraticForm>& constraints) {
    if (constraints.empty())
        throw std::invalid_argument("s_procedure_lmi: needs at least one constraint form");
    const Eigen::Index d = f0.A.rows();

    std::vector<int> mults;
    mults.reserve(constraints.size());
    for (std::size_t j = 0; j < constraints.size(); ++j)
        mults.push_back(prog.add_real_nonneg("upsilon" + std::to_string(j)));

    ExprMatrix block(d + 1, d + 1);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            Expr e = f0.A(i, j);
            for (std::size_t c = 0; c < constraints.size(); ++c)
                e -= Expr::variable(mults[c], cd(constraints[c].A(i, j)));
            block(i, j) = e;
        }
        Expr border = f0.a[i];
        for (std::size_t c = 0; c < constraints.size(); ++c)
            border -= Expr::variable(mults[c], cd(constraints[c].a(i)));
        block(i, d) = border;
        block(d, i) = border.conjugate();
    }
    Expr corner = f0.a0;
    for (std::size_t c = 0; c < constraints.size(); ++c)
        corner -= Expr::variable(mults[c], cd(constraints[c].a0, 0.0));
    block(d, d) = corner;
    prog.add_psd(block);
    return mults;
}

std::vector<int> sign_definiteness_lmi(Program& prog, const ExprMatrix& D,
                                       const std::vector<SignDefPair>& pairs) {
    const Eigen::Index n = D.rows();
    Eigen::Index total = n;
    for (const auto& p : pairs) {
        if (p.E.cols() != n || p.F.cols() != n)
            throw std::invalid_argument("sign_definiteness_lmi: pair dimension mismatch");
        total += p.E.rows();
    }

    std::vector<int> mults;
    mults.reserve(pairs.size());
    for (std::size_t j = 0; j < pairs.size(); ++j)
        mults.push_back(prog.add_real_nonneg("varpi" + std::to_string(j)));

    ExprMatrix block(total, total);
    // top-left: D - sum_j varpi_j F_j^H F_j
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            Expr e = D(i, j);
            for (std::size_t c = 0; c < pairs.size(); ++c) {
                const cd coeff = (pairs[c].F.adjoint() * pairs[c].F)(i, j);
                if (coeff != cd(0.0, 0.0)) e -= Expr::variable(mults[c], coeff);
            }
            block(i, j) = e;
        }
    Eigen::Index off = n;
    for (std::size_t c = 0; c < pairs.size(); ++c) {
        const Eigen::Index r = pairs[c].E.rows();
        for (Eigen::Index i = 0; i < r; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const Expr e = pairs[c].E(i, j) * cd(-pairs[c].xi, 0.0);
                block(off + i, j) = e;
                block(j, off + i) = e.conjugate();
            }
            block(off + i, off + i) = Expr::variable(mults[c]);
        }
        off += r;
    }
    prog.add_psd(block);
    return mults;
}

} // namespace mfris
