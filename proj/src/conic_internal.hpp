#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mfris/conic.hpp"

namespace mfris::conic {

// Compiled cone program in inequality form:
//   minimize c^T x   s.t.   G x + s = h,  s in (R_+^l) x (PSD blocks)
// Variables are the reduced free reals after fixing / equality elimination.
struct PsdBlockData {
    int dim = 0;      // real symmetric matrix dimension (post embedding)
    int svec_dim = 0; // dim*(dim+1)/2
    std::vector<int> vars;
    Eigen::MatrixXd cols; // svec_dim x vars.size(), columns are -svec(B_j)
    Eigen::VectorXd h;    // svec(B_0)
};

struct CompiledProblem {
    int n = 0;
    Eigen::VectorXd c;
    std::vector<std::vector<std::pair<int, double>>> lin_rows; // a^T x <= b
    Eigen::VectorXd lin_h;
    std::vector<PsdBlockData> psd;

    double cone_degree() const {
        double nu = static_cast<double>(lin_h.size());
        for (const auto& b : psd) nu += b.dim;
        return nu;
    }
};

struct RawSolution {
    Status status = Status::NumericalFailure;
    Eigen::VectorXd x;
    int iterations = 0;
};

RawSolution solve_hsd(const CompiledProblem& prob, const SolverOptions& opts);

// svec with sqrt(2) off-diagonal scaling; preserves inner products.
Eigen::VectorXd svec(const Eigen::MatrixXd& m);
Eigen::MatrixXd smat(const Eigen::VectorXd& v, int dim);

} // namespace mfris::conic
