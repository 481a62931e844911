#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mfris::conic {

using cd = std::complex<double>;

// Complex-valued affine expression over the program's real scalar variables.
class Expr {
public:
    Expr() = default;
    Expr(double c) : constant_(c) {}
    Expr(cd c) : constant_(c) {}

    static Expr variable(int var, cd coeff = cd(1.0, 0.0));

    const cd& constant() const { return constant_; }
    const std::vector<std::pair<int, cd>>& terms() const { return terms_; }

    Expr conjugate() const;
    bool is_constant() const { return terms_.empty(); }
    cd eval(const Eigen::VectorXd& x) const;

    Expr& operator+=(const Expr& other);
    Expr& operator-=(const Expr& other);
    Expr& operator*=(cd scale);

private:
    void push(int var, cd coeff);

    cd constant_{0.0, 0.0};
    std::vector<std::pair<int, cd>> terms_; // sorted by var, merged
};

Expr operator+(Expr a, const Expr& b);
Expr operator-(Expr a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(cd s, Expr a);
Expr operator*(Expr a, cd s);

// Dense matrix of affine expressions; products with constant matrices
// preserve affinity, which is all the subproblem builders need.
class ExprMatrix {
public:
    ExprMatrix() = default;
    ExprMatrix(Eigen::Index rows, Eigen::Index cols);
    static ExprMatrix constant(const Eigen::MatrixXcd& m);
    static ExprMatrix zero(Eigen::Index rows, Eigen::Index cols);

    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }
    Expr& operator()(Eigen::Index i, Eigen::Index j) { return data_[i * cols_ + j]; }
    const Expr& operator()(Eigen::Index i, Eigen::Index j) const { return data_[i * cols_ + j]; }

    ExprMatrix adjoint() const;
    ExprMatrix transpose() const;
    void set_block(Eigen::Index r0, Eigen::Index c0, const ExprMatrix& b);
    Eigen::MatrixXcd eval(const Eigen::VectorXd& x) const;

private:
    Eigen::Index rows_ = 0, cols_ = 0;
    std::vector<Expr> data_;
};

ExprMatrix operator+(const ExprMatrix& a, const ExprMatrix& b);
ExprMatrix operator-(const ExprMatrix& a, const ExprMatrix& b);
ExprMatrix operator*(const Eigen::MatrixXcd& a, const ExprMatrix& b);
ExprMatrix operator*(const ExprMatrix& a, const Eigen::MatrixXcd& b);
ExprMatrix operator*(cd s, const ExprMatrix& a);

// Structured variable handles over underlying real scalars.
struct ComplexVar {
    int re = -1, im = -1;
    Expr expr() const;
};

class ComplexVectorVar {
public:
    ComplexVectorVar() = default;
    explicit ComplexVectorVar(std::vector<ComplexVar> entries) : entries_(std::move(entries)) {}
    Eigen::Index size() const { return static_cast<Eigen::Index>(entries_.size()); }
    Expr entry(Eigen::Index i) const { return entries_[i].expr(); }
    const ComplexVar& at(Eigen::Index i) const { return entries_[i]; }
    ExprMatrix column() const;   // size x 1
    Eigen::VectorXcd value(const Eigen::VectorXd& x) const;

private:
    std::vector<ComplexVar> entries_;
};

// Hermitian matrix variable: n real diagonal entries plus re/im pairs below
// the diagonal. entry(i,j) for i<j returns the conjugate automatically.
class HermitianVar {
public:
    HermitianVar() = default;
    HermitianVar(Eigen::Index n, std::vector<int> diag, std::vector<ComplexVar> lower);
    Eigen::Index dim() const { return n_; }
    Expr entry(Eigen::Index i, Eigen::Index j) const;
    Expr trace() const;
    ExprMatrix matrix() const;
    int diag_var(Eigen::Index i) const { return diag_[i]; }
    Eigen::MatrixXcd value(const Eigen::VectorXd& x) const;

private:
    Eigen::Index n_ = 0;
    std::vector<int> diag_;
    std::vector<ComplexVar> lower_; // column-major strict lower triangle

    Eigen::Index lower_index(Eigen::Index i, Eigen::Index j) const;
};

enum class Status { Optimal, Infeasible, Unbounded, MaxIterations, NumericalFailure };

const char* status_name(Status s);

struct SolverOptions {
    double feas_tol = 1e-8;
    double gap_tol = 1e-7;      // relative duality gap
    double abs_gap_tol = 1e-9;
    int max_iterations = 200;
    bool verbose = false;
};

struct Solution {
    Status status = Status::NumericalFailure;
    double objective = 0.0; // in the program's maximize sense
    Eigen::VectorXd values; // every declared real scalar
    double max_violation = 0.0;
    int iterations = 0;

    double value(int var) const { return values(var); }
    cd value(const Expr& e) const { return e.eval(values); }
    bool ok() const { return status == Status::Optimal; }
};

// Linear objective over real/complex/Hermitian variable blocks subject to
// linear, second-order-cone, and affine-Hermitian PSD constraints.
// Immutable once solve() is called; concurrent solves of distinct programs
// are safe.
class Program {
public:
    int add_real(const std::string& name = "");
    int add_real_bounded(double lb, double ub, const std::string& name = "");
    int add_real_nonneg(const std::string& name = "");
    ComplexVar add_complex(const std::string& name = "");
    ComplexVectorVar add_complex_vector(Eigen::Index n, const std::string& name = "");
    HermitianVar add_hermitian(Eigen::Index n, const std::string& name = "");

    // Pins a variable to a constant; eliminated before solving.
    void fix(int var, double value);

    void add_eq(const Expr& e, double rhs);
    void add_le(const Expr& e, double rhs);   // real(e) <= rhs, imag must vanish
    void add_ge(const Expr& e, double rhs);
    void add_box(int var, double lb, double ub);
    void add_psd(const ExprMatrix& block);    // block affine and Hermitian
    void add_soc(const std::vector<Expr>& x, const Expr& t); // ||x|| <= t
    // |z|^2 <= x*y with x,y real affine (2x2 PSD block).
    void add_abs2_le_product(const Expr& z, const Expr& x, const Expr& y);

    void maximize(const Expr& objective);

    int num_reals() const { return static_cast<int>(names_.size()); }

    // Dimensions and constraint census; debugging aid.
    std::string describe() const;

    // Optional initial guess, stored for callers that stage iterates; the
    // interior-point method itself starts from its own central point.
    void set_warm_start(const Eigen::VectorXd& values) { warm_start_ = values; }
    const Eigen::VectorXd& warm_start() const { return warm_start_; }

    Solution solve(const SolverOptions& opts = {}) const;

private:
    friend struct Compiler;

    struct LinearRow {
        Expr expr;   // residual form: expr <= 0 (LE) or expr == 0 (EQ)
        bool is_eq;
    };

    std::vector<std::string> names_;
    std::vector<std::pair<int, double>> fixed_;
    std::vector<LinearRow> linear_;
    std::vector<ExprMatrix> psd_;
    Expr objective_;
    Eigen::VectorXd warm_start_;
};

// Largest eigenvalue and a unit eigenvector of a Hermitian matrix.
// Shifted power iteration with Rayleigh polish; throws on non-Hermitian input.
std::pair<double, Eigen::VectorXcd> leading_eigenpair(const Eigen::MatrixXcd& A);

} // namespace mfris::conic
