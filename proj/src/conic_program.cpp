#include "mfris/conic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "conic_internal.hpp"

namespace mfris::conic {

namespace {
constexpr double kHermitianTol = 1e-12;
constexpr double kRealTol = 1e-13;
} // namespace

// ---------------------------------------------------------------- Expr

Expr Expr::variable(int var, cd coeff) {
    Expr e;
    e.terms_.emplace_back(var, coeff);
    return e;
}

void Expr::push(int var, cd coeff) {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), var,
                               [](const auto& t, int v) { return t.first < v; });
    if (it != terms_.end() && it->first == var) {
        it->second += coeff;
    } else {
        terms_.insert(it, {var, coeff});
    }
}

Expr Expr::conjugate() const {
    Expr e;
    e.constant_ = std::conj(constant_);
    e.terms_ = terms_;
    for (auto& t : e.terms_) t.second = std::conj(t.second);
    return e;
}

cd Expr::eval(const Eigen::VectorXd& x) const {
    cd v = constant_;
    for (const auto& [var, coeff] : terms_) v += coeff * x(var);
    return v;
}

Expr& Expr::operator+=(const Expr& other) {
    constant_ += other.constant_;
    for (const auto& [var, coeff] : other.terms_) push(var, coeff);
    return *this;
}

Expr& Expr::operator-=(const Expr& other) {
    constant_ -= other.constant_;
    for (const auto& [var, coeff] : other.terms_) push(var, -coeff);
    return *this;
}

Expr& Expr::operator*=(cd scale) {
    constant_ *= scale;
    for (auto& t : terms_) t.second *= scale;
    return *this;
}

Expr operator+(Expr a, const Expr& b) { return a += b; }
Expr operator-(Expr a, const Expr& b) { return a -= b; }
Expr operator-(const Expr& a) {
    Expr r = a;
    r *= cd(-1.0, 0.0);
    return r;
}
Expr operator*(cd s, Expr a) { return a *= s; }
Expr operator*(Expr a, cd s) { return a *= s; }

// ---------------------------------------------------------------- ExprMatrix

ExprMatrix::ExprMatrix(Eigen::Index rows, Eigen::Index cols)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols)) {}

ExprMatrix ExprMatrix::constant(const Eigen::MatrixXcd& m) {
    ExprMatrix r(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) r(i, j) = Expr(m(i, j));
    return r;
}

ExprMatrix ExprMatrix::zero(Eigen::Index rows, Eigen::Index cols) {
    return ExprMatrix(rows, cols);
}

ExprMatrix ExprMatrix::adjoint() const {
    ExprMatrix r(cols_, rows_);
    for (Eigen::Index i = 0; i < rows_; ++i)
        for (Eigen::Index j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j).conjugate();
    return r;
}

ExprMatrix ExprMatrix::transpose() const {
    ExprMatrix r(cols_, rows_);
    for (Eigen::Index i = 0; i < rows_; ++i)
        for (Eigen::Index j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
}

void ExprMatrix::set_block(Eigen::Index r0, Eigen::Index c0, const ExprMatrix& b) {
    for (Eigen::Index i = 0; i < b.rows(); ++i)
        for (Eigen::Index j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
}

Eigen::MatrixXcd ExprMatrix::eval(const Eigen::VectorXd& x) const {
    Eigen::MatrixXcd m(rows_, cols_);
    for (Eigen::Index i = 0; i < rows_; ++i)
        for (Eigen::Index j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).eval(x);
    return m;
}

ExprMatrix operator+(const ExprMatrix& a, const ExprMatrix& b) {
    ExprMatrix r = a;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) r(i, j) += b(i, j);
    return r;
}

ExprMatrix operator-(const ExprMatrix& a, const ExprMatrix& b) {
    ExprMatrix r = a;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) r(i, j) -= b(i, j);
    return r;
}

ExprMatrix operator*(const Eigen::MatrixXcd& a, const ExprMatrix& b) {
    ExprMatrix r(a.rows(), b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            Expr acc;
            for (Eigen::Index k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
            r(i, j) = acc;
        }
    return r;
}

ExprMatrix operator*(const ExprMatrix& a, const Eigen::MatrixXcd& b) {
    ExprMatrix r(a.rows(), b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            Expr acc;
            for (Eigen::Index k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
            r(i, j) = acc;
        }
    return r;
}

ExprMatrix operator*(cd s, const ExprMatrix& a) {
    ExprMatrix r = a;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) r(i, j) *= s;
    return r;
}

// ---------------------------------------------------------------- handles

Expr ComplexVar::expr() const {
    Expr e = Expr::variable(re, cd(1.0, 0.0));
    e += Expr::variable(im, cd(0.0, 1.0));
    return e;
}

ExprMatrix ComplexVectorVar::column() const {
    ExprMatrix m(size(), 1);
    for (Eigen::Index i = 0; i < size(); ++i) m(i, 0) = entry(i);
    return m;
}

Eigen::VectorXcd ComplexVectorVar::value(const Eigen::VectorXd& x) const {
    Eigen::VectorXcd v(size());
    for (Eigen::Index i = 0; i < size(); ++i) v(i) = entry(i).eval(x);
    return v;
}

HermitianVar::HermitianVar(Eigen::Index n, std::vector<int> diag, std::vector<ComplexVar> lower)
    : n_(n), diag_(std::move(diag)), lower_(std::move(lower)) {}

Eigen::Index HermitianVar::lower_index(Eigen::Index i, Eigen::Index j) const {
    // column-major strict lower triangle, i > j
    return j * (n_ - 1) - j * (j + 1) / 2 + (i - 1);
}

Expr HermitianVar::entry(Eigen::Index i, Eigen::Index j) const {
    if (i == j) return Expr::variable(diag_[i]);
    if (i > j) return lower_[lower_index(i, j)].expr();
    return lower_[lower_index(j, i)].expr().conjugate();
}

Expr HermitianVar::trace() const {
    Expr t;
    for (Eigen::Index i = 0; i < n_; ++i) t += Expr::variable(diag_[i]);
    return t;
}

ExprMatrix HermitianVar::matrix() const {
    ExprMatrix m(n_, n_);
    for (Eigen::Index i = 0; i < n_; ++i)
        for (Eigen::Index j = 0; j < n_; ++j) m(i, j) = entry(i, j);
    return m;
}

Eigen::MatrixXcd HermitianVar::value(const Eigen::VectorXd& x) const {
    return matrix().eval(x);
}

// ---------------------------------------------------------------- Program

const char* status_name(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
        case Status::MaxIterations: return "max-iterations";
        case Status::NumericalFailure: return "numerical-failure";
    }
    return "?";
}

int Program::add_real(const std::string& name) {
    names_.push_back(name.empty() ? "x" + std::to_string(names_.size()) : name);
    return static_cast<int>(names_.size()) - 1;
}

int Program::add_real_bounded(double lb, double ub, const std::string& name) {
    const int v = add_real(name);
    add_box(v, lb, ub);
    return v;
}

int Program::add_real_nonneg(const std::string& name) {
    const int v = add_real(name);
    add_ge(Expr::variable(v), 0.0);
    return v;
}

ComplexVar Program::add_complex(const std::string& name) {
    ComplexVar v;
    v.re = add_real(name + ".re");
    v.im = add_real(name + ".im");
    return v;
}

ComplexVectorVar Program::add_complex_vector(Eigen::Index n, const std::string& name) {
    std::vector<ComplexVar> entries;
    entries.reserve(n);
    for (Eigen::Index i = 0; i < n; ++i)
        entries.push_back(add_complex(name + "[" + std::to_string(i) + "]"));
    return ComplexVectorVar(std::move(entries));
}

HermitianVar Program::add_hermitian(Eigen::Index n, const std::string& name) {
    std::vector<int> diag(n);
    for (Eigen::Index i = 0; i < n; ++i)
        diag[i] = add_real(name + "(" + std::to_string(i) + "," + std::to_string(i) + ")");
    std::vector<ComplexVar> lower;
    lower.reserve(n * (n - 1) / 2);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = j + 1; i < n; ++i)
            lower.push_back(add_complex(name + "(" + std::to_string(i) + "," + std::to_string(j) + ")"));
    return HermitianVar(n, std::move(diag), std::move(lower));
}

void Program::fix(int var, double value) { fixed_.emplace_back(var, value); }

namespace {
void require_real(const Expr& e, const char* where) {
    if (std::abs(e.constant().imag()) > kRealTol * (1.0 + std::abs(e.constant())))
        throw std::invalid_argument(std::string(where) + ": expression has imaginary constant " +
                                    std::to_string(e.constant().imag()));
    for (const auto& [var, coeff] : e.terms()) {
        if (std::abs(coeff.imag()) > kRealTol * (1.0 + std::abs(coeff)))
            throw std::invalid_argument(
                std::string(where) + ": imaginary coefficient " + std::to_string(coeff.imag()) +
                " (re " + std::to_string(coeff.real()) + ") on var " + std::to_string(var));
    }
}
} // namespace

void Program::add_eq(const Expr& e, double rhs) {
    require_real(e, "add_eq");
    linear_.push_back({e - Expr(rhs), true});
}

void Program::add_le(const Expr& e, double rhs) {
    require_real(e, "add_le");
    linear_.push_back({e - Expr(rhs), false});
}

void Program::add_ge(const Expr& e, double rhs) {
    require_real(e, "add_ge");
    linear_.push_back({Expr(rhs) - e, false});
}

void Program::add_box(int var, double lb, double ub) {
    add_ge(Expr::variable(var), lb);
    add_le(Expr::variable(var), ub);
}

void Program::add_psd(const ExprMatrix& block) {
    if (block.rows() != block.cols()) throw std::invalid_argument("add_psd: block not square");
    psd_.push_back(block);
}

void Program::add_soc(const std::vector<Expr>& x, const Expr& t) {
    // Arrowhead embedding: [[t, x^H],[x, t I]] is PSD iff ||x|| <= t.
    const Eigen::Index n = static_cast<Eigen::Index>(x.size());
    ExprMatrix b(n + 1, n + 1);
    b(0, 0) = t;
    for (Eigen::Index i = 0; i < n; ++i) {
        b(i + 1, 0) = x[i];
        b(0, i + 1) = x[i].conjugate();
        b(i + 1, i + 1) = t;
    }
    add_psd(b);
}

void Program::add_abs2_le_product(const Expr& z, const Expr& x, const Expr& y) {
    ExprMatrix b(2, 2);
    b(0, 0) = x;
    b(1, 1) = y;
    b(1, 0) = z;
    b(0, 1) = z.conjugate();
    add_psd(b);
}

void Program::maximize(const Expr& objective) {
    require_real(objective, "maximize");
    objective_ = objective;
}

std::string Program::describe() const {
    std::ostringstream os;
    int n_eq = 0, n_ineq = 0;
    for (const auto& row : linear_) (row.is_eq ? n_eq : n_ineq)++;
    os << "vars=" << names_.size() << " fixed=" << fixed_.size() << " eq=" << n_eq
       << " ineq=" << n_ineq << " psd=[";
    for (std::size_t i = 0; i < psd_.size(); ++i) {
        if (i) os << ",";
        os << psd_[i].rows();
    }
    os << "]";
    return os.str();
}

// ---------------------------------------------------------------- compile

struct Compiler {
    const Program& prog;
    int n_full;
    // full -> reduced affine map: x_full = shift + basis * x_red
    Eigen::VectorXd shift;
    Eigen::MatrixXd basis; // n_full x n_red, unit columns when no equalities
    bool identity_basis = true;
    std::vector<int> red_of_full; // -1 when eliminated (identity path)

    explicit Compiler(const Program& p) : prog(p), n_full(p.num_reals()) {}

    // Returns false when the fixed/equality system is inconsistent.
    bool reduce() {
        shift = Eigen::VectorXd::Zero(n_full);
        std::vector<bool> is_fixed(n_full, false);
        for (const auto& [var, val] : prog.fixed_) {
            is_fixed[var] = true;
            shift(var) = val;
        }

        std::vector<const Expr*> eqs;
        for (const auto& row : prog.linear_)
            if (row.is_eq) eqs.push_back(&row.expr);

        if (eqs.empty()) {
            red_of_full.assign(n_full, -1);
            int r = 0;
            for (int i = 0; i < n_full; ++i)
                if (!is_fixed[i]) red_of_full[i] = r++;
            identity_basis = true;
            basis.resize(0, 0);
            return true;
        }

        // General equality elimination: orthonormal nullspace substitution.
        identity_basis = false;
        std::vector<int> free_of_full(n_full, -1);
        std::vector<int> full_of_free;
        for (int i = 0; i < n_full; ++i)
            if (!is_fixed[i]) {
                free_of_full[i] = static_cast<int>(full_of_free.size());
                full_of_free.push_back(i);
            }
        const int nf = static_cast<int>(full_of_free.size());
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(static_cast<int>(eqs.size()), nf);
        Eigen::VectorXd d(static_cast<int>(eqs.size()));
        for (std::size_t r = 0; r < eqs.size(); ++r) {
            double rhs = -eqs[r]->constant().real();
            for (const auto& [var, coeff] : eqs[r]->terms()) {
                if (is_fixed[var]) {
                    rhs -= coeff.real() * shift(var);
                } else {
                    E(static_cast<int>(r), free_of_full[var]) += coeff.real();
                }
            }
            d(static_cast<int>(r)) = rhs;
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(E, Eigen::ComputeThinU | Eigen::ComputeFullV);
        const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
        const double tol = 1e-12 * std::max(1.0, smax);
        int rank = 0;
        for (int i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()(i) > tol) ++rank;
        Eigen::VectorXd x0 = Eigen::VectorXd::Zero(nf);
        for (int i = 0; i < rank; ++i)
            x0 += svd.matrixV().col(i) * (svd.matrixU().col(i).dot(d) / svd.singularValues()(i));
        if ((E * x0 - d).lpNorm<Eigen::Infinity>() > 1e-8 * std::max(1.0, d.lpNorm<Eigen::Infinity>()))
            return false; // inconsistent equalities
        const int n_red = nf - rank;
        basis = Eigen::MatrixXd::Zero(n_full, n_red);
        for (int i = 0; i < nf; ++i) {
            shift(full_of_free[i]) += x0(i);
            basis.row(full_of_free[i]) = svd.matrixV().row(i).rightCols(n_red);
        }
        return true;
    }

    int n_red() const {
        if (identity_basis) {
            int r = 0;
            for (int v : red_of_full)
                if (v >= 0) ++r;
            return r;
        }
        return static_cast<int>(basis.cols());
    }

    // Scatter one affine expression into (coeff over reduced vars, constant).
    void scatter(const Expr& e, std::vector<std::pair<int, double>>& out, double& constant) const {
        constant = e.constant().real();
        out.clear();
        if (identity_basis) {
            for (const auto& [var, coeff] : e.terms()) {
                const int r = red_of_full[var];
                if (r < 0) {
                    constant += coeff.real() * shift(var);
                } else {
                    out.emplace_back(r, coeff.real());
                }
            }
            std::sort(out.begin(), out.end());
            return;
        }
        Eigen::VectorXd full = Eigen::VectorXd::Zero(n_full);
        for (const auto& [var, coeff] : e.terms()) full(var) += coeff.real();
        constant += full.dot(shift);
        const Eigen::VectorXd red = basis.transpose() * full;
        for (int i = 0; i < red.size(); ++i)
            if (red(i) != 0.0) out.emplace_back(i, red(i));
    }

    CompiledProblem compile() const {
        CompiledProblem cp;
        cp.n = n_red();

        // objective: maximize -> minimize
        {
            cp.c = Eigen::VectorXd::Zero(cp.n);
            std::vector<std::pair<int, double>> t;
            double c0;
            scatter(prog.objective_, t, c0);
            for (const auto& [v, a] : t) cp.c(v) -= a;
        }

        std::vector<double> lin_h;
        for (const auto& row : prog.linear_) {
            if (row.is_eq) continue;
            std::vector<std::pair<int, double>> t;
            double c0;
            scatter(row.expr, t, c0); // expr <= 0  ->  a^T x <= -c0
            cp.lin_rows.push_back(std::move(t));
            lin_h.push_back(-c0);
        }
        cp.lin_h = Eigen::Map<Eigen::VectorXd>(lin_h.data(), static_cast<Eigen::Index>(lin_h.size()));

        for (const auto& block : prog.psd_) {
            cp.psd.push_back(compile_block(block));
        }
        return cp;
    }

    PsdBlockData compile_block(const ExprMatrix& block) const {
        const Eigen::Index m = block.rows();
        // Collect participating reduced vars and per-var complex coefficient matrices.
        Eigen::MatrixXcd b0 = Eigen::MatrixXcd::Zero(m, m);
        std::vector<int> vars;
        std::vector<Eigen::MatrixXcd> coef;
        std::vector<int> slot(static_cast<std::size_t>(n_red()), -1);

        std::vector<std::pair<int, double>> terms;
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = 0; j < m; ++j) {
                const Expr& e = block(i, j);
                b0(i, j) += e.constant();
                if (identity_basis) {
                    for (const auto& [var, c] : e.terms()) {
                        const int r = red_of_full[var];
                        if (r < 0) {
                            b0(i, j) += c * shift(var);
                            continue;
                        }
                        if (slot[r] < 0) {
                            slot[r] = static_cast<int>(vars.size());
                            vars.push_back(r);
                            coef.emplace_back(Eigen::MatrixXcd::Zero(m, m));
                        }
                        coef[slot[r]](i, j) += c;
                    }
                } else {
                    // Reduced-space scatter entry by entry (rare path).
                    Eigen::VectorXd full = Eigen::VectorXd::Zero(n_full);
                    cd fixed_part(0, 0);
                    for (const auto& [var, c] : e.terms()) {
                        full(var) += c.real();
                        fixed_part += cd(0.0, c.imag()) * shift(var);
                    }
                    // real and imaginary coefficient parts handled separately
                    Eigen::VectorXd full_im = Eigen::VectorXd::Zero(n_full);
                    for (const auto& [var, c] : e.terms()) full_im(var) += c.imag();
                    b0(i, j) += cd(full.dot(shift), full_im.dot(shift));
                    const Eigen::VectorXd red_re = basis.transpose() * full;
                    const Eigen::VectorXd red_im = basis.transpose() * full_im;
                    for (int r = 0; r < red_re.size(); ++r) {
                        const cd c(red_re(r), red_im(r));
                        if (c == cd(0.0, 0.0)) continue;
                        if (slot[r] < 0) {
                            slot[r] = static_cast<int>(vars.size());
                            vars.push_back(r);
                            coef.emplace_back(Eigen::MatrixXcd::Zero(m, m));
                        }
                        coef[slot[r]](i, j) += c;
                    }
                }
            }
        }
        (void)terms;

        // Hermitian audit of the affine map.
        auto check_herm = [&](const Eigen::MatrixXcd& a, const char* what) {
            const double skew = (a - a.adjoint()).cwiseAbs().maxCoeff();
            const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
            if (skew > kHermitianTol * scale * 16)
                throw std::invalid_argument(std::string("add_psd: non-Hermitian ") + what);
        };
        check_herm(b0, "constant block");
        for (const auto& a : coef) check_herm(a, "coefficient block");

        const bool is_real = [&] {
            if (b0.imag().cwiseAbs().maxCoeff() > kHermitianTol) return false;
            for (const auto& a : coef)
                if (a.imag().cwiseAbs().maxCoeff() > kHermitianTol) return false;
            return true;
        }();

        PsdBlockData out;
        out.vars = vars;
        if (is_real) {
            out.dim = static_cast<int>(m);
            out.svec_dim = out.dim * (out.dim + 1) / 2;
            out.h = svec(b0.real());
            out.cols.resize(out.svec_dim, static_cast<Eigen::Index>(vars.size()));
            for (std::size_t t = 0; t < coef.size(); ++t)
                out.cols.col(static_cast<Eigen::Index>(t)) = -svec(coef[t].real());
        } else {
            // 2x2 real embedding [[Re, -Im],[Im, Re]] preserves PSD-ness.
            auto embed = [m](const Eigen::MatrixXcd& a) {
                Eigen::MatrixXd r(2 * m, 2 * m);
                r.topLeftCorner(m, m) = a.real();
                r.bottomRightCorner(m, m) = a.real();
                r.topRightCorner(m, m) = -a.imag();
                r.bottomLeftCorner(m, m) = a.imag();
                return r;
            };
            out.dim = static_cast<int>(2 * m);
            out.svec_dim = out.dim * (out.dim + 1) / 2;
            out.h = svec(embed(b0));
            out.cols.resize(out.svec_dim, static_cast<Eigen::Index>(vars.size()));
            for (std::size_t t = 0; t < coef.size(); ++t)
                out.cols.col(static_cast<Eigen::Index>(t)) = -svec(embed(coef[t]));
        }
        return out;
    }
};

Solution Program::solve(const SolverOptions& opts) const {
    Solution sol;
    Compiler comp(*this);
    if (!comp.reduce()) {
        sol.status = Status::Infeasible;
        sol.values = Eigen::VectorXd::Zero(num_reals());
        return sol;
    }
    CompiledProblem cp = comp.compile();

    RawSolution raw;
    if (cp.n == 0) {
        // Fully determined: feasibility is a data check.
        raw.status = Status::Optimal;
        raw.x.resize(0);
        for (Eigen::Index r = 0; r < cp.lin_h.size(); ++r)
            if (cp.lin_h(r) < -opts.feas_tol) raw.status = Status::Infeasible;
        for (const auto& blk : cp.psd) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(smat(blk.h, blk.dim),
                                                              Eigen::EigenvaluesOnly);
            if (es.eigenvalues().minCoeff() < -opts.feas_tol) raw.status = Status::Infeasible;
        }
    } else {
        raw = solve_hsd(cp, opts);
    }

    sol.status = raw.status;
    sol.iterations = raw.iterations;
    if (comp.identity_basis) {
        sol.values = comp.shift;
        if (raw.x.size() > 0)
            for (int i = 0; i < comp.n_full; ++i)
                if (comp.red_of_full[i] >= 0) sol.values(i) = raw.x(comp.red_of_full[i]);
    } else {
        sol.values = comp.shift;
        if (raw.x.size() > 0) sol.values += comp.basis * raw.x;
    }
    sol.objective = objective_.eval(sol.values).real();

    // Post-hoc violation audit on the original, unscaled data.
    double viol = 0.0;
    for (const auto& row : linear_) {
        const double v = row.expr.eval(sol.values).real();
        viol = std::max(viol, row.is_eq ? std::abs(v) : v);
    }
    for (const auto& block : psd_) {
        const Eigen::MatrixXcd b = block.eval(sol.values);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
            0.5 * (b + b.adjoint()), Eigen::EigenvaluesOnly);
        viol = std::max(viol, -es.eigenvalues().minCoeff());
    }
    sol.max_violation = viol;
    return sol;
}

// ---------------------------------------------------------------- eigenpair

std::pair<double, Eigen::VectorXcd> leading_eigenpair(const Eigen::MatrixXcd& A) {
    if (A.rows() != A.cols()) throw std::invalid_argument("leading_eigenpair: not square");
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument("leading_eigenpair: matrix not Hermitian");

    const Eigen::Index n = A.rows();
    if (n == 1) return {A(0, 0).real(), Eigen::VectorXcd::Ones(1)};

    // Shift so the largest eigenvalue is also largest in magnitude.
    const double shift = A.cwiseAbs().rowwise().sum().maxCoeff() + scale;
    const Eigen::MatrixXcd B = A + shift * Eigen::MatrixXcd::Identity(n, n);

    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) += cd(0.37 * static_cast<double>(i % 7), 0.11);
    v.normalize();

    double lambda = 0.0;
    const double tol = 1e-13 * std::max(scale, 1.0);
    for (int it = 0; it < 20000; ++it) {
        Eigen::VectorXcd w = B * v;
        const double nw = w.norm();
        if (nw == 0.0) break; // A = -shift*I; any unit vector works
        w /= nw;
        v = w;
        lambda = std::real(v.dot(A * v)); // Rayleigh quotient (dot conjugates)
        if ((A * v - lambda * v).norm() <= tol * 10) break;
    }
    if ((A * v - lambda * v).norm() > 1e-9 * std::max(scale, 1.0)) {
        // Clustered spectrum; fall back on the dense decomposition.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
        Eigen::Index imax;
        es.eigenvalues().maxCoeff(&imax);
        return {es.eigenvalues()(imax), es.eigenvectors().col(imax)};
    }
    return {lambda, v};
}

} // namespace mfris::conic
