#pragma once
/**
 * Dense operator algebra over composite spin (x) boson Hilbert spaces.
 *
 * Basis conventions (fixed so emitted matrices are reproducible):
 *  - spin factor: descending m, i.e. index 0 is |m = +s>;
 *  - boson factor: ascending Fock number, index 0 is |0>;
 *  - composite index: row-major over the factor list (factor 0 is the
 *    most significant digit), so embed() is kron(I_left, op, I_right).
 */

#include "chiralspin/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <set>
#include <string>
#include <vector>

namespace chiralspin {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr cplx I{0.0, 1.0};

enum class FactorKind { spin, boson };

struct Factor {
    FactorKind kind;
    std::size_t dim;

    static Factor spin(double s) {
        const double two_s = 2.0 * s;
        if (s < 0.0 || std::abs(two_s - std::round(two_s)) > 1e-12)
            throw DomainError("spin must be a non-negative half-integer, got " + std::to_string(s));
        return {FactorKind::spin, static_cast<std::size_t>(std::lround(two_s)) + 1};
    }

    static Factor boson(int cutoff) {
        if (cutoff < 1)
            throw DomainError("boson Fock cutoff must be >= 1, got " + std::to_string(cutoff));
        return {FactorKind::boson, static_cast<std::size_t>(cutoff) + 1};
    }

    /// s for spin factors, Fock cutoff for boson factors.
    double label() const {
        return kind == FactorKind::spin ? 0.5 * static_cast<double>(dim - 1)
                                        : static_cast<double>(dim - 1);
    }

    friend bool operator==(const Factor&, const Factor&) = default;
};

class HilbertSpace {
public:
    HilbertSpace() = default;

    explicit HilbertSpace(std::vector<Factor> factors) : factors_(std::move(factors)) {
        if (factors_.empty()) throw DomainError("Hilbert space needs at least one factor");
        for (const auto& f : factors_) {
            if (f.dim < 1 || (f.kind == FactorKind::boson && f.dim < 2))
                throw DomainError("invalid factor dimension " + std::to_string(f.dim));
        }
    }

    static HilbertSpace spins(std::size_t n, double s = 0.5) {
        return HilbertSpace(std::vector<Factor>(n, Factor::spin(s)));
    }

    const std::vector<Factor>& factors() const noexcept { return factors_; }
    std::size_t size() const noexcept { return factors_.size(); }
    const Factor& operator[](std::size_t i) const { return factors_.at(i); }

    std::size_t dim() const noexcept {
        return std::accumulate(factors_.begin(), factors_.end(), std::size_t{1},
                               [](std::size_t acc, const Factor& f) { return acc * f.dim; });
    }

    /// Composite index of a product basis state given per-factor indices.
    std::size_t index(const std::vector<std::size_t>& digits) const {
        if (digits.size() != factors_.size()) throw DomainError("basis label length mismatch");
        std::size_t idx = 0;
        for (std::size_t k = 0; k < factors_.size(); ++k) {
            if (digits[k] >= factors_[k].dim) throw DomainError("basis label out of range");
            idx = idx * factors_[k].dim + digits[k];
        }
        return idx;
    }

    std::vector<std::size_t> digits(std::size_t idx) const {
        std::vector<std::size_t> out(factors_.size());
        for (std::size_t k = factors_.size(); k-- > 0;) {
            out[k] = idx % factors_[k].dim;
            idx /= factors_[k].dim;
        }
        return out;
    }

    friend bool operator==(const HilbertSpace&, const HilbertSpace&) = default;

private:
    std::vector<Factor> factors_;
};

inline void require_same_space(const HilbertSpace& a, const HilbertSpace& b, const char* what) {
    if (!(a == b)) throw DomainError(std::string(what) + ": Hilbert space mismatch");
}

/// Square complex matrix tagged with the space it acts on.
class Operator {
public:
    Operator() = default;

    Operator(HilbertSpace space, Matrix m) : space_(std::move(space)), m_(std::move(m)) {
        const auto d = static_cast<Eigen::Index>(space_.dim());
        if (m_.rows() != d || m_.cols() != d)
            throw DomainError("operator matrix is " + std::to_string(m_.rows()) + "x" +
                              std::to_string(m_.cols()) + ", space dimension is " +
                              std::to_string(d));
    }

    static Operator zero(const HilbertSpace& space) {
        const auto d = static_cast<Eigen::Index>(space.dim());
        return {space, Matrix::Zero(d, d)};
    }

    static Operator identity(const HilbertSpace& space) {
        const auto d = static_cast<Eigen::Index>(space.dim());
        return {space, Matrix::Identity(d, d)};
    }

    const HilbertSpace& space() const noexcept { return space_; }
    const Matrix& matrix() const noexcept { return m_; }
    std::size_t dim() const noexcept { return space_.dim(); }
    cplx operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

    Operator dagger() const { return {space_, m_.adjoint()}; }

    double max_abs() const { return m_.size() == 0 ? 0.0 : m_.cwiseAbs().maxCoeff(); }

    /// max|M - M^dagger| <= tol * max|M|
    bool is_hermitian(double rel_tol = 1e-12) const {
        const double scale = max_abs();
        if (scale == 0.0) return true;
        return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
    }

    Operator& operator+=(const Operator& o) {
        require_same_space(space_, o.space_, "operator +");
        m_ += o.m_;
        return *this;
    }
    Operator& operator-=(const Operator& o) {
        require_same_space(space_, o.space_, "operator -");
        m_ -= o.m_;
        return *this;
    }
    Operator& operator*=(cplx c) {
        m_ *= c;
        return *this;
    }

    friend Operator operator+(Operator a, const Operator& b) { return a += b; }
    friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
    friend Operator operator-(Operator a) { return a *= -1.0; }
    friend Operator operator*(cplx c, Operator a) { return a *= c; }
    friend Operator operator*(Operator a, cplx c) { return a *= c; }
    friend Operator operator*(const Operator& a, const Operator& b) {
        require_same_space(a.space_, b.space_, "operator *");
        return {a.space_, a.m_ * b.m_};
    }

private:
    HilbertSpace space_;
    Matrix m_;
};

inline Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

inline double max_abs_diff(const Operator& a, const Operator& b) {
    require_same_space(a.space(), b.space(), "max_abs_diff");
    return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

/// Density matrix; construction does not enforce physicality, check_physical() does.
class DensityMatrix {
public:
    DensityMatrix() = default;

    DensityMatrix(HilbertSpace space, Matrix m) : op_(std::move(space), std::move(m)) {}

    static DensityMatrix pure(const HilbertSpace& space, const Vector& psi) {
        if (psi.size() != static_cast<Eigen::Index>(space.dim()))
            throw DomainError("state vector dimension mismatch");
        return {space, psi * psi.adjoint()};
    }

    /// |digits><digits| for a product basis state.
    static DensityMatrix basis(const HilbertSpace& space, const std::vector<std::size_t>& digits) {
        Vector psi = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
        psi(static_cast<Eigen::Index>(space.index(digits))) = 1.0;
        return pure(space, psi);
    }

    static DensityMatrix maximally_mixed(const HilbertSpace& space) {
        const auto d = static_cast<Eigen::Index>(space.dim());
        return {space, Matrix::Identity(d, d) / static_cast<double>(d)};
    }

    const HilbertSpace& space() const noexcept { return op_.space(); }
    const Matrix& matrix() const noexcept { return op_.matrix(); }
    std::size_t dim() const noexcept { return op_.dim(); }
    const Operator& as_operator() const noexcept { return op_; }

    cplx trace() const { return op_.matrix().trace(); }

    double hermiticity_error() const {
        return (matrix() - matrix().adjoint()).cwiseAbs().maxCoeff();
    }

    double min_eigenvalue() const {
        const Matrix h = 0.5 * (matrix() + matrix().adjoint());
        Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    /// Throws DomainError naming the first violated invariant.
    void check_physical(double trace_tol = 1e-9, double herm_tol = 1e-10,
                        double pos_tol = 1e-8) const {
        if (std::abs(trace() - 1.0) > trace_tol)
            throw DomainError("density matrix trace deviates from 1");
        if (hermiticity_error() > herm_tol) throw DomainError("density matrix not Hermitian");
        if (min_eigenvalue() < -pos_tol) throw DomainError("density matrix not positive");
    }

private:
    Operator op_;
};

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
    std::vector<Factor> f = a.space().factors();
    f.insert(f.end(), b.space().factors().begin(), b.space().factors().end());
    return {HilbertSpace(std::move(f)), kron(a.matrix(), b.matrix())};
}

struct SpinOperators {
    Operator plus, minus, z;
};

inline SpinOperators spin_operators(double s) {
    const HilbertSpace space({Factor::spin(s)});
    const auto d = static_cast<Eigen::Index>(space.dim());
    const double S = space[0].label();
    Matrix sp = Matrix::Zero(d, d);
    Matrix sz = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double m = S - static_cast<double>(i);
        sz(i, i) = m;
        // S+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>, and |m+1> sits at index i-1
        if (i > 0) sp(i - 1, i) = std::sqrt(S * (S + 1.0) - m * (m + 1.0));
    }
    Operator plus(space, sp);
    Operator minus = plus.dagger();
    return {std::move(plus), std::move(minus), Operator(space, sz)};
}

struct BosonOperators {
    Operator a, a_dagger;
};

/// Truncated ladder operators. Note [a, a^dagger] = diag(1, ..., 1, -cutoff) on the
/// truncated space; cutoff convergence is checked by callers, not patched here.
inline BosonOperators boson_operators(int cutoff) {
    const HilbertSpace space({Factor::boson(cutoff)});
    const auto d = static_cast<Eigen::Index>(space.dim());
    Matrix a = Matrix::Zero(d, d);
    for (Eigen::Index n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    Operator op(space, a);
    Operator dag = op.dagger();
    return {std::move(op), std::move(dag)};
}

/// Places a single-factor operator at `site`, identity elsewhere.
inline Operator embed(const Operator& op, std::size_t site, const HilbertSpace& space) {
    if (site >= space.size())
        throw DomainError("embed: site " + std::to_string(site) + " out of range");
    if (op.dim() != space[site].dim)
        throw DomainError("embed: operator dimension " + std::to_string(op.dim()) +
                          " does not match factor dimension " + std::to_string(space[site].dim));
    std::size_t left = 1, right = 1;
    for (std::size_t k = 0; k < site; ++k) left *= space[k].dim;
    for (std::size_t k = site + 1; k < space.size(); ++k) right *= space[k].dim;
    const auto L = static_cast<Eigen::Index>(left);
    const auto R = static_cast<Eigen::Index>(right);
    const auto d = static_cast<Eigen::Index>(op.dim());
    const Matrix& m = op.matrix();

    Matrix out = Matrix::Zero(L * d * R, L * d * R);
    for (Eigen::Index l = 0; l < L; ++l)
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) {
                const cplx v = m(i, j);
                if (v == cplx{}) continue;
                for (Eigen::Index r = 0; r < R; ++r)
                    out((l * d + i) * R + r, (l * d + j) * R + r) = v;
            }
    return {space, std::move(out)};
}

/// Reduced state on the factors in `keep`, kept in their original order.
inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::set<std::size_t>& keep) {
    const HilbertSpace& space = rho.space();
    if (keep.empty()) throw DomainError("partial_trace: keep set is empty");
    if (*keep.rbegin() >= space.size()) throw DomainError("partial_trace: factor index out of range");
    if (keep.size() == space.size()) return rho;

    std::vector<Factor> kept_factors;
    for (auto k : keep) kept_factors.push_back(space[k]);
    HilbertSpace reduced(std::move(kept_factors));

    const std::size_t D = space.dim();
    std::vector<std::size_t> kept_idx(D), traced_idx(D);
    for (std::size_t i = 0; i < D; ++i) {
        const auto dg = space.digits(i);
        std::size_t ki = 0, ti = 0;
        for (std::size_t k = 0; k < space.size(); ++k) {
            if (keep.contains(k))
                ki = ki * space[k].dim + dg[k];
            else
                ti = ti * space[k].dim + dg[k];
        }
        kept_idx[i] = ki;
        traced_idx[i] = ti;
    }

    const auto d = static_cast<Eigen::Index>(reduced.dim());
    Matrix out = Matrix::Zero(d, d);
    const Matrix& m = rho.matrix();
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j < D; ++j)
            if (traced_idx[i] == traced_idx[j])
                out(static_cast<Eigen::Index>(kept_idx[i]), static_cast<Eigen::Index>(kept_idx[j])) +=
                    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return {std::move(reduced), std::move(out)};
}

/// tr(op rho)
inline cplx expectation(const Operator& op, const DensityMatrix& rho) {
    require_same_space(op.space(), rho.space(), "expectation");
    // tr(AB) = sum_ij A_ij B_ji
    return op.matrix().cwiseProduct(rho.matrix().transpose()).sum();
}

} // namespace chiralspin
