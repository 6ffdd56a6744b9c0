#include "oqrw/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oqrw/errors.hpp"

namespace oqrw {

namespace {

using DynMatrix = Eigen::MatrixXcd;

void require_square(const CMatrix& m, const char* what) {
    if (m.rows() != m.cols()) {
        throw DimensionError(std::string(what) + ": matrix is " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + ", expected square");
    }
}

}  // namespace

std::vector<CVector> orthonormal_extend(std::span<const CVector> basis,
                                        std::span<const CVector> candidates, double tol) {
    std::vector<CVector> out(basis.begin(), basis.end());
    Eigen::Index dim = -1;
    for (const auto& v : out) {
        if (dim >= 0 && v.size() != dim) throw DimensionError("orthonormal_extend: basis dimension mismatch");
        dim = v.size();
    }
    for (const auto& c : candidates) {
        if (dim >= 0 && c.size() != dim) throw DimensionError("orthonormal_extend: candidate dimension mismatch");
        dim = c.size();
        CVector r = c;
        // Two passes of classical Gram-Schmidt ("twice is enough").
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& b : out) r -= b * b.dot(r);
        }
        const double norm = r.norm();
        if (!(norm >= tol) || norm == 0.0) continue;
        out.push_back(r / norm);
    }
    return out;
}

EigenPairs eig_general(const CMatrix& m) {
    require_square(m, "eig_general");
    if (m.rows() > kMaxEigenDim) throw DimensionError("eig_general: dimension exceeds 4096");
    EigenPairs out;
    if (m.rows() == 0) return out;

    const DynMatrix a = m;
    Eigen::ComplexEigenSolver<DynMatrix> solver(a, true);
    if (solver.info() != Eigen::Success) throw NumericError("eig_general: Schur iteration did not converge");

    const auto& vals = solver.eigenvalues();
    const auto& vecs = solver.eigenvectors();
    const double scale = std::max(operator_norm(m), 1e-300);
    for (Eigen::Index k = 0; k < a.rows(); ++k) {
        CVector v = vecs.col(k);
        const double n = v.norm();
        if (n > 0) v /= n;
        const double res = (a * v - vals(k) * v).norm();
        out.max_residual = std::max(out.max_residual, res);
        out.values.push_back(vals(k));
        out.vectors.push_back(std::move(v));
    }
    if (!(out.max_residual <= 1e-9 * scale)) {
        throw NumericError("eig_general: eigenpair residual " + std::to_string(out.max_residual) +
                           " exceeds 1e-9*||m||");
    }
    Eigen::JacobiSVD<DynMatrix> svd(vecs);
    const auto& sv = svd.singularValues();
    out.defective = sv(sv.size() - 1) < 1e-8 * sv(0);
    return out;
}

std::vector<Complex> eigenvalues(const CMatrix& m) {
    require_square(m, "eigenvalues");
    if (m.rows() > kMaxEigenDim) throw DimensionError("eigenvalues: dimension exceeds 4096");
    if (m.rows() == 0) return {};
    const DynMatrix a = m;
    Eigen::ComplexEigenSolver<DynMatrix> solver(a, false);
    if (solver.info() != Eigen::Success) throw NumericError("eigenvalues: Schur iteration did not converge");
    const auto& vals = solver.eigenvalues();
    return {vals.data(), vals.data() + vals.size()};
}

HermitianEigen eig_hermitian(const CMatrix& m) {
    require_square(m, "eig_hermitian");
    const double scale = operator_norm(m);
    if (hermiticity_defect(m) > 1e-10 * std::max(scale, 1.0)) {
        throw DimensionError("eig_hermitian: input is not Hermitian");
    }
    HermitianEigen out;
    if (m.rows() == 0) return out;
    const DynMatrix a = hermitian_part(m);
    Eigen::SelfAdjointEigenSolver<DynMatrix> solver(a);
    if (solver.info() != Eigen::Success) throw NumericError("eig_hermitian: solver did not converge");
    for (Eigen::Index k = 0; k < a.rows(); ++k) {
        out.values.push_back(solver.eigenvalues()(k));
        out.vectors.emplace_back(solver.eigenvectors().col(k));
    }
    return out;
}

std::vector<CVector> null_space(const CMatrix& m, double tol) {
    const Eigen::Index cols = m.cols();
    std::vector<CVector> out;
    if (cols == 0) return out;
    if (m.rows() == 0) {
        for (Eigen::Index k = 0; k < cols; ++k) out.emplace_back(CVector::Unit(cols, k));
        return out;
    }
    const DynMatrix a = m;
    Eigen::BDCSVD<DynMatrix> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double threshold = tol * sv(0);
    const DynMatrix& v = svd.matrixV();
    for (Eigen::Index k = 0; k < cols; ++k) {
        if (k >= sv.size() || sv(k) <= threshold) out.emplace_back(v.col(k));
    }
    return out;
}

std::vector<double> singular_values(const CMatrix& m) {
    if (m.size() == 0) return {};
    const DynMatrix a = m;
    Eigen::BDCSVD<DynMatrix> svd(a);
    const auto& sv = svd.singularValues();
    return {sv.data(), sv.data() + sv.size()};
}

double trace_norm(const CMatrix& m) {
    const auto sv = singular_values(m);
    double s = 0.0;
    for (double x : sv) s += x;
    return s;
}

double operator_norm(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    const auto sv = singular_values(m);
    return sv.front();
}

CMatrix polar_unitary(const CMatrix& m) {
    require_square(m, "polar_unitary");
    if (m.size() == 0) return m;
    const DynMatrix a = m;
    Eigen::JacobiSVD<DynMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

CVector vec(const CMatrix& m) {
    CVector out(m.size());
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) out(r + c * m.rows()) = m(r, c);
    return out;
}

CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols) {
    if (v.size() != rows * cols) throw DimensionError("unvec: size mismatch");
    CMatrix out(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = v(r + c * rows);
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> cluster_sorted(std::span<const double> sorted, double gap) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t begin = 0;
    for (std::size_t k = 1; k <= sorted.size(); ++k) {
        if (k == sorted.size() || sorted[k] - sorted[k - 1] > gap) {
            if (k > begin) out.emplace_back(begin, k);
            begin = k;
        }
    }
    return out;
}

double hermiticity_defect(const CMatrix& m) {
    if (m.rows() != m.cols()) return INFINITY;
    if (m.size() == 0) return 0.0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

CMatrix hermitian_part(const CMatrix& m) { return (m + m.adjoint()) * 0.5; }

}  // namespace oqrw
