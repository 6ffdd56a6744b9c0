#include "oqrw/subspace.hpp"

#include <algorithm>

namespace oqrw {

BlockSubspace::BlockSubspace(std::vector<int> ambient, std::vector<std::vector<CVector>> bases)
    : ambient_(std::move(ambient)), bases_(std::move(bases)) {
    if (ambient_.size() != bases_.size()) throw DimensionError("BlockSubspace: site count mismatch");
    for (std::size_t i = 0; i < bases_.size(); ++i) {
        if (static_cast<int>(bases_[i].size()) > ambient_[i])
            throw DimensionError("BlockSubspace: more basis vectors than the site dimension");
        for (const auto& v : bases_[i])
            if (v.size() != ambient_[i]) throw DimensionError("BlockSubspace: basis vector has wrong length");
    }
}

BlockSubspace BlockSubspace::zero(const WalkModel& walk) {
    std::vector<int> ambient;
    for (std::size_t i = 0; i < walk.site_count(); ++i) ambient.push_back(walk.dim(i));
    return BlockSubspace(ambient, std::vector<std::vector<CVector>>(walk.site_count()));
}

BlockSubspace BlockSubspace::full(const WalkModel& walk) {
    auto out = zero(walk);
    for (std::size_t i = 0; i < walk.site_count(); ++i)
        for (int k = 0; k < walk.dim(i); ++k) out.bases_[i].push_back(CVector::Unit(walk.dim(i), k));
    return out;
}

BlockSubspace BlockSubspace::range_of(const BlockMatrix& op, double tol) {
    std::vector<int> ambient;
    std::vector<std::vector<CVector>> bases;
    for (const auto& b : op.blocks()) {
        ambient.push_back(static_cast<int>(b.rows()));
        std::vector<CVector> basis;
        if (b.size() > 0) {
            Eigen::MatrixXcd a = b;
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullU);
            const auto& sv = svd.singularValues();
            for (Eigen::Index k = 0; k < sv.size(); ++k)
                if (sv(0) > 0 && sv(k) > tol * sv(0)) basis.emplace_back(svd.matrixU().col(k));
        }
        bases.push_back(std::move(basis));
    }
    return BlockSubspace(std::move(ambient), std::move(bases));
}

int BlockSubspace::dim() const {
    int d = 0;
    for (const auto& b : bases_) d += static_cast<int>(b.size());
    return d;
}

CMatrix BlockSubspace::basis_matrix(std::size_t site) const {
    CMatrix m(ambient_[site], bases_[site].size());
    for (std::size_t k = 0; k < bases_[site].size(); ++k) m.col(k) = bases_[site][k];
    return m;
}

BlockMatrix BlockSubspace::projector() const {
    std::vector<CMatrix> blocks;
    for (std::size_t i = 0; i < bases_.size(); ++i) {
        const CMatrix b = basis_matrix(i);
        blocks.push_back(b * b.adjoint());
    }
    return BlockMatrix(std::move(blocks));
}

double BlockSubspace::residual(std::size_t site, const CVector& x) const {
    if (x.size() != ambient_[site]) throw DimensionError("BlockSubspace::residual: vector has wrong length");
    CVector r = x;
    for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : bases_[site]) r -= b * b.dot(r);
    return r.norm();
}

void BlockSubspace::check_compatible(const BlockSubspace& other) const {
    if (other.ambient_ != ambient_) throw DimensionError("block subspaces live in different spaces");
}

bool BlockSubspace::contains(const BlockSubspace& other, double tol) const {
    check_compatible(other);
    for (std::size_t i = 0; i < bases_.size(); ++i)
        for (const auto& v : other.bases_[i])
            if (residual(i, v) > tol) return false;
    return true;
}

bool BlockSubspace::orthogonal_to(const BlockSubspace& other, double tol) const {
    check_compatible(other);
    for (std::size_t i = 0; i < bases_.size(); ++i)
        for (const auto& a : bases_[i])
            for (const auto& b : other.bases_[i])
                if (std::abs(a.dot(b)) > tol) return false;
    return true;
}

BlockSubspace BlockSubspace::complement() const {
    std::vector<std::vector<CVector>> out(bases_.size());
    for (std::size_t i = 0; i < bases_.size(); ++i) {
        std::vector<CVector> units;
        for (int k = 0; k < ambient_[i]; ++k) units.emplace_back(CVector::Unit(ambient_[i], k));
        auto ext = orthonormal_extend(bases_[i], units, 1e-8);
        out[i].assign(ext.begin() + static_cast<std::ptrdiff_t>(bases_[i].size()), ext.end());
    }
    return BlockSubspace(ambient_, std::move(out));
}

BlockSubspace BlockSubspace::join(const BlockSubspace& other, double tol) const {
    check_compatible(other);
    std::vector<std::vector<CVector>> out(bases_.size());
    for (std::size_t i = 0; i < bases_.size(); ++i) out[i] = orthonormal_extend(bases_[i], other.bases_[i], tol);
    return BlockSubspace(ambient_, std::move(out));
}

double BlockSubspace::orthonormality_defect() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < bases_.size(); ++i) {
        if (bases_[i].empty()) continue;
        const CMatrix b = basis_matrix(i);
        const CMatrix g = b.adjoint() * b - CMatrix::Identity(b.cols(), b.cols());
        worst = std::max(worst, g.cwiseAbs().maxCoeff());
    }
    return worst;
}

}  // namespace oqrw
