#pragma once

// Block subspaces V = (+)_i V_i with V_i a subspace of h_i, stored as
// per-site orthonormal bases. Used for enclosures, the recurrent/transient
// split and the ranges of cyclic projections.

#include <vector>

#include "oqrw/numerics.hpp"
#include "oqrw/walk_model.hpp"

namespace oqrw {

class BlockSubspace {
public:
    BlockSubspace() = default;

    /// `bases[i]` must be orthonormal vectors of length `ambient[i]`.
    BlockSubspace(std::vector<int> ambient, std::vector<std::vector<CVector>> bases);

    static BlockSubspace zero(const WalkModel& walk);
    static BlockSubspace full(const WalkModel& walk);

    /// Range of every block of `op` (singular values above tol * max singular value of that block).
    static BlockSubspace range_of(const BlockMatrix& op, double tol = kRankTol);

    std::size_t site_count() const { return bases_.size(); }
    int ambient_dim(std::size_t site) const { return ambient_[site]; }
    const std::vector<int>& ambient() const { return ambient_; }
    const std::vector<CVector>& basis(std::size_t site) const { return bases_[site]; }
    const std::vector<std::vector<CVector>>& bases() const { return bases_; }

    int dim() const;
    int dim(std::size_t site) const { return static_cast<int>(bases_[site].size()); }
    bool empty() const { return dim() == 0; }

    /// ambient x dim(site) matrix whose columns are the basis vectors.
    CMatrix basis_matrix(std::size_t site) const;

    /// Orthogonal projector onto V, one block per site.
    BlockMatrix projector() const;

    /// ||x - P_i x|| for x in h_site.
    double residual(std::size_t site, const CVector& x) const;

    /// Every basis vector of `other` lies in this subspace within tol.
    bool contains(const BlockSubspace& other, double tol = 1e-9) const;

    bool orthogonal_to(const BlockSubspace& other, double tol = 1e-9) const;

    /// Per-site orthogonal complement.
    BlockSubspace complement() const;

    /// Sum V + W.
    BlockSubspace join(const BlockSubspace& other, double tol = kRankTol) const;

    /// max_i ||B_i^* B_i - Id||_max; zero for an exactly orthonormal basis.
    double orthonormality_defect() const;

private:
    void check_compatible(const BlockSubspace& other) const;

    std::vector<int> ambient_;
    std::vector<std::vector<CVector>> bases_;
};

}  // namespace oqrw
