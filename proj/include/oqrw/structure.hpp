#pragma once

// Enclosures (invariant block subspaces), the recurrent/transient split and
// the decomposition of the recurrent space into minimal enclosures.

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "oqrw/subspace.hpp"
#include "oqrw/walk_model.hpp"

namespace oqrw {

/// Smallest enclosure containing x at `site`. Vectors whose residual against
/// the current basis is below tol are treated as already contained.
BlockSubspace enclosure_of(const WalkModel& walk, std::size_t site, const CVector& x, double tol = 1e-9);

/// L V_j is inside V_i for every edge j -> i, up to tol per unit basis vector.
bool is_enclosure(const WalkModel& walk, const BlockSubspace& v, double tol = 1e-9);

/// Sum of the supports of all invariant states.
BlockSubspace recurrent_space(const WalkModel& walk);

/// The walk compressed to an enclosure: sites with V_i = {0} are dropped and
/// each Kraus operator becomes B_i^* L B_j in the per-site bases B of V.
struct Restriction {
    WalkModel walk;
    BlockSubspace subspace;
    std::vector<std::size_t> original_site;  // restricted site -> site of the full walk
};

Restriction restrict_to(const WalkModel& walk, const BlockSubspace& v);

/// B rho B^* placed back in the full walk.
BlockState lift_state(const WalkModel& walk, const Restriction& r, const BlockState& restricted);

/// The unique invariant state supported by a minimal enclosure.
/// Throws PreconditionError when the restricted walk has more than one.
BlockState enclosure_state(const WalkModel& walk, const BlockSubspace& enclosure);

struct Family {
    std::vector<BlockSubspace> members;
    /// (a, b) with a < b -> partial isometry Q with Q^*Q = P_a and QQ^* = P_b.
    std::map<std::pair<std::size_t, std::size_t>, BlockMatrix> isometries;
};

struct Decomposition {
    BlockSubspace transient;
    std::vector<BlockSubspace> singletons;
    std::vector<Family> families;

    /// Singletons first, then family members in order.
    std::vector<BlockSubspace> enclosures() const;
};

/// Splits the recurrent space along spectral projections of random Hermitian
/// dual fixed points until every piece has a one-dimensional fixed space, then
/// groups the pieces by isometric equivalence.
Decomposition minimal_enclosures(const WalkModel& walk, std::uint64_t seed = 0x5eed);

/// Groups a given list of mutually orthogonal minimal enclosures (covering the
/// recurrent space) into singletons and families.
Decomposition decomposition_from_enclosures(const WalkModel& walk, std::vector<BlockSubspace> minimal);

/// Partial isometry from e1 to e2 built from an off-diagonal dual fixed point, if one exists.
std::optional<BlockMatrix> link_isometry(const WalkModel& walk, const BlockSubspace& e1, const BlockSubspace& e2);

/// `to` lies in the enclosure generated by `from`.
bool accessible(const WalkModel& walk, std::size_t from_site, const CVector& from, std::size_t to_site,
                const CVector& to, double tol = 1e-9);

struct Coherence {
    std::size_t family = 0;
    std::size_t a = 0, b = 0;  // member indices, a < b
    Complex s;                 // rho restricted to (a, b) equals s * sigma_a * Q^*
};

struct StructureReport {
    std::vector<double> weights;  // per enclosure, ordered as Decomposition::enclosures()
    std::vector<Coherence> coherences;
    double residual = 0.0;        // trace norm of rho minus the reconstruction
};

/// Expresses an invariant state through the decomposition. Throws
/// PreconditionError when ||M(rho) - rho||_1 > 1e-9.
StructureReport invariant_state_structure(const WalkModel& walk, const Decomposition& dec, const BlockState& rho);

}  // namespace oqrw
