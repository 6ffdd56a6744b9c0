#pragma once

// Matrix of the channel on vectorized block-diagonal operators and what can
// be read off its spectrum: fixed points, irreducibility, period, cyclic
// resolutions, plus plain iteration and the loop-length diagnostic.

#include <vector>

#include "oqrw/numerics.hpp"
#include "oqrw/subspace.hpp"
#include "oqrw/walk_model.hpp"

namespace oqrw {

/// Block (i, j) of `matrix` is sum_{e in E(j,i)} conj(L_e) (x) L_e, with rows
/// and columns of site i starting at offset[i] (each site uses dim(i)^2 slots).
/// The dual map acts by matrix.adjoint().
struct Superoperator {
    Eigen::Index dim = 0;
    CMatrix matrix;
    std::vector<Eigen::Index> offset;
    std::vector<int> site_dims;
};

Superoperator build_superoperator(const WalkModel& walk);
/// Serial reference for build_superoperator().
Superoperator build_superoperator_serial(const WalkModel& walk);

CVector vectorize(const Superoperator& s, const std::vector<CMatrix>& blocks);
std::vector<CMatrix> unvectorize(const Superoperator& s, const CVector& v);

struct FixedPoints {
    /// Real basis of Hermitian fixed points; it is also a complex basis of Ker(S - Id).
    std::vector<BlockMatrix> hermitian_basis;
    /// Trace-one positive fixed points whose span is the fixed space.
    std::vector<BlockState> states;
};

/// Fixed points of the channel. `tol` is the relative null-space tolerance.
FixedPoints invariant_states(const WalkModel& walk, double tol = kRankTol);

/// Hermitian basis of the fixed space of the dual map (an algebra containing Id).
std::vector<BlockObservable> dual_fixed_points(const WalkModel& walk, double tol = kRankTol);

/// One-dimensional fixed space whose state is faithful on every site.
bool is_irreducible(const WalkModel& walk);

inline constexpr double kPeripheralTol = 1e-8;
inline constexpr double kRootMatchTol = 1e-7;

struct SpectrumReport {
    std::vector<Complex> eigenvalues;
    std::vector<Complex> peripheral;  // sorted by argument in [0, 2pi)
    int period = 1;
    bool simple_one = false;
};

/// Requires an irreducible walk (PreconditionError otherwise). Throws
/// DiagnosticError when the peripheral eigenvalues are not the d-th roots of unity.
SpectrumReport period(const WalkModel& walk, double tol = kPeripheralTol);

struct CyclicResolution {
    std::vector<BlockMatrix> projections;  // P_0 ... P_{d-1}
    std::vector<BlockSubspace> ranges;
    double cyclic_residual = 0.0;  // max_k ||dual(P_k) - P_{k-1}||_max
    double edge_residual = 0.0;    // max ||P_{k,i} L - L P_{k-1,j}||_max over edges
};

/// Projections P_k with dual(P_k) = P_{k-1}. For d >= 2 they are the spectral
/// projections of the (phase-fixed) dual eigen-operator at e^{2 pi i / d}.
/// Labels are rotated so that P_0 carries the most weight on e_1 at site 0.
CyclicResolution cyclic_resolution(const WalkModel& walk, int d);

/// rho, M(rho), ..., M^n(rho).
std::vector<BlockState> evolve(const WalkModel& walk, const BlockState& rho, int n);

/// (1/n) sum_{k<n} M^k(rho); n must be positive.
BlockState cesaro_evolve(const WalkModel& walk, const BlockState& rho, int n);

/// Default max_len for loop_gcd: 2 * sites * max dim.
int default_loop_length(const WalkModel& walk);

/// gcd of the lengths l <= max_len for which some loop pi at `site` of length l
/// has <x, L_pi x> != 0. Loop operators are combined through the span
/// V_l = span{L_pi x}, and a length counts when ||P_{V_l} x|| > tol ||x||.
/// Returns 0 when no length qualifies. max_len <= 0 selects the default.
int loop_gcd(const WalkModel& walk, std::size_t site, const CVector& x, int max_len = 0, double tol = 1e-9);

}  // namespace oqrw
