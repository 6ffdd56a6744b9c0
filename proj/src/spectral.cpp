#include "oqrw/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace oqrw {

namespace {

Superoperator empty_superoperator(const WalkModel& walk) {
    Superoperator s;
    for (std::size_t i = 0; i < walk.site_count(); ++i) {
        s.offset.push_back(s.dim);
        s.site_dims.push_back(walk.dim(i));
        s.dim += static_cast<Eigen::Index>(walk.dim(i)) * walk.dim(i);
    }
    s.matrix = CMatrix::Zero(s.dim, s.dim);
    return s;
}

// Adds conj(L) (x) L into the block whose top-left corner is (row, col).
// Kernel of S - lambda Id. The tolerance is measured against the channel
// (norm at least 1), since S - lambda Id itself may be pure rounding noise.
std::vector<CVector> shifted_kernel(const CMatrix& a, double tol) {
    const double scale = operator_norm(a);
    if (scale == 0.0) return null_space(a, tol);
    return null_space(a, tol * std::max(1.0, scale) / scale);
}

void add_kron(CMatrix& m, Eigen::Index row, Eigen::Index col, const CMatrix& l) {
    const Eigen::Index r = l.rows(), c = l.cols();
    for (Eigen::Index ar = 0; ar < r; ++ar)
        for (Eigen::Index ac = 0; ac < c; ++ac) {
            const Complex a = std::conj(l(ar, ac));
            if (a == Complex(0.0)) continue;
            m.block(row + ar * r, col + ac * c, r, c) += a * l;
        }
}

void fill_target_rows(const WalkModel& walk, Superoperator& s, std::size_t i) {
    for (std::size_t e : walk.incoming(i)) {
        const std::size_t j = walk.edge_source(e);
        for (const auto& l : walk.edges()[e].kraus) add_kron(s.matrix, s.offset[i], s.offset[j], l);
    }
}

// Converts a basis of a *-closed space of block operators into a real basis of
// Hermitian elements with the same complex span.
std::vector<BlockMatrix> hermitian_basis(const Superoperator& s, const std::vector<CVector>& span) {
    const std::size_t m = span.size();
    if (m == 0) return {};
    const Eigen::Index n = s.dim;
    Eigen::MatrixXd real(2 * n, 2 * m);
    for (std::size_t k = 0; k < m; ++k) {
        const auto blocks = unvectorize(s, span[k]);
        std::vector<CMatrix> h, a;
        for (const auto& b : blocks) {
            h.push_back(hermitian_part(b));
            a.push_back((b - b.adjoint()) * Complex(0.0, -0.5));
        }
        const CVector vh = vectorize(s, h), va = vectorize(s, a);
        real.col(2 * k) << vh.real(), vh.imag();
        real.col(2 * k + 1) << va.real(), va.imag();
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(real, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (sv(static_cast<Eigen::Index>(m) - 1) <= 1e-6 * sv(0))
        throw NumericError("fixed space is not closed under adjoints within tolerance");
    std::vector<BlockMatrix> out;
    for (std::size_t k = 0; k < m; ++k) {
        const auto col = svd.matrixU().col(static_cast<Eigen::Index>(k));
        CVector v(n);
        for (Eigen::Index r = 0; r < n; ++r) v(r) = Complex(col(r), col(n + r));
        auto blocks = unvectorize(s, v);
        for (auto& b : blocks) b = hermitian_part(b);
        out.emplace_back(std::move(blocks));
    }
    return out;
}

// Positive and negative parts of a block-diagonal Hermitian operator.
std::pair<BlockState, BlockState> jordan_parts(const BlockMatrix& h) {
    double scale = 0.0;
    std::vector<HermitianEigen> eig;
    for (const auto& b : h.blocks()) {
        eig.push_back(eig_hermitian(b));
        for (double v : eig.back().values) scale = std::max(scale, std::abs(v));
    }
    std::vector<CMatrix> pos, neg;
    for (std::size_t i = 0; i < eig.size(); ++i) {
        const auto n = h[i].rows();
        CMatrix p = CMatrix::Zero(n, n), q = CMatrix::Zero(n, n);
        for (std::size_t k = 0; k < eig[i].values.size(); ++k) {
            const double v = eig[i].values[k];
            const CVector& x = eig[i].vectors[k];
            if (v > 1e-10 * scale) p += v * x * x.adjoint();
            if (v < -1e-10 * scale) q -= v * x * x.adjoint();
        }
        pos.push_back(std::move(p));
        neg.push_back(std::move(q));
    }
    return {BlockState(std::move(pos)), BlockState(std::move(neg))};
}

Eigen::VectorXd real_coordinates(const Superoperator& s, const std::vector<CMatrix>& blocks) {
    const CVector v = vectorize(s, blocks);
    Eigen::VectorXd out(2 * v.size());
    out << v.real(), v.imag();
    return out;
}

}  // namespace

Superoperator build_superoperator(const WalkModel& walk) {
    Superoperator s = empty_superoperator(walk);
    const auto n = static_cast<std::ptrdiff_t>(walk.site_count());
#pragma omp parallel for schedule(dynamic) if (n > 8)
    for (std::ptrdiff_t i = 0; i < n; ++i) fill_target_rows(walk, s, static_cast<std::size_t>(i));
    return s;
}

Superoperator build_superoperator_serial(const WalkModel& walk) {
    Superoperator s = empty_superoperator(walk);
    for (std::size_t i = 0; i < walk.site_count(); ++i) fill_target_rows(walk, s, i);
    return s;
}

CVector vectorize(const Superoperator& s, const std::vector<CMatrix>& blocks) {
    if (blocks.size() != s.site_dims.size()) throw DimensionError("vectorize: site count mismatch");
    CVector out(s.dim);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const int d = s.site_dims[i];
        if (blocks[i].rows() != d || blocks[i].cols() != d) throw DimensionError("vectorize: block shape mismatch");
        out.segment(s.offset[i], static_cast<Eigen::Index>(d) * d) = vec(blocks[i]);
    }
    return out;
}

std::vector<CMatrix> unvectorize(const Superoperator& s, const CVector& v) {
    if (v.size() != s.dim) throw DimensionError("unvectorize: length mismatch");
    std::vector<CMatrix> out;
    for (std::size_t i = 0; i < s.site_dims.size(); ++i) {
        const int d = s.site_dims[i];
        out.push_back(unvec(v.segment(s.offset[i], static_cast<Eigen::Index>(d) * d), d, d));
    }
    return out;
}

FixedPoints invariant_states(const WalkModel& walk, double tol) {
    const Superoperator s = build_superoperator(walk);
    const CMatrix a = s.matrix - CMatrix::Identity(s.dim, s.dim);
    const auto kernel = shifted_kernel(a, tol);
    if (kernel.empty()) throw NumericError("channel has no fixed point within tolerance");

    FixedPoints out;
    out.hermitian_basis = hermitian_basis(s, kernel);

    // Every Hermitian fixed point splits into fixed positive and negative
    // parts; keep a linearly independent subset of the normalized parts.
    std::vector<Eigen::VectorXd> kept;
    for (const auto& h : out.hermitian_basis) {
        auto [pos, neg] = jordan_parts(h);
        for (BlockState* part : {&pos, &neg}) {
            const double t = part->trace().real();
            if (t <= 1e-9) continue;
            *part *= Complex(1.0 / t);
            Eigen::VectorXd r = real_coordinates(s, part->blocks());
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& q : kept) r -= q * q.dot(r);
            if (r.norm() <= 1e-6 * real_coordinates(s, part->blocks()).norm()) continue;
            kept.push_back(r.normalized());
            out.states.push_back(*part);
        }
        if (out.states.size() == out.hermitian_basis.size()) break;
    }
    return out;
}

std::vector<BlockObservable> dual_fixed_points(const WalkModel& walk, double tol) {
    const Superoperator s = build_superoperator(walk);
    const CMatrix a = s.matrix.adjoint() - CMatrix::Identity(s.dim, s.dim);
    std::vector<BlockObservable> out;
    for (auto& h : hermitian_basis(s, shifted_kernel(a, tol))) out.push_back(retag<BlockObservable>(h));
    return out;
}

bool is_irreducible(const WalkModel& walk) {
    const auto fp = invariant_states(walk);
    if (fp.hermitian_basis.size() != 1 || fp.states.size() != 1) return false;
    const auto& rho = fp.states.front();
    double largest = 0.0;
    for (const auto& b : rho.blocks()) largest = std::max(largest, operator_norm(b));
    return min_block_eigenvalue(rho) > kRankTol * largest;
}

SpectrumReport period(const WalkModel& walk, double tol) {
    if (!is_irreducible(walk)) throw PreconditionError("period: walk is not irreducible");
    const Superoperator s = build_superoperator(walk);
    SpectrumReport report;
    report.eigenvalues = eigenvalues(s.matrix);

    std::vector<Complex> peripheral;
    int ones = 0;
    for (const Complex& z : report.eigenvalues) {
        if (std::abs(std::abs(z) - 1.0) <= tol) peripheral.push_back(z);
        if (std::abs(z - 1.0) <= kRootMatchTol) ++ones;
    }
    report.simple_one = ones == 1;
    const int d = static_cast<int>(peripheral.size());
    if (d == 0) throw DiagnosticError("period: no eigenvalue on the unit circle");

    std::vector<bool> used(peripheral.size(), false);
    for (int k = 0; k < d; ++k) {
        const Complex root = std::polar(1.0, 2.0 * std::numbers::pi * k / d);
        std::size_t best = peripheral.size();
        double dist = INFINITY;
        for (std::size_t m = 0; m < peripheral.size(); ++m) {
            if (used[m]) continue;
            const double e = std::abs(peripheral[m] - root);
            if (e < dist) dist = e, best = m;
        }
        if (dist > kRootMatchTol) {
            throw DiagnosticError("period: peripheral eigenvalues are not the " + std::to_string(d) +
                                  "-th roots of unity (distance " + std::to_string(dist) + ")");
        }
        used[best] = true;
        report.peripheral.push_back(peripheral[best]);
    }
    report.period = d;
    return report;
}

CyclicResolution cyclic_resolution(const WalkModel& walk, int d) {
    if (d < 1) throw PreconditionError("cyclic_resolution: period must be positive");
    CyclicResolution out;
    const std::size_t n = walk.site_count();

    if (d == 1) {
        out.projections.push_back(BlockMatrix::identity(walk));
    } else {
        if (!is_irreducible(walk)) throw PreconditionError("cyclic_resolution: walk is not irreducible");
        const Superoperator s = build_superoperator(walk);
        const Complex lambda = std::polar(1.0, 2.0 * std::numbers::pi / d);
        const CMatrix a = s.matrix.adjoint() - lambda * CMatrix::Identity(s.dim, s.dim);
        const auto kernel = shifted_kernel(a, kRankTol);
        if (kernel.empty())
            throw PreconditionError("cyclic_resolution: e^{2 pi i/" + std::to_string(d) + "} is not an eigenvalue");
        if (kernel.size() > 1) throw DiagnosticError("cyclic_resolution: peripheral eigenvalue is not simple");

        std::vector<CMatrix> w = unvectorize(s, kernel.front());
        for (auto& b : w) {
            const auto sv = singular_values(b);
            if (sv.back() <= 1e-6 * sv.front())
                throw DiagnosticError("cyclic_resolution: eigen-operator is not invertible within tolerance");
            b = polar_unitary(b);
        }
        // The eigen-operator is fixed up to a phase; make W^d = Id.
        Complex tr_power = 0.0;
        for (const auto& b : w) {
            CMatrix p = CMatrix::Identity(b.rows(), b.cols());
            for (int m = 0; m < d; ++m) p = (p * b).eval();
            tr_power += p.trace();
        }
        const Complex unphase = std::polar(1.0, -std::arg(tr_power) / d);
        for (auto& b : w) b *= unphase;

        std::vector<std::vector<CMatrix>> proj(d);
        for (std::size_t i = 0; i < n; ++i) {
            const auto dim = w[i].rows();
            std::vector<CMatrix> powers{CMatrix::Identity(dim, dim)};
            for (int m = 1; m < d; ++m) powers.push_back(powers.back() * w[i]);
            for (int k = 0; k < d; ++k) {
                CMatrix p = CMatrix::Zero(dim, dim);
                for (int m = 0; m < d; ++m) p += std::polar(1.0, -2.0 * std::numbers::pi * k * m / d) * powers[m];
                proj[k].push_back(hermitian_part(p / static_cast<double>(d)));
            }
        }
        int first = 0;
        for (int k = 1; k < d; ++k)
            if (proj[k][0](0, 0).real() > proj[first][0](0, 0).real() + 1e-12) first = k;
        for (int k = 0; k < d; ++k) out.projections.emplace_back(proj[(k + first) % d]);
    }

    // Checks: resolution of identity, orthogonal projections, cyclic relation, edge relation.
    auto sum = BlockMatrix::zeros(walk);
    for (const auto& p : out.projections) sum += p;
    if ((sum - BlockMatrix::identity(walk)).max_abs() > 1e-9)
        throw DiagnosticError("cyclic_resolution: projections do not sum to the identity");
    for (int k = 0; k < d; ++k)
        for (int m = 0; m < d; ++m) {
            const auto prod = out.projections[k] * out.projections[m];
            const double err = k == m ? (prod - out.projections[k]).max_abs() : prod.max_abs();
            if (err > 1e-9) throw DiagnosticError("cyclic_resolution: projections are not mutually orthogonal");
        }
    for (int k = 0; k < d; ++k) {
        const auto& prev = out.projections[(k + d - 1) % d];
        const auto image = apply_dual(walk, retag<BlockObservable>(out.projections[k]));
        out.cyclic_residual = std::max(out.cyclic_residual, (retag<BlockMatrix>(image) - prev).max_abs());
        for (std::size_t e = 0; e < walk.edges().size(); ++e) {
            const std::size_t i = walk.edge_target(e), j = walk.edge_source(e);
            for (const auto& l : walk.edges()[e].kraus) {
                const CMatrix diff = out.projections[k][i] * l - l * prev[j];
                if (diff.size() > 0) out.edge_residual = std::max(out.edge_residual, diff.cwiseAbs().maxCoeff());
            }
        }
    }
    if (out.cyclic_residual > 1e-8) throw DiagnosticError("cyclic_resolution: dual(P_k) != P_{k-1}");
    if (out.edge_residual > 1e-8) throw DiagnosticError("cyclic_resolution: P_{k,i} L != L P_{k-1,j} on some edge");
    for (const auto& p : out.projections) out.ranges.push_back(BlockSubspace::range_of(p, 0.5));
    return out;
}

std::vector<BlockState> evolve(const WalkModel& walk, const BlockState& rho, int n) {
    if (n < 0) throw PreconditionError("evolve: negative step count");
    if (!rho.matches(walk)) throw DimensionError("evolve: state blocks do not match site dimensions");
    std::vector<BlockState> out{rho};
    out.reserve(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k < n; ++k) out.push_back(apply(walk, out.back()));
    return out;
}

BlockState cesaro_evolve(const WalkModel& walk, const BlockState& rho, int n) {
    if (n <= 0) throw PreconditionError("cesaro_evolve: n must be positive");
    if (!rho.matches(walk)) throw DimensionError("cesaro_evolve: state blocks do not match site dimensions");
    BlockState current = rho, sum = rho;
    for (int k = 1; k < n; ++k) {
        current = apply(walk, current);
        sum += current;
    }
    sum *= Complex(1.0 / n);
    return sum;
}

int default_loop_length(const WalkModel& walk) {
    return 2 * static_cast<int>(walk.site_count()) * walk.max_dim();
}

int loop_gcd(const WalkModel& walk, std::size_t site, const CVector& x, int max_len, double tol) {
    if (site >= walk.site_count()) throw StructureError("loop_gcd: site index out of range");
    if (x.size() != walk.dim(site)) throw DimensionError("loop_gcd: vector dimension mismatch");
    const double norm = x.norm();
    if (norm == 0.0) throw PreconditionError("loop_gcd: x must be nonzero");
    if (max_len <= 0) max_len = default_loop_length(walk);
    const CVector unit = x / norm;

    // reach[k] spans { L_pi x : pi a path of the current length from site to k }.
    std::vector<std::vector<CVector>> reach(walk.site_count());
    reach[site].push_back(unit);
    int g = 0;
    for (int len = 1; len <= max_len; ++len) {
        std::vector<std::vector<CVector>> next(walk.site_count());
        for (std::size_t k = 0; k < walk.site_count(); ++k) {
            std::vector<CVector> images;
            for (std::size_t e : walk.incoming(k))
                for (const auto& v : reach[walk.edge_source(e)])
                    for (const auto& l : walk.edges()[e].kraus) images.push_back(l * v);
            next[k] = orthonormal_extend({}, images, 1e-12);
        }
        reach = std::move(next);
        double overlap = 0.0;
        for (const auto& b : reach[site]) overlap += std::norm(b.dot(unit));
        if (std::sqrt(overlap) > tol) {
            g = std::gcd(g, len);
            if (g == 1) break;
        }
    }
    return g;
}

}  // namespace oqrw
