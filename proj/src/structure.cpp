#include "oqrw/structure.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <random>

#include "oqrw/spectral.hpp"

namespace oqrw {

namespace {

constexpr double kSplitGap = 1e-6;
constexpr int kSplitAttempts = 10;

std::vector<int> ambient_dims(const WalkModel& walk) {
    std::vector<int> out;
    for (std::size_t i = 0; i < walk.site_count(); ++i) out.push_back(walk.dim(i));
    return out;
}

}  // namespace

BlockSubspace enclosure_of(const WalkModel& walk, std::size_t site, const CVector& x, double tol) {
    if (site >= walk.site_count()) throw StructureError("enclosure_of: site index out of range");
    if (x.size() != walk.dim(site)) throw DimensionError("enclosure_of: vector dimension mismatch");
    if (x.norm() == 0.0) throw PreconditionError("enclosure_of: x must be nonzero");

    std::vector<std::vector<CVector>> bases(walk.site_count());
    std::deque<std::pair<std::size_t, CVector>> work;
    bases[site].push_back(x.normalized());
    work.emplace_back(site, bases[site].back());
    while (!work.empty()) {
        auto [j, v] = std::move(work.front());
        work.pop_front();
        for (std::size_t e : walk.outgoing(j)) {
            const std::size_t i = walk.edge_target(e);
            for (const auto& l : walk.edges()[e].kraus) {
                const CVector y = l * v;
                const CVector cand[] = {y};
                auto ext = orthonormal_extend(bases[i], cand, tol);
                if (ext.size() > bases[i].size()) {
                    bases[i] = std::move(ext);
                    work.emplace_back(i, bases[i].back());
                }
            }
        }
    }
    return BlockSubspace(ambient_dims(walk), std::move(bases));
}

bool is_enclosure(const WalkModel& walk, const BlockSubspace& v, double tol) {
    if (v.site_count() != walk.site_count()) throw DimensionError("is_enclosure: site count mismatch");
    for (std::size_t e = 0; e < walk.edges().size(); ++e) {
        const std::size_t j = walk.edge_source(e), i = walk.edge_target(e);
        for (const auto& l : walk.edges()[e].kraus)
            for (const auto& b : v.basis(j))
                if (v.residual(i, l * b) > tol) return false;
    }
    return true;
}

BlockSubspace recurrent_space(const WalkModel& walk) {
    const auto fp = invariant_states(walk);
    auto sum = BlockState::zeros(walk);
    for (const auto& s : fp.states) sum += s;
    return BlockSubspace::range_of(retag<BlockMatrix>(sum), 1e-8);
}

Restriction restrict_to(const WalkModel& walk, const BlockSubspace& v) {
    if (v.site_count() != walk.site_count()) throw DimensionError("restrict_to: site count mismatch");
    std::vector<SiteSpace> sites;
    std::vector<std::size_t> original;
    std::vector<CMatrix> basis(walk.site_count());
    for (std::size_t i = 0; i < walk.site_count(); ++i) {
        if (v.dim(i) == 0) continue;
        sites.push_back({walk.site_id(i), v.dim(i)});
        original.push_back(i);
        basis[i] = v.basis_matrix(i);
    }
    if (sites.empty()) throw PreconditionError("restrict_to: subspace is zero");
    std::vector<TransitionEdge> edges;
    for (std::size_t e = 0; e < walk.edges().size(); ++e) {
        const std::size_t j = walk.edge_source(e), i = walk.edge_target(e);
        if (v.dim(i) == 0 || v.dim(j) == 0) continue;
        std::vector<CMatrix> kraus;
        for (const auto& l : walk.edges()[e].kraus) {
            CMatrix c = basis[i].adjoint() * l * basis[j];
            if (c.cwiseAbs().maxCoeff() > 1e-14) kraus.push_back(std::move(c));
        }
        if (!kraus.empty()) edges.push_back({walk.site_id(j), walk.site_id(i), std::move(kraus)});
    }
    return Restriction{WalkModel(walk.name() + "|restricted", std::move(sites), std::move(edges)), v,
                       std::move(original)};
}

BlockState lift_state(const WalkModel& walk, const Restriction& r, const BlockState& restricted) {
    if (!restricted.matches(r.walk)) throw DimensionError("lift_state: state does not match the restricted walk");
    auto out = BlockState::zeros(walk);
    for (std::size_t k = 0; k < r.original_site.size(); ++k) {
        const std::size_t i = r.original_site[k];
        const CMatrix b = r.subspace.basis_matrix(i);
        out[i] = b * restricted[k] * b.adjoint();
    }
    return out;
}

BlockState enclosure_state(const WalkModel& walk, const BlockSubspace& enclosure) {
    const auto r = restrict_to(walk, enclosure);
    const auto fp = invariant_states(r.walk);
    if (fp.states.size() != 1) throw PreconditionError("enclosure_state: enclosure is not minimal");
    return lift_state(walk, r, fp.states.front());
}

std::vector<BlockSubspace> Decomposition::enclosures() const {
    std::vector<BlockSubspace> out = singletons;
    for (const auto& f : families) out.insert(out.end(), f.members.begin(), f.members.end());
    return out;
}

namespace {

// Splits `v` (an enclosure inside the recurrent space) into minimal enclosures.
void split_minimal(const WalkModel& walk, const BlockSubspace& v, std::mt19937_64& rng,
                   std::vector<BlockSubspace>& out) {
    const auto r = restrict_to(walk, v);
    const auto algebra = dual_fixed_points(r.walk);
    if (algebra.size() <= 1) {
        out.push_back(v);
        return;
    }
    std::normal_distribution<double> normal;
    for (int attempt = 0; attempt < kSplitAttempts; ++attempt) {
        auto x = BlockObservable::zeros(r.walk);
        for (const auto& h : algebra) x += Complex(normal(rng)) * h;

        struct Eig {
            double value;
            std::size_t site;
            CVector vector;
        };
        std::vector<Eig> all;
        for (std::size_t k = 0; k < r.original_site.size(); ++k) {
            const auto he = eig_hermitian(hermitian_part(x[k]));
            const CMatrix b = v.basis_matrix(r.original_site[k]);
            for (std::size_t m = 0; m < he.values.size(); ++m)
                all.push_back({he.values[m], r.original_site[k], b * he.vectors[m]});
        }
        std::stable_sort(all.begin(), all.end(), [](const Eig& a, const Eig& b) { return a.value < b.value; });
        std::vector<double> values;
        for (const auto& e : all) values.push_back(e.value);
        const auto clusters = cluster_sorted(values, kSplitGap);
        if (clusters.size() < 2) continue;

        for (const auto& [begin, end] : clusters) {
            std::vector<std::vector<CVector>> bases(walk.site_count());
            for (std::size_t m = begin; m < end; ++m) {
                const CVector cand[] = {all[m].vector};
                bases[all[m].site] = orthonormal_extend(bases[all[m].site], cand, 1e-8);
            }
            BlockSubspace piece(v.ambient(), std::move(bases));
            if (!is_enclosure(walk, piece, 1e-7))
                throw DiagnosticError("minimal_enclosures: spectral piece of a fixed point is not an enclosure");
            split_minimal(walk, piece, rng, out);
        }
        return;
    }
    throw NumericError("minimal_enclosures: could not split an enclosure with a " +
                       std::to_string(algebra.size()) + "-dimensional fixed algebra");
}

}  // namespace

Decomposition minimal_enclosures(const WalkModel& walk, std::uint64_t seed) {
    const BlockSubspace recurrent = recurrent_space(walk);
    std::mt19937_64 rng(seed);
    std::vector<BlockSubspace> pieces;
    split_minimal(walk, recurrent, rng, pieces);
    return decomposition_from_enclosures(walk, std::move(pieces));
}

Decomposition decomposition_from_enclosures(const WalkModel& walk, std::vector<BlockSubspace> minimal) {
    Decomposition dec;
    if (minimal.empty()) throw PreconditionError("decomposition_from_enclosures: no enclosures given");
    BlockSubspace covered = BlockSubspace::zero(walk);
    for (std::size_t a = 0; a < minimal.size(); ++a) {
        if (!covered.orthogonal_to(minimal[a], 1e-8))
            throw PreconditionError("decomposition_from_enclosures: enclosures are not mutually orthogonal");
        covered = covered.join(minimal[a]);
    }
    dec.transient = covered.complement();

    std::vector<std::size_t> parent(minimal.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    std::map<std::pair<std::size_t, std::size_t>, BlockMatrix> links;
    for (std::size_t a = 0; a < minimal.size(); ++a)
        for (std::size_t b = a + 1; b < minimal.size(); ++b) {
            if (minimal[a].dim() != minimal[b].dim()) continue;
            if (auto q = link_isometry(walk, minimal[a], minimal[b])) {
                links.emplace(std::make_pair(a, b), std::move(*q));
                parent[find(b)] = find(a);
            }
        }

    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t a = 0; a < minimal.size(); ++a) groups[find(a)].push_back(a);
    for (const auto& [root, members] : groups) {
        if (members.size() == 1) {
            dec.singletons.push_back(minimal[members.front()]);
            continue;
        }
        Family f;
        for (std::size_t a : members) f.members.push_back(minimal[a]);
        for (std::size_t x = 0; x < members.size(); ++x)
            for (std::size_t y = x + 1; y < members.size(); ++y) {
                auto it = links.find({members[x], members[y]});
                if (it != links.end()) {
                    f.isometries.emplace(std::make_pair(x, y), it->second);
                } else if (auto q = link_isometry(walk, minimal[members[x]], minimal[members[y]])) {
                    f.isometries.emplace(std::make_pair(x, y), std::move(*q));
                }
            }
        dec.families.push_back(std::move(f));
    }
    return dec;
}

std::optional<BlockMatrix> link_isometry(const WalkModel& walk, const BlockSubspace& e1, const BlockSubspace& e2) {
    if (!e1.orthogonal_to(e2, 1e-8)) throw PreconditionError("link_isometry: enclosures are not orthogonal");
    for (std::size_t i = 0; i < walk.site_count(); ++i)
        if (e1.dim(i) != e2.dim(i)) return std::nullopt;

    const BlockSubspace both = e1.join(e2);
    const auto r = restrict_to(walk, both);
    const auto fixed = dual_fixed_points(r.walk);

    // Off-diagonal block B2^* X B1 of each fixed point, in enclosure coordinates.
    std::vector<CMatrix> best;
    double best_norm = 0.0;
    for (const auto& x : fixed) {
        std::vector<CMatrix> blocks(walk.site_count());
        double norm = 0.0;
        for (std::size_t k = 0; k < r.original_site.size(); ++k) {
            const std::size_t i = r.original_site[k];
            const CMatrix c = both.basis_matrix(i);
            const CMatrix full = c * x[k] * c.adjoint();
            blocks[i] = e2.basis_matrix(i).adjoint() * full * e1.basis_matrix(i);
            if (blocks[i].size() > 0) norm = std::max(norm, blocks[i].cwiseAbs().maxCoeff());
        }
        if (norm > best_norm) best_norm = norm, best = std::move(blocks);
    }
    if (best_norm <= 1e-8) return std::nullopt;

    auto q = BlockMatrix::zeros(walk);
    for (std::size_t i = 0; i < walk.site_count(); ++i) {
        if (e1.dim(i) == 0) continue;
        q[i] = e2.basis_matrix(i) * polar_unitary(best[i]) * e1.basis_matrix(i).adjoint();
    }
    // Fix the global phase: first entry of largest modulus becomes positive real.
    Complex pivot = 0.0;
    for (const auto& b : q.blocks())
        for (Eigen::Index k = 0; k < b.size(); ++k)
            if (std::abs(b.data()[k]) > std::abs(pivot) + 1e-9) pivot = b.data()[k];
    q *= std::conj(pivot) / std::abs(pivot);

    const BlockMatrix p1 = e1.projector(), p2 = e2.projector();
    if ((q.adjoint() * q - p1).max_abs() > 1e-8 || (q * q.adjoint() - p2).max_abs() > 1e-8)
        throw DiagnosticError("link_isometry: polar factor is not a partial isometry between the enclosures");
    const BlockMatrix s1 = retag<BlockMatrix>(enclosure_state(walk, e1));
    const BlockMatrix s2 = retag<BlockMatrix>(enclosure_state(walk, e2));
    if ((q * s1 * q.adjoint() - s2).max_abs() > 1e-8)
        throw DiagnosticError("link_isometry: isometry does not carry one invariant state to the other");
    return q;
}

bool accessible(const WalkModel& walk, std::size_t from_site, const CVector& from, std::size_t to_site,
                const CVector& to, double tol) {
    if (to_site >= walk.site_count()) throw StructureError("accessible: site index out of range");
    if (to.norm() == 0.0) throw PreconditionError("accessible: target vector must be nonzero");
    const auto enc = enclosure_of(walk, from_site, from, tol);
    return enc.residual(to_site, to.normalized()) <= tol;
}

StructureReport invariant_state_structure(const WalkModel& walk, const Decomposition& dec, const BlockState& rho) {
    if (!rho.matches(walk)) throw DimensionError("invariant_state_structure: state does not match the walk");
    if ((apply(walk, rho) - rho).trace_norm() > 1e-9)
        throw PreconditionError("invariant_state_structure: state is not invariant");

    StructureReport report;
    const BlockMatrix r = retag<BlockMatrix>(rho);
    auto rebuilt = BlockMatrix::zeros(walk);
    auto add_diagonal = [&](const BlockSubspace& e) -> BlockMatrix {
        const BlockMatrix p = e.projector();
        const BlockMatrix sigma = retag<BlockMatrix>(enclosure_state(walk, e));
        const double t = (p * r * p).trace().real();
        report.weights.push_back(t);
        rebuilt += Complex(t) * sigma;
        return sigma;
    };
    for (const auto& e : dec.singletons) add_diagonal(e);
    for (std::size_t fi = 0; fi < dec.families.size(); ++fi) {
        const auto& f = dec.families[fi];
        std::vector<BlockMatrix> sigma;
        for (const auto& m : f.members) sigma.push_back(add_diagonal(m));
        for (const auto& [ab, q] : f.isometries) {
            const auto [a, b] = ab;
            const BlockMatrix shape = sigma[a] * q.adjoint();
            const BlockMatrix block = f.members[a].projector() * r * f.members[b].projector();
            Complex num = 0.0;
            double den = 0.0;
            for (std::size_t i = 0; i < shape.size(); ++i) {
                num += (shape[i].adjoint() * block[i]).trace();
                den += shape[i].squaredNorm();
            }
            const Complex s = den > 0 ? num / den : Complex(0.0);
            report.coherences.push_back({fi, a, b, s});
            rebuilt += s * shape;
            rebuilt += std::conj(s) * shape.adjoint();
        }
    }
    report.residual = (r - rebuilt).trace_norm();
    return report;
}

}  // namespace oqrw
