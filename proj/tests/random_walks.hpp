#pragma once

// Seeded random stochastic walks for property tests.
//
// Kraus operators leaving a site j are the row blocks of one isometry
// (sum_t dim_t) x dim(j), so sum L^*L = Id holds to rounding by construction.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oqrw/walk_model.hpp"

namespace testutil {

using oqrw::CMatrix;
using oqrw::Complex;
using oqrw::CVector;
using Dense = Eigen::MatrixXcd;

inline Dense gaussian(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> n;
    Dense m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = Complex(n(rng), n(rng));
    return m;
}

inline CVector random_vector(std::mt19937_64& rng, int dim) { return gaussian(rng, dim, 1).col(0); }

/// Haar-ish unitary from the QR factor of a Gaussian matrix.
inline Dense random_unitary(std::mt19937_64& rng, int dim) {
    Eigen::HouseholderQR<Dense> qr(gaussian(rng, dim, dim));
    return qr.householderQ() * Dense::Identity(dim, dim);
}

/// Orthonormal columns spanning the columns of m (full column rank assumed).
inline Dense isometry_from(const Dense& m) {
    Eigen::HouseholderQR<Dense> qr(m);
    return qr.householderQ() * Dense::Identity(m.rows(), m.cols());
}

/// Random trace-one positive block state.
inline oqrw::BlockState random_state(std::mt19937_64& rng, const oqrw::WalkModel& w) {
    auto rho = oqrw::BlockState::zeros(w);
    double total = 0.0;
    for (std::size_t i = 0; i < w.site_count(); ++i) {
        const Dense g = gaussian(rng, w.dim(i), w.dim(i));
        rho[i] = g * g.adjoint();
        total += rho[i].trace().real();
    }
    rho *= Complex(1.0 / total);
    return rho;
}

/// Random Hermitian block observable.
inline oqrw::BlockObservable random_observable(std::mt19937_64& rng, const oqrw::WalkModel& w) {
    auto x = oqrw::BlockObservable::zeros(w);
    for (std::size_t i = 0; i < w.site_count(); ++i) {
        const Dense g = gaussian(rng, w.dim(i), w.dim(i));
        x[i] = g + g.adjoint();
    }
    return x;
}

enum class Shape {
    dense,     // every ordered pair is an edge, some with two Kraus operators
    sparse,    // random out-neighbourhoods; graph may be reducible
    embedded,  // a proper invariant block subspace hidden by random unitaries
};

struct RandomWalkSpec {
    int min_sites = 2, max_sites = 4;
    int max_dim = 3;
    Shape shape = Shape::dense;
};

namespace detail {

inline std::string label(int i) { return "s" + std::to_string(i); }

// Kraus operators (in list order: target, then operator) cut from the rows of an isometry.
struct Outgoing {
    std::vector<int> targets;
    std::vector<int> copies;  // Kraus operators per target
};

inline std::vector<oqrw::TransitionEdge> cut(const std::vector<int>& dims, int source, const Outgoing& out,
                                             const Dense& iso) {
    std::vector<oqrw::TransitionEdge> edges;
    int row = 0;
    for (std::size_t k = 0; k < out.targets.size(); ++k) {
        oqrw::TransitionEdge e{label(source), label(out.targets[k]), {}};
        for (int c = 0; c < out.copies[k]; ++c) {
            e.kraus.emplace_back(iso.block(row, 0, dims[out.targets[k]], dims[source]));
            row += dims[out.targets[k]];
        }
        edges.push_back(std::move(e));
    }
    return edges;
}

}  // namespace detail

inline oqrw::WalkModel random_walk(std::mt19937_64& rng, const RandomWalkSpec& spec = {}) {
    std::uniform_int_distribution<int> site_count(spec.min_sites, spec.max_sites);
    std::uniform_int_distribution<int> dim_dist(1, spec.max_dim);
    std::bernoulli_distribution coin(0.5);
    const int n = site_count(rng);

    std::vector<int> dims(n);
    for (auto& d : dims) d = dim_dist(rng);
    if (spec.shape == Shape::embedded && *std::max_element(dims.begin(), dims.end()) < 2) dims[0] = 2;

    std::vector<oqrw::SiteSpace> sites;
    for (int i = 0; i < n; ++i) sites.push_back({detail::label(i), dims[i]});

    // Invariant part: k[i] leading coordinates of the rotated basis at site i.
    std::vector<int> k(n, 0);
    std::vector<Dense> u(n);
    if (spec.shape == Shape::embedded) {
        for (int i = 0; i < n; ++i) {
            k[i] = dims[i] >= 2 ? std::uniform_int_distribution<int>(1, dims[i] - 1)(rng) : (coin(rng) ? 1 : 0);
            u[i] = random_unitary(rng, dims[i]);
        }
        if (std::all_of(k.begin(), k.end(), [](int v) { return v == 0; })) k[0] = 1;
    }

    std::vector<oqrw::TransitionEdge> edges;
    for (int j = 0; j < n; ++j) {
        detail::Outgoing out;
        for (int i = 0; i < n; ++i) {
            const bool take = spec.shape != Shape::sparse || coin(rng);
            if (!take) continue;
            out.targets.push_back(i);
            out.copies.push_back(spec.shape == Shape::dense && coin(rng) ? 2 : 1);
        }
        if (out.targets.empty()) {
            out.targets.push_back(std::uniform_int_distribution<int>(0, n - 1)(rng));
            out.copies.push_back(1);
        }
        auto rows = [&] {
            int r = 0;
            for (std::size_t t = 0; t < out.targets.size(); ++t) r += dims[out.targets[t]] * out.copies[t];
            return r;
        };
        auto invariant_rows = [&] {
            int r = 0;
            for (std::size_t t = 0; t < out.targets.size(); ++t) r += k[out.targets[t]] * out.copies[t];
            return r;
        };
        if (spec.shape == Shape::embedded && k[j] > 0 && invariant_rows() == 0) {
            out.targets.push_back(j);  // j is not a target yet, otherwise the capacity would be positive
            out.copies.push_back(1);
        }
        // Extra copies until the stacked operator can be an isometry (and,
        // when embedding, until the invariant part fits in invariant rows).
        while (rows() < dims[j] || (spec.shape == Shape::embedded && invariant_rows() < k[j])) {
            const int t = std::uniform_int_distribution<int>(0, static_cast<int>(out.targets.size()) - 1)(rng);
            if (spec.shape == Shape::embedded && k[out.targets[t]] == 0 && invariant_rows() < k[j]) continue;
            ++out.copies[t];
        }

        Dense iso;
        if (spec.shape != Shape::embedded) {
            iso = isometry_from(gaussian(rng, rows(), dims[j]));
        } else {
            // Columns 0..k[j]-1 live in invariant rows; the rest are completed
            // orthogonally over all rows.
            std::vector<int> inv_rows;
            int row = 0;
            for (std::size_t t = 0; t < out.targets.size(); ++t)
                for (int c = 0; c < out.copies[t]; ++c) {
                    for (int r = 0; r < k[out.targets[t]]; ++r) inv_rows.push_back(row + r);
                    row += dims[out.targets[t]];
                }
            Dense m = Dense::Zero(rows(), dims[j]);
            if (k[j] > 0) {
                const Dense part = isometry_from(gaussian(rng, static_cast<int>(inv_rows.size()), k[j]));
                for (std::size_t r = 0; r < inv_rows.size(); ++r) m.row(inv_rows[r]).head(k[j]) = part.row(r);
            }
            for (int c = k[j]; c < dims[j]; ++c) {
                CVector v = gaussian(rng, rows(), 1).col(0);
                for (int pass = 0; pass < 2; ++pass)
                    for (int p = 0; p < c; ++p) v -= m.col(p) * m.col(p).dot(v);
                m.col(c) = v / v.norm();
            }
            // Back to the original bases: L = U_i L' U_j^*, block by block.
            iso = m;
            row = 0;
            for (std::size_t t = 0; t < out.targets.size(); ++t)
                for (int c = 0; c < out.copies[t]; ++c) {
                    const int ti = out.targets[t];
                    iso.block(row, 0, dims[ti], dims[j]) = u[ti] * m.block(row, 0, dims[ti], dims[j]) * u[j].adjoint();
                    row += dims[ti];
                }
        }
        auto cut = detail::cut(dims, j, out, iso);
        edges.insert(edges.end(), cut.begin(), cut.end());
    }
    return oqrw::WalkModel("random", std::move(sites), std::move(edges));
}

}  // namespace testutil
