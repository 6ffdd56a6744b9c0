#include "oqrw/walk_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace oqrw {

WalkModel::WalkModel(std::string name, std::vector<SiteSpace> sites, std::vector<TransitionEdge> edges)
    : name_(std::move(name)), sites_(std::move(sites)), edges_(std::move(edges)) {
    for (std::size_t i = 0; i < sites_.size(); ++i) {
        const auto& s = sites_[i];
        if (s.dim < 1) throw StructureError("site '" + s.id + "' has dimension " + std::to_string(s.dim));
        if (!index_.emplace(s.id, i).second) throw StructureError("duplicate site id '" + s.id + "'");
        total_dim_ += s.dim;
    }
    outgoing_.resize(sites_.size());
    incoming_.resize(sites_.size());
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const auto& edge = edges_[e];
        const std::string where = "edge " + edge.from + "->" + edge.to;
        auto from = find_site(edge.from);
        if (!from) throw StructureError(where + ": unknown site '" + edge.from + "'");
        auto to = find_site(edge.to);
        if (!to) throw StructureError(where + ": unknown site '" + edge.to + "'");
        if (!seen.emplace(*from, *to).second) throw StructureError(where + ": duplicate edge");
        if (edge.kraus.empty()) throw StructureError(where + ": empty Kraus list");
        for (std::size_t k = 0; k < edge.kraus.size(); ++k) {
            const auto& m = edge.kraus[k];
            if (m.rows() != sites_[*to].dim || m.cols() != sites_[*from].dim) {
                throw StructureError(where + ": Kraus operator " + std::to_string(k) + " is " +
                                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", expected " +
                                     std::to_string(sites_[*to].dim) + "x" + std::to_string(sites_[*from].dim));
            }
            if (!m.allFinite()) throw StructureError(where + ": non-finite Kraus entry");
        }
        source_.push_back(*from);
        target_.push_back(*to);
        outgoing_[*from].push_back(e);
        incoming_[*to].push_back(e);
    }
}

int WalkModel::max_dim() const {
    int m = 0;
    for (const auto& s : sites_) m = std::max(m, s.dim);
    return m;
}

std::optional<std::size_t> WalkModel::find_site(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t WalkModel::site_index(std::string_view id) const {
    auto i = find_site(id);
    if (!i) throw StructureError("unknown site '" + std::string(id) + "'");
    return *i;
}

std::optional<std::size_t> WalkModel::edge_between(std::size_t from, std::size_t to) const {
    for (std::size_t e : outgoing_[from])
        if (target_[e] == to) return e;
    return std::nullopt;
}

bool WalkModel::single_kraus() const {
    return std::all_of(edges_.begin(), edges_.end(), [](const auto& e) { return e.kraus.size() == 1; });
}

std::size_t WalkModel::first_sorted_site() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < sites_.size(); ++i)
        if (sites_[i].id < sites_[best].id) best = i;
    return best;
}

// Structural equality: same sites in the same order and the same operators on
// every ordered pair. The walk name is not compared.
bool operator==(const WalkModel& a, const WalkModel& b) {
    if (a.sites_ != b.sites_ || a.edges_.size() != b.edges_.size()) return false;
    for (std::size_t e = 0; e < a.edges_.size(); ++e) {
        auto other = b.edge_between(a.source_[e], a.target_[e]);
        if (!other) return false;
        const auto& ka = a.edges_[e].kraus;
        const auto& kb = b.edges_[*other].kraus;
        if (ka.size() != kb.size()) return false;
        for (std::size_t k = 0; k < ka.size(); ++k)
            if (ka[k] != kb[k]) return false;
    }
    return true;
}

BlockState pure_state(const WalkModel& walk, std::size_t site, const CVector& x) {
    if (site >= walk.site_count()) throw DimensionError("pure_state: site index out of range");
    if (x.size() != walk.dim(site)) throw DimensionError("pure_state: vector dimension mismatch");
    const double n2 = x.squaredNorm();
    if (n2 == 0.0) throw PreconditionError("pure_state: zero vector");
    auto rho = BlockState::zeros(walk);
    rho[site] = x * x.adjoint() / n2;
    return rho;
}

BlockState default_initial_state(const WalkModel& walk) {
    const std::size_t site = walk.first_sorted_site();
    return pure_state(walk, site, CVector::Unit(walk.dim(site), 0));
}

BlockState maximally_mixed(const WalkModel& walk) {
    auto rho = BlockState::identity(walk);
    rho *= Complex(1.0 / walk.total_dim());
    return rho;
}

std::vector<double> site_probabilities(const BlockState& rho) {
    std::vector<double> p;
    p.reserve(rho.size());
    for (const auto& b : rho.blocks()) p.push_back(b.trace().real());
    return p;
}

double min_block_eigenvalue(const BlockState& rho) {
    double m = INFINITY;
    for (const auto& b : rho.blocks()) {
        if (b.size() == 0) continue;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(hermitian_part(b)), Eigen::EigenvaluesOnly);
        m = std::min(m, es.eigenvalues()(0));
    }
    return m;
}

ValidationReport validate(const WalkModel& walk, double tol) {
    ValidationReport report;
    report.deviation.resize(walk.site_count());
    for (std::size_t j = 0; j < walk.site_count(); ++j) {
        CMatrix sum = -CMatrix::Identity(walk.dim(j), walk.dim(j));
        for (std::size_t e : walk.outgoing(j))
            for (const auto& l : walk.edges()[e].kraus) sum += l.adjoint() * l;
        report.deviation[j] = operator_norm(sum);
        if (j == 0 || report.deviation[j] > report.worst_deviation) {
            report.worst_deviation = report.deviation[j];
            report.worst_site = j;
        }
    }
    report.ok = report.worst_deviation <= tol;
    return report;
}

namespace {

void check_state_shape(const WalkModel& walk, const BlockState& rho, const char* what) {
    if (!rho.matches(walk)) throw DimensionError(std::string(what) + ": state blocks do not match site dimensions");
}

CMatrix apply_to_target(const WalkModel& walk, const BlockState& rho, std::size_t i) {
    CMatrix out = CMatrix::Zero(walk.dim(i), walk.dim(i));
    for (std::size_t e : walk.incoming(i)) {
        const CMatrix& r = rho[walk.edge_source(e)];
        if (r.isZero(0.0)) continue;
        for (const auto& l : walk.edges()[e].kraus) out.noalias() += l * r * l.adjoint();
    }
    return out;
}

}  // namespace

BlockState apply(const WalkModel& walk, const BlockState& rho) {
    check_state_shape(walk, rho, "apply");
    std::vector<CMatrix> out(walk.site_count());
    const auto n = static_cast<std::ptrdiff_t>(walk.site_count());
#pragma omp parallel for schedule(dynamic) if (n > 8)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = apply_to_target(walk, rho, static_cast<std::size_t>(i));
    return BlockState(std::move(out));
}

BlockState apply_serial(const WalkModel& walk, const BlockState& rho) {
    check_state_shape(walk, rho, "apply_serial");
    std::vector<CMatrix> out;
    out.reserve(walk.site_count());
    for (std::size_t i = 0; i < walk.site_count(); ++i) out.push_back(apply_to_target(walk, rho, i));
    return BlockState(std::move(out));
}

BlockObservable apply_dual(const WalkModel& walk, const BlockObservable& x) {
    if (!x.matches(walk)) throw DimensionError("apply_dual: observable blocks do not match site dimensions");
    auto out = BlockObservable::zeros(walk);
    for (std::size_t e = 0; e < walk.edges().size(); ++e) {
        const std::size_t j = walk.edge_source(e);
        const CMatrix& xi = x[walk.edge_target(e)];
        for (const auto& l : walk.edges()[e].kraus) out[j].noalias() += l.adjoint() * xi * l;
    }
    return out;
}

namespace {

CMatrix compose_path(const WalkModel& walk, const Path& path, std::span<const std::size_t> kraus_index,
                     bool explicit_index) {
    if (path.vertices.size() < 2) throw PreconditionError("path_operator: a path needs at least one edge");
    std::vector<std::size_t> idx;
    for (const auto& v : path.vertices) idx.push_back(walk.site_index(v));
    if (explicit_index && kraus_index.size() != idx.size() - 1)
        throw DimensionError("path_operator: need one Kraus index per step");
    CMatrix acc = CMatrix::Identity(walk.dim(idx.front()), walk.dim(idx.front()));
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
        auto e = walk.edge_between(idx[k], idx[k + 1]);
        if (!e) return CMatrix::Zero(walk.dim(idx.back()), walk.dim(idx.front()));
        const auto& ks = walk.edges()[*e].kraus;
        std::size_t which = 0;
        if (explicit_index) {
            which = kraus_index[k];
            if (which >= ks.size()) throw DimensionError("path_operator: Kraus index out of range");
        } else if (ks.size() != 1) {
            throw PreconditionError("path_operator: edge " + path.vertices[k] + "->" + path.vertices[k + 1] +
                                    " has several Kraus operators; pass explicit indices");
        }
        acc = (ks[which] * acc).eval();
    }
    return acc;
}

}  // namespace

CMatrix path_operator(const WalkModel& walk, const Path& path) { return compose_path(walk, path, {}, false); }

CMatrix path_operator(const WalkModel& walk, const Path& path, std::span<const std::size_t> kraus_index) {
    return compose_path(walk, path, kraus_index, true);
}

WalkModel minimal_dilation(const Eigen::MatrixXd& p, const std::vector<std::string>& labels, std::string name) {
    if (p.rows() != p.cols()) throw PreconditionError("minimal_dilation: matrix is not square");
    if (static_cast<std::size_t>(p.rows()) != labels.size())
        throw DimensionError("minimal_dilation: label count does not match matrix size");
    for (Eigen::Index j = 0; j < p.rows(); ++j) {
        if (std::abs(p.row(j).sum() - 1.0) > 1e-10 || p.row(j).minCoeff() < -1e-12)
            throw PreconditionError("minimal_dilation: row " + std::to_string(j) + " is not a probability vector");
    }
    std::vector<SiteSpace> sites;
    for (const auto& l : labels) sites.push_back({l, 1});
    std::vector<TransitionEdge> edges;
    for (Eigen::Index j = 0; j < p.rows(); ++j) {
        for (Eigen::Index i = 0; i < p.cols(); ++i) {
            if (p(j, i) <= 0.0) continue;
            CMatrix l(1, 1);
            l(0, 0) = std::sqrt(p(j, i));
            edges.push_back({labels[j], labels[i], {l}});
        }
    }
    return WalkModel(std::move(name), std::move(sites), std::move(edges));
}

namespace {

void check_generators(const ShiftGenerators& generators) {
    if (generators.empty()) throw PreconditionError("homogeneous walk: no generators");
    const Eigen::Index d = generators.begin()->second.rows();
    CMatrix sum = -CMatrix::Identity(d, d);
    for (const auto& [s, l] : generators) {
        if (l.rows() != d || l.cols() != d) throw DimensionError("homogeneous walk: generators must share one square shape");
        sum += l.adjoint() * l;
    }
    if (operator_norm(sum) > 1e-10) throw PreconditionError("homogeneous walk: generators are not stochastic");
}

}  // namespace

WalkModel lift_homogeneous(const ShiftGenerators& generators, int n, int first_label, std::string name) {
    if (n < 1) throw PreconditionError("lift_homogeneous: cycle length must be positive");
    check_generators(generators);
    const int d = static_cast<int>(generators.begin()->second.rows());
    std::vector<SiteSpace> sites;
    for (int i = 0; i < n; ++i) sites.push_back({std::to_string(first_label + i), d});
    std::vector<TransitionEdge> edges;
    for (int i = 0; i < n; ++i) {
        std::map<int, std::vector<CMatrix>> by_target;
        for (const auto& [s, l] : generators) {
            const int t = ((i + s) % n + n) % n;
            by_target[t].push_back(l);
        }
        for (auto& [t, ks] : by_target)
            edges.push_back({sites[i].id, sites[t].id, std::move(ks)});
    }
    return WalkModel(std::move(name), std::move(sites), std::move(edges));
}

CMatrix local_map_apply(const ShiftGenerators& generators, const CMatrix& eta) {
    if (generators.empty()) throw PreconditionError("local_map_apply: no generators");
    CMatrix out = CMatrix::Zero(eta.rows(), eta.cols());
    for (const auto& [s, l] : generators) {
        if (l.cols() != eta.rows() || eta.rows() != eta.cols())
            throw DimensionError("local_map_apply: eta does not match generator dimension");
        out.noalias() += l * eta * l.adjoint();
    }
    return out;
}

}  // namespace oqrw
