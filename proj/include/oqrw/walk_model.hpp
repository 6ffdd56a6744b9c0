#pragma once

// Open quantum random walks on a finite vertex set, in the extended form where
// every directed edge carries a list of Kraus operators (a plain walk is the
// one-operator-per-edge case).
//
// A walk acts on block-diagonal operators rho = sum_i rho(i) (x) |i><i| by
//
//     M(rho)(i) = sum_j sum_{e in E(j,i)} L_e rho(j) L_e^*,
//
// and is stochastic when sum_i sum_{e in E(j,i)} L_e^* L_e = Id on every h_j.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "oqrw/errors.hpp"
#include "oqrw/numerics.hpp"

namespace oqrw {

struct SiteSpace {
    std::string id;
    int dim = 1;

    bool operator==(const SiteSpace&) const = default;
};

/// Transition from site `from` (j) to site `to` (i); each Kraus operator is dim(to) x dim(from).
struct TransitionEdge {
    std::string from;
    std::string to;
    std::vector<CMatrix> kraus;
};

class WalkModel {
public:
    /// Checks structure only: unique site ids, known endpoints, one edge per
    /// ordered pair, non-empty Kraus lists with matching shapes. Stochasticity
    /// is checked separately by validate().
    WalkModel(std::string name, std::vector<SiteSpace> sites, std::vector<TransitionEdge> edges);

    const std::string& name() const { return name_; }
    std::span<const SiteSpace> sites() const { return sites_; }
    std::span<const TransitionEdge> edges() const { return edges_; }

    std::size_t site_count() const { return sites_.size(); }
    int dim(std::size_t site) const { return sites_[site].dim; }
    int total_dim() const { return total_dim_; }
    int max_dim() const;

    std::optional<std::size_t> find_site(std::string_view id) const;
    /// Throws StructureError for unknown labels.
    std::size_t site_index(std::string_view id) const;
    const std::string& site_id(std::size_t site) const { return sites_[site].id; }

    std::size_t edge_source(std::size_t edge) const { return source_[edge]; }
    std::size_t edge_target(std::size_t edge) const { return target_[edge]; }
    const std::vector<std::size_t>& outgoing(std::size_t site) const { return outgoing_[site]; }
    const std::vector<std::size_t>& incoming(std::size_t site) const { return incoming_[site]; }

    /// Edge index for the ordered pair (from, to), if present.
    std::optional<std::size_t> edge_between(std::size_t from, std::size_t to) const;

    /// True when every edge carries exactly one Kraus operator.
    bool single_kraus() const;

    /// Site index with the lexicographically smallest label.
    std::size_t first_sorted_site() const;

    friend bool operator==(const WalkModel& a, const WalkModel& b);

private:
    std::string name_;
    std::vector<SiteSpace> sites_;
    std::vector<TransitionEdge> edges_;
    std::vector<std::size_t> source_;
    std::vector<std::size_t> target_;
    std::vector<std::vector<std::size_t>> outgoing_;
    std::vector<std::vector<std::size_t>> incoming_;
    std::unordered_map<std::string, std::size_t> index_;
    int total_dim_ = 0;
};

/// Site-block-diagonal operator, one square block per site in walk order.
/// The tag keeps states, observables and general operators apart.
template <class Tag>
class BlockOperator {
public:
    BlockOperator() = default;
    explicit BlockOperator(std::vector<CMatrix> blocks) : blocks_(std::move(blocks)) {}

    static BlockOperator zeros(const WalkModel& walk) {
        std::vector<CMatrix> b;
        b.reserve(walk.site_count());
        for (std::size_t i = 0; i < walk.site_count(); ++i) b.push_back(CMatrix::Zero(walk.dim(i), walk.dim(i)));
        return BlockOperator(std::move(b));
    }

    static BlockOperator identity(const WalkModel& walk) {
        auto out = zeros(walk);
        for (auto& b : out.blocks_) b.setIdentity();
        return out;
    }

    /// Absent labels are zero blocks.
    static BlockOperator from_map(const WalkModel& walk, const std::map<std::string, CMatrix>& blocks) {
        auto out = zeros(walk);
        for (const auto& [id, m] : blocks) {
            const std::size_t i = walk.site_index(id);
            if (m.rows() != walk.dim(i) || m.cols() != walk.dim(i))
                throw DimensionError("block for site '" + id + "' has wrong shape");
            out.blocks_[i] = m;
        }
        return out;
    }

    std::size_t size() const { return blocks_.size(); }
    CMatrix& operator[](std::size_t i) { return blocks_[i]; }
    const CMatrix& operator[](std::size_t i) const { return blocks_[i]; }
    std::vector<CMatrix>& blocks() { return blocks_; }
    const std::vector<CMatrix>& blocks() const { return blocks_; }

    Complex trace() const {
        Complex t = 0.0;
        for (const auto& b : blocks_) t += b.trace();
        return t;
    }

    /// Trace norm of the full (block-diagonal) operator.
    double trace_norm() const {
        double s = 0.0;
        for (const auto& b : blocks_) s += oqrw::trace_norm(b);
        return s;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& b : blocks_)
            if (b.size() > 0) m = std::max(m, b.cwiseAbs().maxCoeff());
        return m;
    }

    BlockOperator adjoint() const {
        BlockOperator out = *this;
        for (auto& b : out.blocks_) b = b.adjoint().eval();
        return out;
    }

    bool matches(const WalkModel& walk) const {
        if (blocks_.size() != walk.site_count()) return false;
        for (std::size_t i = 0; i < blocks_.size(); ++i)
            if (blocks_[i].rows() != walk.dim(i) || blocks_[i].cols() != walk.dim(i)) return false;
        return true;
    }

    BlockOperator& operator+=(const BlockOperator& o) {
        check_same(o);
        for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] += o.blocks_[i];
        return *this;
    }
    BlockOperator& operator-=(const BlockOperator& o) {
        check_same(o);
        for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] -= o.blocks_[i];
        return *this;
    }
    BlockOperator& operator*=(Complex s) {
        for (auto& b : blocks_) b *= s;
        return *this;
    }
    friend BlockOperator operator+(BlockOperator a, const BlockOperator& b) { return a += b; }
    friend BlockOperator operator-(BlockOperator a, const BlockOperator& b) { return a -= b; }
    friend BlockOperator operator*(Complex s, BlockOperator a) { return a *= s; }
    friend BlockOperator operator*(BlockOperator a, Complex s) { return a *= s; }

    /// Block-wise product (composition of block-diagonal operators).
    friend BlockOperator operator*(const BlockOperator& a, const BlockOperator& b) {
        a.check_same(b);
        BlockOperator out = a;
        for (std::size_t i = 0; i < a.blocks_.size(); ++i) out.blocks_[i] = a.blocks_[i] * b.blocks_[i];
        return out;
    }

private:
    void check_same(const BlockOperator& o) const {
        if (o.blocks_.size() != blocks_.size()) throw DimensionError("block operators have different site counts");
        for (std::size_t i = 0; i < blocks_.size(); ++i)
            if (o.blocks_[i].rows() != blocks_[i].rows() || o.blocks_[i].cols() != blocks_[i].cols())
                throw DimensionError("block operators have different block shapes");
    }

    std::vector<CMatrix> blocks_;
};

using BlockState = BlockOperator<struct StateTag>;
using BlockObservable = BlockOperator<struct ObservableTag>;
using BlockMatrix = BlockOperator<struct MatrixTag>;

template <class To, class From>
To retag(const From& from) {
    return To(from.blocks());
}

/// x at `site`, zero elsewhere, as the pure state |x><x| / ||x||^2.
BlockState pure_state(const WalkModel& walk, std::size_t site, const CVector& x);

/// e_1 at the site with the smallest label.
BlockState default_initial_state(const WalkModel& walk);

/// Id / total_dim.
BlockState maximally_mixed(const WalkModel& walk);

/// Tr rho(i) for every site.
std::vector<double> site_probabilities(const BlockState& rho);

/// Smallest eigenvalue over all Hermitian parts of the blocks.
double min_block_eigenvalue(const BlockState& rho);

struct ValidationReport {
    bool ok = false;
    std::vector<double> deviation;  // ||sum L^*L - Id|| (operator norm) per source site
    std::size_t worst_site = 0;
    double worst_deviation = 0.0;
};

inline constexpr double kStochasticTol = 1e-10;

ValidationReport validate(const WalkModel& walk, double tol = kStochasticTol);

/// One step of the channel. OpenMP-parallel over target sites.
BlockState apply(const WalkModel& walk, const BlockState& rho);
/// Serial reference for apply().
BlockState apply_serial(const WalkModel& walk, const BlockState& rho);

/// Dual (Heisenberg) step: X(j) -> sum_i sum_e L_e^* X(i) L_e.
BlockObservable apply_dual(const WalkModel& walk, const BlockObservable& x);

/// Vertex sequence i_0 ... i_l with l >= 1. A single-vertex loop {i} is written (i, i).
struct Path {
    std::vector<std::string> vertices;
};

/// L_pi = L_{i_l, i_{l-1}} ... L_{i_1, i_0}; absent edges give the zero operator.
/// Requires single-Kraus edges along the path.
CMatrix path_operator(const WalkModel& walk, const Path& path);

/// Multigraph variant: kraus_index[k] selects the operator used on step k.
CMatrix path_operator(const WalkModel& walk, const Path& path, std::span<const std::size_t> kraus_index);

/// Minimal dilation of a row-stochastic matrix: 1-dim sites, L_{i,j} = sqrt(P_{j,i}).
WalkModel minimal_dilation(const Eigen::MatrixXd& p, const std::vector<std::string>& labels,
                           std::string name = "dilation");

using ShiftGenerators = std::map<int, CMatrix>;

/// Translation-invariant walk on Z_n: edge i -> i+s (mod n) carries L_s.
/// Sites are labelled first_label ... first_label + n - 1.
WalkModel lift_homogeneous(const ShiftGenerators& generators, int n, int first_label = 0,
                           std::string name = "homogeneous");

/// eta -> sum_s L_s eta L_s^*.
CMatrix local_map_apply(const ShiftGenerators& generators, const CMatrix& eta);

}  // namespace oqrw
