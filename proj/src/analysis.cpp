#include "oqrw/analysis.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "oqrw/spectral.hpp"
#include "oqrw/structure.hpp"

namespace oqrw {

Eigen::MatrixXd path_counts(const WalkModel& walk, int n) {
    if (n < 1) throw PreconditionError("path_counts: length must be positive");
    const auto s = static_cast<Eigen::Index>(walk.site_count());
    Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(s, s);
    for (std::size_t e = 0; e < walk.edges().size(); ++e) adj(walk.edge_source(e), walk.edge_target(e)) = 1.0;
    Eigen::MatrixXd out = adj;
    for (int k = 1; k < n; ++k) out = (out * adj).eval();
    return out;
}

AnalysisReport analyze(const WalkModel& walk, const AnalysisOptions& opts) {
    AnalysisReport r;
    r.name = walk.name();
    const auto v = validate(walk, opts.tol);
    r.stochastic_ok = v.ok;
    r.stochastic_deviation = v.worst_deviation;
    r.worst_site = v.worst_site;
    if (!v.ok) return r;

    const auto fp = invariant_states(walk);
    r.fixed_space_dim = static_cast<int>(fp.hermitian_basis.size());
    r.invariant_states = fp.states;
    r.irreducible = is_irreducible(walk);
    if (r.irreducible) {
        const auto spec = period(walk);
        r.period = spec.period;
        r.peripheral = spec.peripheral;
    }

    const auto dec = minimal_enclosures(walk, opts.seed);
    r.transient_dim = dec.transient.dim();
    for (const auto& s : dec.singletons) r.singleton_dims.push_back(s.dim());
    for (const auto& f : dec.families) {
        std::vector<int> dims;
        for (const auto& m : f.members) dims.push_back(m.dim());
        r.family_dims.push_back(std::move(dims));
        r.family_has_isometry.push_back(f.isometries.size() + 1 >= f.members.size());
    }

    for (std::size_t i = 0; i < walk.site_count(); ++i)
        for (int k = 0; k < walk.dim(i); ++k)
            r.loop_gcd.push_back({i, k, loop_gcd(walk, i, CVector::Unit(walk.dim(i), k))});

    r.path_length = static_cast<int>(walk.site_count());
    r.path_counts = path_counts(walk, r.path_length);
    r.path_count_condition = true;
    for (Eigen::Index i = 0; i < r.path_counts.rows(); ++i)
        for (Eigen::Index j = 0; j < r.path_counts.cols(); ++j)
            if (r.path_counts(i, j) < walk.dim(static_cast<std::size_t>(j))) r.path_count_condition = false;
    return r;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson complex_json(Complex z) { return ojson::array({z.real(), z.imag()}); }

ojson matrix_json(const CMatrix& m) {
    ojson rows = ojson::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ojson row = ojson::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::string report_json(const WalkModel& walk, const AnalysisReport& r) {
    ojson doc;
    doc["name"] = r.name;
    doc["stochastic_ok"] = r.stochastic_ok;
    doc["stochastic_deviation"] = r.stochastic_deviation;
    doc["worst_site"] = walk.site_id(r.worst_site);
    if (!r.stochastic_ok) return doc.dump(2) + "\n";

    doc["irreducible"] = r.irreducible;
    doc["period"] = r.period ? ojson(*r.period) : ojson(nullptr);
    ojson peripheral = ojson::array();
    for (const auto& z : r.peripheral) peripheral.push_back(complex_json(z));
    doc["peripheral"] = std::move(peripheral);
    doc["fixed_space_dim"] = r.fixed_space_dim;
    ojson states = ojson::array();
    for (const auto& s : r.invariant_states) {
        ojson blocks = ojson::object();
        for (std::size_t i = 0; i < s.size(); ++i) blocks[walk.site_id(i)] = matrix_json(s[i]);
        states.push_back(std::move(blocks));
    }
    doc["invariant_states"] = std::move(states);

    ojson dec;
    dec["transient_dim"] = r.transient_dim;
    dec["singleton_dims"] = r.singleton_dims;
    ojson families = ojson::array();
    for (std::size_t f = 0; f < r.family_dims.size(); ++f)
        families.push_back({{"member_dims", r.family_dims[f]}, {"isometry", bool(r.family_has_isometry[f])}});
    dec["families"] = std::move(families);
    doc["decomposition"] = std::move(dec);

    ojson diag;
    ojson loops = ojson::array();
    for (const auto& l : r.loop_gcd)
        loops.push_back({{"site", walk.site_id(l.site)}, {"basis", l.basis_index + 1}, {"gcd", l.gcd}});
    diag["loop_gcd"] = std::move(loops);
    ojson counts = ojson::array();
    for (Eigen::Index i = 0; i < r.path_counts.rows(); ++i) {
        ojson row = ojson::array();
        for (Eigen::Index j = 0; j < r.path_counts.cols(); ++j) row.push_back(r.path_counts(i, j));
        counts.push_back(std::move(row));
    }
    diag["path_length"] = r.path_length;
    diag["path_counts"] = std::move(counts);
    diag["path_count_condition"] = r.path_count_condition;
    doc["diagnostics"] = std::move(diag);
    return doc.dump(2) + "\n";
}

std::string report_text(const WalkModel& walk, const AnalysisReport& r) {
    std::ostringstream os;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", r.stochastic_deviation);
    os << "walk:            " << r.name << "\n";
    os << "stochastic:      " << (r.stochastic_ok ? "yes" : "no") << " (max deviation " << buf << " at site "
       << walk.site_id(r.worst_site) << ")\n";
    if (!r.stochastic_ok) return os.str();
    os << "irreducible:     " << (r.irreducible ? "yes" : "no") << "\n";
    os << "period:          " << (r.period ? std::to_string(*r.period) : std::string("n/a (reducible)")) << "\n";
    os << "fixed space dim: " << r.fixed_space_dim << "\n";
    os << "transient dim:   " << r.transient_dim << "\n";
    os << "singletons:      " << r.singleton_dims.size() << " (dims";
    for (int d : r.singleton_dims) os << " " << d;
    os << ")\n";
    os << "families:        " << r.family_dims.size() << "\n";
    for (std::size_t f = 0; f < r.family_dims.size(); ++f) {
        os << "  family " << f << ": member dims";
        for (int d : r.family_dims[f]) os << " " << d;
        os << (r.family_has_isometry[f] ? ", linked by partial isometries" : ", isometries missing") << "\n";
    }
    os << "loop gcd:       ";
    for (const auto& l : r.loop_gcd) os << " " << walk.site_id(l.site) << "/e" << l.basis_index + 1 << "=" << l.gcd;
    os << "\n";
    os << "path counts (length " << r.path_length << ") >= target dim: " << (r.path_count_condition ? "yes" : "no")
       << "\n";
    return os.str();
}

}  // namespace oqrw
