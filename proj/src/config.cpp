#include "oqrw/config.hpp"

#include <set>

#include <json.hpp>

namespace oqrw {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ParseError(path + ": " + what); }

const json& field(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, std::string("missing field '") + key + "'");
    return *it;
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

Complex as_complex(const json& v, const std::string& path) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        fail(path, "expected a [re, im] pair");
    return {v[0].get<double>(), v[1].get<double>()};
}

CMatrix as_matrix(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty list of rows");
    std::size_t cols = 0;
    for (std::size_t r = 0; r < v.size(); ++r) {
        const std::string rp = path + "[" + std::to_string(r) + "]";
        if (!v[r].is_array() || v[r].empty()) fail(rp, "expected a non-empty row");
        if (r == 0) cols = v[r].size();
        if (v[r].size() != cols)
            fail(rp, "row has " + std::to_string(v[r].size()) + " entries, expected " + std::to_string(cols) +
                         " (matrix is not rectangular)");
    }
    CMatrix m(v.size(), cols);
    for (std::size_t r = 0; r < v.size(); ++r)
        for (std::size_t c = 0; c < cols; ++c)
            m(r, c) = as_complex(v[r][c], path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    return m;
}

std::string locate(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
        if (text[k] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

WalkModel parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("invalid JSON at " + locate(text, e.byte) + ": " + e.what());
    }
    if (!doc.is_object()) fail("$", "expected an object");

    std::string name = "walk";
    if (auto it = doc.find("name"); it != doc.end()) name = as_string(*it, "name");

    const json& jsites = field(doc, "sites", "$");
    if (!jsites.is_array() || jsites.empty()) fail("sites", "expected a non-empty list");
    std::vector<SiteSpace> sites;
    std::map<std::string, int> dims;
    for (std::size_t k = 0; k < jsites.size(); ++k) {
        const std::string p = "sites[" + std::to_string(k) + "]";
        if (!jsites[k].is_object()) fail(p, "expected an object");
        const std::string id = as_string(field(jsites[k], "id", p), p + ".id");
        const json& jd = field(jsites[k], "dim", p);
        if (!jd.is_number_integer() || jd.get<long long>() < 1) fail(p + ".dim", "expected a positive integer");
        if (!dims.emplace(id, jd.get<int>()).second) fail(p + ".id", "duplicate site id '" + id + "'");
        sites.push_back({id, jd.get<int>()});
    }

    std::vector<TransitionEdge> edges;
    if (auto it = doc.find("edges"); it != doc.end()) {
        if (!it->is_array()) fail("edges", "expected a list");
        std::set<std::pair<std::string, std::string>> seen;
        for (std::size_t k = 0; k < it->size(); ++k) {
            const json& je = (*it)[k];
            const std::string p = "edges[" + std::to_string(k) + "]";
            if (!je.is_object()) fail(p, "expected an object");
            TransitionEdge e;
            e.from = as_string(field(je, "from", p), p + ".from");
            e.to = as_string(field(je, "to", p), p + ".to");
            if (!dims.count(e.from)) fail(p + ".from", "unknown site '" + e.from + "'");
            if (!dims.count(e.to)) fail(p + ".to", "unknown site '" + e.to + "'");
            if (!seen.emplace(e.from, e.to).second) fail(p, "duplicate edge " + e.from + "->" + e.to);
            const json& jk = field(je, "kraus", p);
            if (!jk.is_array() || jk.empty()) fail(p + ".kraus", "expected a non-empty list of matrices");
            for (std::size_t m = 0; m < jk.size(); ++m) {
                const std::string mp = p + ".kraus[" + std::to_string(m) + "]";
                CMatrix l = as_matrix(jk[m], mp);
                const int rows = dims[e.to], cols = dims[e.from];
                if (l.rows() != rows || l.cols() != cols) {
                    fail(mp, "edge " + e.from + "->" + e.to + " needs a " + std::to_string(rows) + "x" +
                                 std::to_string(cols) + " matrix, got " + std::to_string(l.rows()) + "x" +
                                 std::to_string(l.cols()));
                }
                e.kraus.push_back(std::move(l));
            }
            edges.push_back(std::move(e));
        }
    }
    try {
        return WalkModel(std::move(name), std::move(sites), std::move(edges));
    } catch (const StructureError& e) {
        throw ParseError(e.what());
    }
}

std::string serialize_config(const WalkModel& walk) {
    ojson doc;
    doc["name"] = walk.name();
    doc["sites"] = ojson::array();
    for (const auto& s : walk.sites()) doc["sites"].push_back({{"id", s.id}, {"dim", s.dim}});
    doc["edges"] = ojson::array();
    for (const auto& e : walk.edges()) {
        ojson kraus = ojson::array();
        for (const auto& l : e.kraus) {
            ojson rows = ojson::array();
            for (Eigen::Index r = 0; r < l.rows(); ++r) {
                ojson row = ojson::array();
                for (Eigen::Index c = 0; c < l.cols(); ++c) row.push_back({l(r, c).real(), l(r, c).imag()});
                rows.push_back(std::move(row));
            }
            kraus.push_back(std::move(rows));
        }
        doc["edges"].push_back({{"from", e.from}, {"to", e.to}, {"kraus", std::move(kraus)}});
    }
    return doc.dump(2) + "\n";
}

}  // namespace oqrw
