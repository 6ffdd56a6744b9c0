#include "oqrw/registry.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <numbers>

namespace oqrw {

namespace {

using Params = std::map<std::string, double>;

CMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
    CMatrix m(2, 2);
    m << a, b, c, d;
    return m;
}

CMatrix swap2() { return mat2(0, 1, 1, 0); }
CMatrix id2() { return CMatrix::Identity(2, 2); }

std::vector<SiteSpace> sites_2d(std::initializer_list<const char*> ids) {
    std::vector<SiteSpace> out;
    for (const char* id : ids) out.push_back({id, 2});
    return out;
}

WalkModel m_cycle(int n, const std::string& name) { return lift_homogeneous(cyclic_generators(), n, 1, name); }

WalkModel m_cycle_eps(int n, double eps, const std::string& name) {
    if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("m4-eps: eps must lie in (0, 1)");
    ShiftGenerators g;
    for (const auto& [s, l] : cyclic_generators()) g[s] = std::sqrt(1.0 - eps) * l;
    g[0] = std::sqrt(eps) * id2();
    return lift_homogeneous(g, n, 1, name);
}

WalkModel diagonal_cycle() {
    const double r = 1.0 / std::sqrt(5.0);
    const CMatrix up = r * mat2(1, 0, 0, 2);    // L_{1,2} = L_{2,3} = L_{3,1}
    const CMatrix down = r * mat2(2, 0, 0, 1);  // L_{2,1} = L_{3,2} = L_{1,3}
    return WalkModel("ex-6.4", sites_2d({"1", "2", "3"}),
                     {{"2", "1", {up}}, {"3", "2", {up}}, {"1", "3", {up}},
                      {"1", "2", {down}}, {"2", "3", {down}}, {"3", "1", {down}}});
}

WalkModel swap_pair() {
    const double r = 1.0 / std::sqrt(2.0);
    return WalkModel("ex-6.11", sites_2d({"1", "2"}),
                     {{"1", "1", {r * swap2()}}, {"2", "2", {r * swap2()}},
                      {"2", "1", {r * id2()}}, {"1", "2", {r * id2()}}});
}

WalkModel lazy_swap(double p) {
    if (!(p > 0.0 && p < 1.0)) throw PreconditionError("ex-9.6: p must lie in (0, 1)");
    const CMatrix stay = std::sqrt(p) * id2();
    const CMatrix move = std::sqrt(1.0 - p) * swap2();
    return WalkModel("ex-9.6", sites_2d({"1", "2"}),
                     {{"1", "1", {stay}}, {"2", "2", {stay}}, {"2", "1", {move}}, {"1", "2", {move}}});
}

// Parameters chosen so that both |a|^2 + |c|^2 = 1 and |b|^2 + |d|^2 = 1 hold.
WalkModel absorbing_pair() {
    const double p = 0.5, q = 1.0 - p;
    const double a = 1.0 / std::sqrt(3.0), b = std::sqrt(2.0 / 3.0);
    const double c = std::sqrt(2.0 / 3.0), d = 1.0 / std::sqrt(3.0);
    return WalkModel("ex-9.2", sites_2d({"1", "2"}),
                     {{"1", "1", {mat2(a, 0, 0, b)}},
                      {"2", "1", {mat2(0, std::sqrt(p), 0, 0)}},
                      {"2", "2", {mat2(1, 0, 0, std::sqrt(q))}},
                      {"1", "2", {mat2(c, 0, 0, d)}}});
}

WalkModel rotation_pair() {
    const CMatrix r = mat2(0, -1, 1, 0);
    const Complex k(0.0, 1.0 / std::sqrt(2.0));
    return WalkModel("remark-4.6", sites_2d({"1", "2"}),
                     {{"1", "1", {k * r}}, {"1", "2", {k * r}}, {"2", "1", {-k * r}}, {"2", "2", {-k * r}}});
}

struct Entry {
    std::vector<std::string> params;
    std::function<WalkModel(const Params&)> make;
};

const std::map<std::string, Entry>& registry() {
    static const std::map<std::string, Entry> r = {
        {"m3", {{}, [](const Params&) { return m_cycle(3, "m3"); }}},
        {"m4", {{}, [](const Params&) { return m_cycle(4, "m4"); }}},
        {"m4-eps", {{"eps"}, [](const Params& p) { return m_cycle_eps(4, p.at("eps"), "m4-eps"); }}},
        {"ex-6.4", {{}, [](const Params&) { return diagonal_cycle(); }}},
        {"ex-6.11", {{}, [](const Params&) { return swap_pair(); }}},
        {"z8-period4",
         {{"alpha"},
          [](const Params& p) { return lift_homogeneous(phase_shift_generators(p.at("alpha")), 8, 0, "z8-period4"); }}},
        {"ex-9.6", {{"p"}, [](const Params& p) { return lazy_swap(p.at("p")); }}},
        {"ex-9.2", {{}, [](const Params&) { return absorbing_pair(); }}},
        {"remark-4.6", {{}, [](const Params&) { return rotation_pair(); }}},
    };
    return r;
}

const Params& defaults() {
    static const Params d = {{"eps", 0.05}, {"alpha", std::numbers::pi / 2}, {"p", 0.5}};
    return d;
}

std::string listing() {
    std::string s;
    for (const auto& n : builtin_names()) s += (s.empty() ? "" : ", ") + n;
    return s;
}

}  // namespace

ShiftGenerators cyclic_generators() {
    const double r = 1.0 / std::sqrt(3.0);
    return {{+1, r * mat2(1, 1, 0, 1)}, {-1, r * mat2(1, 0, -1, 1)}};
}

ShiftGenerators phase_shift_generators(double alpha) {
    const double p = 1.0 / std::sqrt(2.0), q = 1.0 / std::sqrt(2.0);
    return {{+1, p * swap2()}, {-1, q * mat2(1, 0, 0, std::polar(1.0, alpha))}};
}

std::vector<std::string> builtin_names() {
    std::vector<std::string> out;
    for (const auto& [name, e] : registry()) out.push_back(name);
    return out;
}

WalkModel builtin(std::string_view spec) {
    const auto q = spec.find('?');
    const std::string name(spec.substr(0, q));
    auto it = registry().find(name);
    if (it == registry().end())
        throw PreconditionError("unknown builtin '" + name + "'; available: " + listing());

    Params params;
    for (const auto& p : it->second.params) params[p] = defaults().at(p);
    if (q != std::string_view::npos) {
        std::string_view rest = spec.substr(q + 1);
        while (!rest.empty()) {
            const auto amp = rest.find('&');
            const std::string_view kv = rest.substr(0, amp);
            rest = amp == std::string_view::npos ? std::string_view{} : rest.substr(amp + 1);
            const auto eq = kv.find('=');
            const std::string key(kv.substr(0, eq));
            if (eq == std::string_view::npos || !params.count(key))
                throw PreconditionError("builtin '" + name + "' does not take parameter '" + key + "'");
            const std::string value(kv.substr(eq + 1));
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(value, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != value.size() || value.empty())
                throw PreconditionError("builtin '" + name + "': parameter '" + key + "' is not a number");
            params[key] = v;
        }
    }
    return it->second.make(params);
}

}  // namespace oqrw
