#pragma once

// Experiment configuration: one JSON file drives every CLI command.  The
// schema is strict -- unknown keys anywhere are rejected before any
// computation starts.

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kswitten/errors.hpp"
#include "kswitten/io.hpp"
#include "kswitten/landscape.hpp"
#include "kswitten/reduction.hpp"
#include "kswitten/witten.hpp"

namespace ksw {

struct TauGridSpec {
    int count = 25;
    double tau_max = -1.0;          // <= 0: auto, 5 / mu2
    std::vector<double> points;     // explicit grid overrides count/tau_max
};

struct RunTols {
    double newton_tol = 1e-12;
    double degeneracy_tol = 1e-8;
    double equal_height_tol = 1e-9;
    double merge_tol = 1e-6;
    double eps0 = kDefaultEps0;
    double exp_guard = 500.0;
    int scan_n = 2000;
    double eps_cut = -1.0;   // <= 0: auto
    double delta0 = -1.0;    // <= 0: auto
};

struct Config {
    std::string potential;
    bool has_potential = false;
    Interval domain{};
    bool has_domain = false;
    int grid_n = 2001;
    std::vector<double> h_list;
    std::vector<double> beta;
    TauGridSpec tau_grid;
    int spectrum_k = 0;      // 0: N + 1
    RunTols tols;
    std::string output_dir = "out";
    GraphSpec graph;
    double graph_kappa = 1.0;
    bool has_graph = false;
    std::string hash;        // FNV-1a of the raw config bytes
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed,
                           const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("config: unknown key \"" + it.key() + "\" in " + where);
}

inline double as_number(const nlohmann::json& j, const std::string& what) {
    if (!j.is_number()) throw ConfigError("config: " + what + " must be a number");
    return j.get<double>();
}

} // namespace detail

inline Config parse_config(const std::string& raw) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");

    detail::reject_unknown(j, {"potential", "domain", "grid_n", "h_list", "beta", "tau_grid",
                               "spectrum_k", "tolerances", "output_dir", "graph"},
                           "top level");

    Config c;
    c.hash = config_hash_hex(raw);

    if (j.contains("potential")) {
        if (!j["potential"].is_string()) throw ConfigError("config: potential must be a string");
        c.potential = j["potential"].get<std::string>();
        c.has_potential = true;
    }
    if (j.contains("domain")) {
        const auto& d = j["domain"];
        if (!d.is_array() || d.size() != 2)
            throw ConfigError("config: domain must be [a, b]");
        c.domain.a = detail::as_number(d[0], "domain[0]");
        c.domain.b = detail::as_number(d[1], "domain[1]");
        if (!(c.domain.b > c.domain.a)) throw ConfigError("config: domain must satisfy a < b");
        c.has_domain = true;
    }
    if (j.contains("grid_n")) {
        if (!j["grid_n"].is_number_integer()) throw ConfigError("config: grid_n must be an integer");
        c.grid_n = j["grid_n"].get<int>();
    }
    if (j.contains("h_list")) {
        if (!j["h_list"].is_array() || j["h_list"].empty())
            throw ConfigError("config: h_list must be a non-empty array");
        for (const auto& v : j["h_list"]) {
            const double h = detail::as_number(v, "h_list entry");
            if (!(h > 0.0 && h <= 1.0)) throw ConfigError("config: every h must lie in (0, 1]");
            c.h_list.push_back(h);
        }
    }
    if (j.contains("beta")) {
        if (!j["beta"].is_array()) throw ConfigError("config: beta must be an array");
        for (const auto& v : j["beta"]) c.beta.push_back(detail::as_number(v, "beta entry"));
    }
    if (j.contains("tau_grid")) {
        const auto& t = j["tau_grid"];
        if (!t.is_object()) throw ConfigError("config: tau_grid must be an object");
        detail::reject_unknown(t, {"count", "tau_max", "points"}, "tau_grid");
        if (t.contains("count")) {
            if (!t["count"].is_number_integer())
                throw ConfigError("config: tau_grid.count must be an integer");
            c.tau_grid.count = t["count"].get<int>();
            if (c.tau_grid.count < 2 || c.tau_grid.count > 100000)
                throw ConfigError("config: tau_grid.count out of range");
        }
        if (t.contains("tau_max"))
            c.tau_grid.tau_max = detail::as_number(t["tau_max"], "tau_grid.tau_max");
        if (t.contains("points")) {
            if (!t["points"].is_array()) throw ConfigError("config: tau_grid.points must be an array");
            double prev = -1.0;
            for (const auto& v : t["points"]) {
                const double tau = detail::as_number(v, "tau_grid point");
                if (tau < 0.0 || tau <= prev)
                    throw ConfigError("config: tau_grid.points must be nonnegative and increasing");
                c.tau_grid.points.push_back(tau);
                prev = tau;
            }
        }
    }
    if (j.contains("spectrum_k")) {
        if (!j["spectrum_k"].is_number_integer())
            throw ConfigError("config: spectrum_k must be an integer");
        c.spectrum_k = j["spectrum_k"].get<int>();
        if (c.spectrum_k < 1 || c.spectrum_k > 20)
            throw ConfigError("config: spectrum_k must lie in [1, 20]");
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        if (!t.is_object()) throw ConfigError("config: tolerances must be an object");
        detail::reject_unknown(t, {"newton_tol", "degeneracy_tol", "equal_height_tol", "merge_tol",
                                   "eps0", "exp_guard", "scan_n", "eps_cut", "delta0"},
                               "tolerances");
        auto num = [&](const char* key, double& slot) {
            if (t.contains(key)) slot = detail::as_number(t[key], std::string("tolerances.") + key);
        };
        num("newton_tol", c.tols.newton_tol);
        num("degeneracy_tol", c.tols.degeneracy_tol);
        num("equal_height_tol", c.tols.equal_height_tol);
        num("merge_tol", c.tols.merge_tol);
        num("eps0", c.tols.eps0);
        num("exp_guard", c.tols.exp_guard);
        num("eps_cut", c.tols.eps_cut);
        num("delta0", c.tols.delta0);
        if (t.contains("scan_n")) {
            if (!t["scan_n"].is_number_integer())
                throw ConfigError("config: tolerances.scan_n must be an integer");
            c.tols.scan_n = t["scan_n"].get<int>();
        }
    }
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string()) throw ConfigError("config: output_dir must be a string");
        c.output_dir = j["output_dir"].get<std::string>();
    }
    if (j.contains("graph")) {
        const auto& g = j["graph"];
        if (!g.is_object()) throw ConfigError("config: graph must be an object");
        detail::reject_unknown(g, {"vertices", "edges", "kappa"}, "graph");
        if (!g.contains("vertices") || !g["vertices"].is_array())
            throw ConfigError("config: graph.vertices must be an array");
        for (const auto& v : g["vertices"]) {
            if (!v.is_string()) throw ConfigError("config: graph vertices must be strings");
            c.graph.vertices.push_back(v.get<std::string>());
        }
        if (!g.contains("edges") || !g["edges"].is_array())
            throw ConfigError("config: graph.edges must be an array");
        for (const auto& e : g["edges"]) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
                !e[1].is_number_integer())
                throw ConfigError("config: each graph edge must be [i, j] with integer indices");
            c.graph.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
        }
        if (g.contains("kappa")) c.graph_kappa = detail::as_number(g["kappa"], "graph.kappa");
        if (!(c.graph_kappa > 0.0)) throw ConfigError("config: graph.kappa must be positive");
        c.has_graph = true;
    }
    return c;
}

inline Config load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("config file not found: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

} // namespace ksw
