#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "revgap/cdf.hpp"
#include "revgap/order_stats.hpp"

namespace revgap {

// On-disk distribution encoding, one object per buyer:
//   {"kind":"point_mass","b":1.0}
//   {"kind":"triangle","v":2.0,"q":0.5}
//   {"kind":"equal_revenue","scale":1.0}
//   {"kind":"tabulated","xs":[...],"ps":[...]}
// An instance file wraps them as {"k":2,"cdfs":[...]}.

inline nlohmann::json cdf_to_json(const Cdf& cdf) {
    nlohmann::json j;
    if (cdf.is_point_mass()) {
        j["kind"] = "point_mass";
        j["b"] = cdf.as_point_mass().value;
    } else if (cdf.is_triangle()) {
        const auto& t = cdf.as_triangle();
        j["kind"] = "triangle";
        j["v"] = t.v;
        j["q"] = t.q;
    } else if (cdf.is_equal_revenue()) {
        j["kind"] = "equal_revenue";
        j["scale"] = cdf.as_equal_revenue().scale;
    } else {
        const auto& t = cdf.as_tabulated();
        j["kind"] = "tabulated";
        j["xs"] = t.xs;
        j["ps"] = t.ps;
    }
    return j;
}

inline Cdf cdf_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind")) {
        throw std::invalid_argument("cdf_from_json: expected an object with a \"kind\" field");
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "point_mass") {
        return Cdf(PointMass{j.at("b").get<double>()});
    }
    if (kind == "triangle") {
        return Cdf(Triangle{j.at("v").get<double>(), j.at("q").get<double>()});
    }
    if (kind == "equal_revenue") {
        return Cdf(EqualRevenue{j.at("scale").get<double>()});
    }
    if (kind == "tabulated") {
        return Cdf(Tabulated{j.at("xs").get<std::vector<double>>(),
                             j.at("ps").get<std::vector<double>>()});
    }
    throw std::invalid_argument("cdf_from_json: unknown kind \"" + kind + "\"");
}

inline nlohmann::json instance_to_json(const Instance& inst) {
    nlohmann::json j;
    j["k"] = inst.k;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : inst.cdfs) arr.push_back(cdf_to_json(c));
    j["cdfs"] = std::move(arr);
    return j;
}

inline Instance instance_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("k") || !j.contains("cdfs")) {
        throw std::invalid_argument(
            "instance_from_json: expected an object with \"k\" and \"cdfs\" fields");
    }
    Instance inst;
    inst.k = j.at("k").get<int>();
    for (const auto& cj : j.at("cdfs")) inst.cdfs.push_back(cdf_from_json(cj));
    validate_instance(inst);
    return inst;
}

inline Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_instance: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return instance_from_json(j);
}

inline void save_instance(const Instance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_instance: cannot open " + path);
    out << instance_to_json(inst).dump(2) << '\n';
}

}  // namespace revgap
