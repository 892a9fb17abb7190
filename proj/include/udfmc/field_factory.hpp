#pragma once

// Builds fields from JSON descriptions such as
//   {"family": "sphere", "params": [0.5], "center": [0, 0, 0]}
//   {"family": "plane", "normal": [0, 0, 1], "params": [0.1]}
//   {"family": "plane-patch", "params": ["-inf", 0.0, "-inf", "inf", 0.013]}
//   {"family": "half-plane", "params": [0.0], "height": 0.013}
//   {"family": "open-cylinder", "axis": [0, 0], "params": [0.4, -0.5, 0.5]}
//   {"family": "mesh", "mesh": "patch.obj", "d_max": 0.2}
//   {"family": "translated-mesh", "mesh": "patch.obj", "params": [0, 0, 0]}
//   {"family": "mlp", "weights": "net.json", "latent": [0.1, -0.2]}
// Relative paths resolve against `base_dir`.

#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "field.hpp"
#include "io.hpp"
#include "mesh_udf.hpp"
#include "mlp_udf.hpp"
#include "parametric.hpp"

namespace udfmc {

namespace detail {

inline double json_number(const nlohmann::json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw std::invalid_argument("expected a number or \"inf\"/\"-inf\", got " + v.dump());
}

inline std::vector<double> json_numbers(const nlohmann::json& j, const char* key, std::size_t expected) {
    if (!j.contains(key)) throw std::invalid_argument(std::string("field description lacks '") + key + "'");
    std::vector<double> out;
    for (const auto& v : j.at(key)) out.push_back(json_number(v));
    if (expected && out.size() != expected)
        throw std::invalid_argument(std::string("'") + key + "' needs " + std::to_string(expected) + " values, got " +
                                    std::to_string(out.size()));
    return out;
}

inline Vec3 json_vec3(const nlohmann::json& j, const char* key, const Vec3& fallback) {
    if (!j.contains(key)) return fallback;
    const auto v = json_numbers(j, key, 3);
    return {v[0], v[1], v[2]};
}

inline std::optional<double> json_opt(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return json_number(j.at(key));
}

}  // namespace detail

inline std::unique_ptr<UdfField> make_field(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    const std::string family = j.at("family").get<std::string>();
    auto path = [&](const char* key) {
        const std::filesystem::path p = j.at(key).get<std::string>();
        return p.is_absolute() ? p : base_dir / p;
    };
    if (family == "sphere" || family == "sphere-shell") {
        const auto p = detail::json_numbers(j, "params", 1);
        return std::make_unique<SphereShellUdf>(p[0], detail::json_vec3(j, "center", {}));
    }
    if (family == "plane") {
        const auto p = detail::json_numbers(j, "params", 1);
        return std::make_unique<PlaneUdf>(detail::json_vec3(j, "normal", {0, 0, 1}), p[0]);
    }
    if (family == "plane-patch") {
        const auto p = detail::json_numbers(j, "params", 5);
        return std::make_unique<PlanePatchUdf>(p[0], p[1], p[2], p[3], p[4]);
    }
    if (family == "half-plane") {
        const auto p = detail::json_numbers(j, "params", 1);
        return std::make_unique<HalfPlaneUdf>(p[0], j.value("height", 0.0));
    }
    if (family == "open-cylinder") {
        const auto p = detail::json_numbers(j, "params", 3);
        std::vector<double> axis{0.0, 0.0};
        if (j.contains("axis")) axis = detail::json_numbers(j, "axis", 2);
        return std::make_unique<OpenCylinderUdf>(axis[0], axis[1], p[0], p[1], p[2]);
    }
    if (family == "mesh") return std::make_unique<MeshUdf>(read_mesh(path("mesh")), detail::json_opt(j, "d_max"));
    if (family == "translated-mesh") {
        auto base = std::make_shared<const MeshUdf>(read_mesh(path("mesh")), detail::json_opt(j, "d_max"));
        Vec3 t{};
        if (j.contains("params")) {
            const auto p = detail::json_numbers(j, "params", 3);
            t = {p[0], p[1], p[2]};
        }
        return std::make_unique<TranslatedMeshUdf>(std::move(base), t);
    }
    if (family == "mlp") {
        auto net = std::make_unique<MlpUdf>(read_weights(path("weights")));
        if (j.contains("latent")) {
            const auto z = detail::json_numbers(j, "latent", net->param_dim());
            return net->with_params(z);
        }
        return net;
    }
    throw std::invalid_argument("unknown field family '" + family + "'");
}

inline std::unique_ptr<UdfField> read_field(const std::filesystem::path& p) {
    const auto j = read_json(p);
    try {
        return make_field(j, p.parent_path());
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& e) {
        throw IoError(p.string() + ": " + e.what());
    }
}

}  // namespace udfmc
