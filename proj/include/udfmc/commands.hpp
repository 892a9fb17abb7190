#pragma once

// Library entry points behind the udfmesh subcommands. Each returns the
// process exit code: 0 ok, 1 check failure; input errors throw IoError or
// std::invalid_argument, which the front end maps to 2.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "extract.hpp"
#include "field_factory.hpp"
#include "fit.hpp"
#include "gradcheck.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "postprocess.hpp"

namespace udfmc {

/// Exactly one of the members selects the field.
struct FieldSource {
    std::filesystem::path mesh;
    std::filesystem::path weights;
    std::filesystem::path field_json;
    std::string family;
    std::vector<double> params;
};

inline std::unique_ptr<UdfField> load_field(const FieldSource& src) {
    const int given = !src.mesh.empty() + !src.weights.empty() + !src.field_json.empty() + !src.family.empty();
    if (given != 1) throw std::invalid_argument("specify exactly one of --mesh, --weights, --field, --family");
    if (!src.field_json.empty()) return read_field(src.field_json);
    nlohmann::json j;
    if (!src.mesh.empty()) {
        j = {{"family", "mesh"}, {"mesh", src.mesh.string()}};
    } else if (!src.weights.empty()) {
        j = {{"family", "mlp"}, {"weights", src.weights.string()}};
        if (!src.params.empty()) j["latent"] = src.params;
    } else {
        j = {{"family", src.family}, {"params", src.params}};
    }
    return make_field(j);
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

/// Throws with the first lattice position where the field is not finite.
inline void check_finite(const GridSamples& s) {
    for (std::uint64_t i = 0; i < s.u.size(); ++i)
        if (!std::isfinite(s.u[i])) {
            const Point3 p = s.spec.corner_position(i);
            std::ostringstream msg;
            msg << "field value is not finite at corner " << i << " " << p;
            throw std::runtime_error(msg.str());
        }
}

inline void print_stats(std::ostream& log, const ExtractStats& st) {
    log << "cells: total " << st.total_cells << ", candidate " << st.candidate_cells << ", triangulated "
        << st.triangulated_cells << "\n"
        << "skipped: culled " << st.culled_cells << ", no-valid-anchor " << st.skipped_no_anchor
        << ", no-crossing " << st.skipped_no_crossing << "\n"
        << "inconsistent lattice edges: " << st.inconsistent_edges << "\n";
}

inline void print_mesh(std::ostream& log, const char* what, const TriMesh& m) {
    log << what << ": " << m.num_vertices() << " vertices, " << m.num_faces() << " faces, "
        << count_border_edges(m) << " border edges\n";
}

}  // namespace detail

struct MeshCommand {
    FieldSource source;
    /// Mesh a grid dump (JSON sidecar path) instead of sampling a field.
    std::filesystem::path grid_dump;
    GridSpec grid;
    ExtractOptions extract;
    PostprocessOptions post;
    std::filesystem::path out;
};

inline int cmd_mesh(const MeshCommand& cmd, std::ostream& log) {
    std::unique_ptr<UdfField> field;
    std::shared_ptr<GridSamples> samples;
    auto t = std::chrono::steady_clock::now();
    if (!cmd.grid_dump.empty()) {
        samples = std::make_shared<GridSamples>(read_grid_dump(cmd.grid_dump));
        field = std::make_unique<TrilinearGridUdf>(samples);
    } else {
        field = load_field(cmd.source);
        samples = std::make_shared<GridSamples>(sample_grid(*field, cmd.grid, cmd.extract.threads));
    }
    const double t_sample = detail::seconds_since(t);
    detail::check_finite(*samples);
    ExtractResult ex = extract_from_samples(*samples, cmd.extract);
    ex.stats.sample_seconds = t_sample;
    t = std::chrono::steady_clock::now();
    const TriMesh mesh = postprocess(ex.mesh, *field, samples->spec, cmd.post, cmd.extract.threads);
    const double t_post = detail::seconds_since(t);

    detail::print_stats(log, ex.stats);
    detail::print_mesh(log, "raw mesh", ex.mesh);
    detail::print_mesh(log, "final mesh", mesh);
    log << std::fixed << std::setprecision(3) << "time: sample " << ex.stats.sample_seconds << " s, extract "
        << ex.stats.extract_seconds << " s, postprocess " << t_post << " s\n"
        << std::defaultfloat;
    if (!cmd.out.empty()) write_mesh(mesh, cmd.out);
    return 0;
}

struct InflateCommand {
    FieldSource source;
    GridSpec grid;
    std::optional<double> eps;  // default 0.55 x step
    unsigned threads = 0;
    std::filesystem::path out;
};

inline int cmd_mesh_inflate(const InflateCommand& cmd, std::ostream& log) {
    const auto field = load_field(cmd.source);
    const double eps = cmd.eps.value_or(default_inflation_eps(cmd.grid));
    const auto t = std::chrono::steady_clock::now();
    const TriMesh mesh = inflate_mesh(*field, cmd.grid, eps, cmd.threads);
    log << "eps " << eps << "\n";
    detail::print_mesh(log, "inflated mesh", mesh);
    log << std::fixed << std::setprecision(3) << "time: " << detail::seconds_since(t) << " s\n" << std::defaultfloat;
    if (!cmd.out.empty()) write_mesh(mesh, cmd.out);
    return 0;
}

struct MetricsCommand {
    std::filesystem::path pred;
    std::filesystem::path gt;
    MetricsOptions options;
    std::filesystem::path out;
};

inline nlohmann::json metrics_json(const MetricsReport& r, const MetricsOptions& opts) {
    nlohmann::json j;
    j["chd"] = r.chd;
    j["chd_x1e3"] = r.chd * 1e3;
    j["nc"] = r.nc;
    if (opts.image_consistency) {
        j["ic"] = r.ic;
        j["ic_cos_domain"] = "co-covered pixels";
        nlohmann::json views = nlohmann::json::array();
        for (const auto& v : r.views)
            views.push_back({{"skipped", v.skipped}, {"iou", v.iou}, {"cos", v.cos}, {"union_pixels", v.union_pixels},
                             {"co_covered_pixels", v.co_covered_pixels}});
        j["views"] = views;
    }
    j["samples"] = opts.samples;
    j["seed"] = opts.seed;
    j["warnings"] = r.warnings;
    j["timing"] = r.timing;
    return j;
}

inline int cmd_metrics(const MetricsCommand& cmd, std::ostream& log) {
    const TriMesh pred = read_mesh(cmd.pred);
    const TriMesh gt = read_mesh(cmd.gt);
    if (pred.empty()) throw std::invalid_argument("'" + cmd.pred.string() + "' has no faces");
    if (gt.empty()) throw std::invalid_argument("'" + cmd.gt.string() + "' has no faces");
    const MetricsReport r = evaluate_meshes(pred, gt, cmd.options);
    for (const auto& w : r.warnings) log << "warning: " << w << "\n";
    log << "CHD " << r.chd << " (x1e3: " << r.chd * 1e3 << ")\nNC " << r.nc << "\n";
    if (cmd.options.image_consistency) log << "IC " << r.ic << "\n";
    if (!cmd.out.empty()) {
        auto out = detail::open_out(cmd.out);
        out << metrics_json(r, cmd.options).dump(2) << '\n';
    }
    return 0;
}

struct FitCommand {
    FieldSource source;
    std::filesystem::path target;
    FitOptions fit;
    std::filesystem::path trace;  // CSV: iter,chamfer,reg,total
    std::filesystem::path out;    // JSON with the fitted parameters
};

inline int cmd_fit_pc(const FitCommand& cmd, std::ostream& log) {
    const auto field = load_field(cmd.source);
    const auto target = read_xyz(cmd.target);
    if (target.empty()) throw std::invalid_argument("'" + cmd.target.string() + "' contains no points");
    std::ofstream trace;
    if (!cmd.trace.empty()) {
        trace = detail::open_out(cmd.trace);
        trace << "iter,chamfer,reg,total\n";
    }
    const FitResult res = fit_point_cloud(*field, target, cmd.fit, [&](const FitIteration& it) {
        if (trace.is_open()) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g\n", it.iter, it.chamfer, it.reg, it.total);
            trace << buf;
        }
    });
    for (const auto& e : res.events) log << e << "\n";
    if (!res.trace.empty()) log << "initial loss " << res.trace.front().total << ", final loss " << res.trace.back().total << "\n";
    log << "params:";
    for (double c : res.params) log << ' ' << c;
    log << "\n";
    if (!cmd.out.empty()) {
        nlohmann::json j;
        j["params"] = nlohmann::json::array();
        for (double c : res.params) j["params"].push_back(std::isfinite(c) ? nlohmann::json(c) : nlohmann::json(c > 0 ? "inf" : "-inf"));
        j["iterations"] = res.trace.size();
        j["events"] = res.events;
        auto out = detail::open_out(cmd.out);
        out << j.dump(2) << '\n';
    }
    return 0;
}

struct GradcheckCommand {
    FieldSource source;
    GradcheckOptions options;
    std::filesystem::path csv;
};

inline int cmd_gradcheck(const GradcheckCommand& cmd, std::ostream& log) {
    const auto field = load_field(cmd.source);
    const GradcheckReport rep = gradcheck(*field, cmd.options);
    if (!cmd.csv.empty()) {
        auto out = detail::open_out(cmd.csv);
        write_gradcheck_csv(rep, out);
    }
    if (rep.param_dim == 0) {
        log << "PASS: " << rep.message << "\n";
        return 0;
    }
    log << "compared " << rep.entries.size() << " vertex displacements (" << rep.mesh_vertices
        << " vertices); skipped: unmatched " << rep.skipped_unmatched << ", grazing edge " << rep.skipped_alignment
        << ", off surface " << rep.skipped_off_surface << ", no level crossing " << rep.skipped_no_crossing << "\n";
    if (rep.pass) {
        log << "PASS\n";
        return 0;
    }
    log << "FAIL: " << rep.message << "\n";
    return 1;
}

struct DumpGridCommand {
    FieldSource source;
    GridSpec grid;
    bool with_gradient = true;
    unsigned threads = 0;
    std::filesystem::path out;  // .raw; the sidecar gets .json
};

inline int cmd_dump_grid(const DumpGridCommand& cmd, std::ostream& log) {
    if (cmd.out.empty()) throw std::invalid_argument("dump-grid needs --out");
    const auto field = load_field(cmd.source);
    const GridSamples g = sample_grid(*field, cmd.grid, cmd.threads);
    write_grid_dump(g, cmd.out, cmd.with_gradient);
    log << "wrote " << g.u.size() << " corners to " << cmd.out.string() << "\n";
    return 0;
}

}  // namespace udfmc
