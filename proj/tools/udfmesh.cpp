// udfmesh: mesh unsigned distance fields, evaluate meshes, fit parameters.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "udfmc/udfmc.hpp"

namespace {

using namespace udfmc;

struct GridArgs {
    std::uint32_t res = 129;
    std::vector<double> bounds{-1.0, -1.0, -1.0, 1.0, 1.0, 1.0};

    GridSpec spec() const {
        if (bounds.size() != 6) throw std::invalid_argument("--bounds needs six values");
        GridSpec s;
        s.bounds_min = {bounds[0], bounds[1], bounds[2]};
        s.bounds_max = {bounds[3], bounds[4], bounds[5]};
        s.resolution = res;
        s.validate();
        return s;
    }
};

void add_source(CLI::App* app, FieldSource& src) {
    app->add_option("--mesh", src.mesh, "Reference mesh (.obj/.ply); meshes its exact unsigned distance");
    app->add_option("--weights", src.weights, "MLP weight file (JSON)");
    app->add_option("--field", src.field_json, "Field description (JSON)");
    app->add_option("--family", src.family, "Analytic family: sphere, plane, plane-patch, open-cylinder");
    app->add_option("--params", src.params, "Family parameters (or MLP latent code)")->expected(1, -1);
}

void add_grid(CLI::App* app, GridArgs& g) {
    app->add_option("--res", g.res, "Lattice corners per axis")->capture_default_str();
    app->add_option("--bounds", g.bounds, "xmin ymin zmin xmax ymax zmax")->expected(6)->capture_default_str();
}

void add_post(CLI::App* app, PostprocessOptions& post, bool& no_prune, bool& no_smooth, double& prune_tol) {
    app->add_flag("--no-prune", no_prune, "Keep facets with vertices off the zero set");
    app->add_flag("--no-smooth", no_smooth, "Skip border smoothing");
    app->add_option("--prune-tol", prune_tol, "Pruning threshold (default: half the cell diagonal)");
    app->add_option("--smooth-steps", post.smooth_steps, "Border smoothing steps")->capture_default_str();
}

void finish_post(PostprocessOptions& post, bool no_prune, bool no_smooth, double prune_tol) {
    post.prune = !no_prune;
    post.smooth = !no_smooth;
    if (prune_tol > 0.0) post.prune_tol = prune_tol;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mesh unsigned distance fields with pseudo-signed marching cubes"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: UDF_MESHER_THREADS or all cores)");

    GridArgs grid;
    bool no_prune = false, no_smooth = false;
    double prune_tol = 0.0;

    // mesh
    MeshCommand mesh_cmd;
    auto* mesh = app.add_subcommand("mesh", "Extract an open surface from a field");
    add_source(mesh, mesh_cmd.source);
    mesh->add_option("--grid", mesh_cmd.grid_dump, "Grid dump sidecar (.json) to mesh instead of a field");
    add_grid(mesh, grid);
    add_post(mesh, mesh_cmd.post, no_prune, no_smooth, prune_tol);
    mesh->add_option("--cull", mesh_cmd.extract.cull_factor, "Cell culling factor")->capture_default_str();
    mesh->add_option("--grad-min", mesh_cmd.extract.grad_norm_min, "Minimum anchor gradient norm")
        ->capture_default_str();
    mesh->add_option("--out", mesh_cmd.out, "Output mesh (.obj/.ply)");

    // mesh-inflate
    InflateCommand inflate_cmd;
    double inflate_eps = 0.0;
    auto* inflate = app.add_subcommand("mesh-inflate", "Mesh the eps-isolevel with marching cubes (baseline)");
    add_source(inflate, inflate_cmd.source);
    add_grid(inflate, grid);
    inflate->add_option("--eps", inflate_eps, "Isolevel (default: 0.55 x step)");
    inflate->add_option("--out", inflate_cmd.out, "Output mesh (.obj/.ply)");

    // metrics
    MetricsCommand metrics_cmd;
    bool no_ic = false;
    auto* metrics = app.add_subcommand("metrics", "Chamfer, normal and image consistency between two meshes");
    metrics->add_option("--pred", metrics_cmd.pred, "Predicted mesh")->required();
    metrics->add_option("--gt", metrics_cmd.gt, "Reference mesh")->required();
    metrics->add_option("--samples", metrics_cmd.options.samples, "Surface samples per mesh")->capture_default_str();
    metrics->add_option("--seed", metrics_cmd.options.seed, "Sampling seed")->capture_default_str();
    metrics->add_flag("--no-ic", no_ic, "Skip image consistency");
    metrics->add_option("--out", metrics_cmd.out, "Report (JSON)");

    // fit-pc
    FitCommand fit_cmd;
    bool no_border_grads = false;
    std::vector<int> free_params;
    auto* fit = app.add_subcommand("fit-pc", "Fit field parameters to a point cloud through the mesh");
    add_source(fit, fit_cmd.source);
    fit->add_option("--target", fit_cmd.target, "Target points (XYZ text)")->required();
    add_grid(fit, grid);
    fit->add_option("--iters", fit_cmd.fit.iters, "Iterations")->capture_default_str();
    fit->add_option("--lr", fit_cmd.fit.lr, "Learning rate")->capture_default_str();
    fit->add_option("--lr-decay", fit_cmd.fit.lr_decay, "Per-iteration learning-rate factor")->capture_default_str();
    fit->add_flag("--adam", fit_cmd.fit.adam, "Adaptive-moment updates instead of plain gradient descent");
    fit->add_option("--reg", fit_cmd.fit.reg_weight, "Weight of the squared parameter norm")->capture_default_str();
    fit->add_option("--samples", fit_cmd.fit.samples, "Surface samples per iteration")->capture_default_str();
    fit->add_option("--seed", fit_cmd.fit.seed, "Sampling seed")->capture_default_str();
    fit->add_option("--alpha", fit_cmd.fit.jacobian.alpha, "Probe offset for derivatives")->capture_default_str();
    fit->add_option("--free", free_params, "Indices of parameters to optimize (default: all)");
    fit->add_flag("--no-border-grads", no_border_grads, "Use the interior formula at border vertices too");
    add_post(fit, fit_cmd.fit.post, no_prune, no_smooth, prune_tol);
    fit->add_option("--trace", fit_cmd.trace, "Loss trace (CSV)");
    fit->add_option("--out", fit_cmd.out, "Fitted parameters (JSON)");

    // gradcheck
    GradcheckCommand gc_cmd;
    auto* gc = app.add_subcommand("gradcheck", "Compare vertex derivatives with finite differences");
    add_source(gc, gc_cmd.source);
    add_grid(gc, grid);
    gc->add_option("--alpha", gc_cmd.options.jacobian.alpha, "Probe offset for derivatives")->capture_default_str();
    gc->add_option("--eps", gc_cmd.options.epsilons, "Finite-difference steps")->capture_default_str();
    gc->add_option("--random-dirs", gc_cmd.options.random_directions, "Extra random directions")
        ->capture_default_str();
    gc->add_option("--seed", gc_cmd.options.seed, "Seed for random directions")->capture_default_str();
    gc->add_option("--rel-tol", gc_cmd.options.rel_tol, "Relative tolerance")->capture_default_str();
    gc->add_option("--abs-tol", gc_cmd.options.abs_tol, "Absolute tolerance")->capture_default_str();
    gc->add_flag("--no-border-grads", no_border_grads, "Use the interior formula at border vertices too");
    add_post(gc, gc_cmd.options.post, no_prune, no_smooth, prune_tol);
    gc->add_option("--csv", gc_cmd.csv, "Per-vertex comparison (CSV)");

    // dump-grid
    DumpGridCommand dump_cmd;
    bool no_gradient = false;
    auto* dump = app.add_subcommand("dump-grid", "Write sampled field values as raw float32 plus JSON sidecar");
    add_source(dump, dump_cmd.source);
    add_grid(dump, grid);
    dump->add_flag("--no-gradient", no_gradient, "Write only the distance channel");
    dump->add_option("--out", dump_cmd.out, "Raw output path (.raw)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*mesh) {
            mesh_cmd.grid = grid.spec();
            mesh_cmd.extract.threads = threads;
            finish_post(mesh_cmd.post, no_prune, no_smooth, prune_tol);
            return cmd_mesh(mesh_cmd, std::cout);
        }
        if (*inflate) {
            inflate_cmd.grid = grid.spec();
            inflate_cmd.threads = threads;
            if (inflate_eps > 0.0) inflate_cmd.eps = inflate_eps;
            return cmd_mesh_inflate(inflate_cmd, std::cout);
        }
        if (*metrics) {
            metrics_cmd.options.threads = threads;
            metrics_cmd.options.image_consistency = !no_ic;
            return cmd_metrics(metrics_cmd, std::cout);
        }
        if (*fit) {
            fit_cmd.fit.grid = grid.spec();
            fit_cmd.fit.extract.threads = threads;
            fit_cmd.fit.jacobian.threads = threads;
            fit_cmd.fit.jacobian.border_grads = !no_border_grads;
            finish_post(fit_cmd.fit.post, no_prune, no_smooth, prune_tol);
            if (!free_params.empty()) {
                const auto field = load_field(fit_cmd.source);
                fit_cmd.fit.free_params.assign(field->param_dim(), false);
                for (int k : free_params) {
                    if (k < 0 || static_cast<std::size_t>(k) >= field->param_dim())
                        throw std::invalid_argument("--free index " + std::to_string(k) + " out of range");
                    fit_cmd.fit.free_params[static_cast<std::size_t>(k)] = true;
                }
            }
            return cmd_fit_pc(fit_cmd, std::cout);
        }
        if (*gc) {
            gc_cmd.options.grid = grid.spec();
            gc_cmd.options.extract.threads = threads;
            gc_cmd.options.jacobian.threads = threads;
            gc_cmd.options.jacobian.border_grads = !no_border_grads;
            finish_post(gc_cmd.options.post, no_prune, no_smooth, prune_tol);
            return cmd_gradcheck(gc_cmd, std::cout);
        }
        if (*dump) {
            dump_cmd.grid = grid.spec();
            dump_cmd.threads = threads;
            dump_cmd.with_gradient = !no_gradient;
            return cmd_dump_grid(dump_cmd, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
