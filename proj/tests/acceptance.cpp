// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fixtures.hpp"
#include "oracles/signed_mc.hpp"
#include "udfmc/udfmc.hpp"

using namespace udfmc;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t) {
    return std::chrono::duration<double>(clock_type::now() - t).count();
}

GridSpec grid(std::uint32_t n) {
    GridSpec g;
    g.resolution = n;
    return g;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

int failures = 0;

void report(int id, bool pass, const std::string& title, const std::string& detail) {
    if (!pass) ++failures;
    std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << id << "  " << title << ": " << detail << std::endl;
}

constexpr double kPatchZ = 0.0031;  // keeps the patch off lattice planes

TriMesh ours(const UdfField& f, const GridSpec& g, unsigned threads = 0) {
    ExtractOptions eo;
    eo.threads = threads;
    return postprocess(extract_mesh(f, g, eo).mesh, f, g, {}, threads);
}

double chd(const TriMesh& pred, const TriMesh& gt, std::size_t n = 30000) {
    return chamfer(sample_points(sample_surface(pred, n, 1)), sample_points(sample_surface(gt, n, 2)));
}

// Faces with a vertex farther than half a step from every reference sheet.
std::size_t off_sheet_faces(const TriMesh& m, const std::vector<double>& sheet_z, double step) {
    std::size_t n = 0;
    for (const auto& f : m.faces) {
        bool on_one = false;
        for (double z : sheet_z) {
            bool all = true;
            for (auto v : f) all &= std::abs(m.vertices[v].z - z) < 0.5 * step;
            on_one |= all;
        }
        n += !on_one;
    }
    return n;
}

// ---------------------------------------------------------------------------

void criterion1() {
    const auto t = clock_type::now();
    const Vec3 n = normalized(Vec3{0.3, 0.5, 0.8});
    const PlaneUdf plane(n, 0.0123);
    const SphereShellUdf sphere(0.5);
    struct Case {
        const char* name;
        const UdfField* udf;
        std::function<double(const Vec3&)> sdf;
    };
    const Case cases[] = {{"plane", &plane, [&](const Vec3& x) { return dot(n, x) - 0.0123; }},
                          {"sphere", &sphere, [](const Vec3& x) { return norm(x) - 0.5; }}};
    bool pass = true;
    double worst = 0.0;
    std::ostringstream d;
    for (const auto& c : cases)
        for (std::uint32_t res : {17u, 33u, 65u}) {
            const GridSpec g = grid(res);
            const TriMesh m = extract_mesh(*c.udf, g).mesh;
            const auto ref = oracle::signed_marching_cubes(c.sdf, g.bounds_min, g.bounds_max, static_cast<int>(res));
            const KdTree tm(m.vertices), tr(ref.vertices);
            double dist = 0.0;
            for (const auto& p : ref.vertices) dist = std::max(dist, std::sqrt(tm.nearest(p).squared_distance));
            for (const auto& p : m.vertices) dist = std::max(dist, std::sqrt(tr.nearest(p).squared_distance));
            const bool ok = m.num_faces() == ref.faces.size() && m.num_vertices() == ref.vertices.size() && dist < 1e-6;
            if (!ok)
                d << c.name << " N=" << res << " faces " << m.num_faces() << "/" << ref.faces.size() << " vertices "
                  << m.num_vertices() << "/" << ref.vertices.size() << "; ";
            pass &= ok;
            worst = std::max(worst, dist);
        }
    const double secs = seconds_since(t);
    pass &= secs < 5.0;
    d << "6 runs (|plane|, ||x|-0.5|; N=17,33,65), face and vertex counts equal, max vertex distance "
      << fmt("%.2e", worst) << " (tol 1e-6), " << fmt("%.2f", secs) << " s (limit 5 s)";
    report(1, pass, "signed-MC equivalence", d.str());
}

void criterion2() {
    const auto t = clock_type::now();
    const TriMesh gt = fixtures::unit_patch(kPatchZ);
    const MeshUdf f(gt);
    const GridSpec g = grid(129);
    const TriMesh m = ours(f, g);
    const double secs = seconds_since(t);
    const double c = chd(m, gt);
    const double step = g.max_step(), limit = (0.25 * step) * (0.25 * step);
    const std::size_t spurious = off_sheet_faces(m, {kPatchZ}, step);
    const std::size_t border = count_border_edges(m);
    // Floor set by sampling alone: two independent 30k sample sets of the
    // reference patch itself.
    const double floor = chamfer(sample_points(sample_surface(gt, 30000, 3)), sample_points(sample_surface(gt, 30000, 2)));
    const bool pass = c < limit && spurious == 0 && border > 0 && secs < 10.0;
    report(2, pass, "open-surface fidelity",
           "N=129 CHD " + fmt("%.4e", c) + " vs limit (0.25 step)^2 = " + fmt("%.4e", limit) +
               "; reference-vs-reference CHD with the same sampling " + fmt("%.4e", floor) +
               "; spurious faces " + std::to_string(spurious) + ", border edges " + std::to_string(border) + ", " +
               fmt("%.2f", secs) + " s (limit 10 s)");
}

void criterion3() {
    const auto t = clock_type::now();
    std::ostringstream d;
    bool pass = true;

    const GridSpec g = grid(129);
    const double step = g.max_step();
    const TriMesh patch = fixtures::unit_patch(kPatchZ);
    const TriMesh two = fixtures::append(fixtures::unit_patch(kPatchZ), fixtures::unit_patch(kPatchZ + 3 * step));
    for (const auto& [name, gt] : {std::pair<const char*, const TriMesh&>{"patch", patch}, {"two-patch", two}}) {
        const MeshUdf f(gt);
        const TriMesh a = ours(f, g);
        const TriMesh b = inflate_mesh(f, g, default_inflation_eps(g));
        const double ca = chd(a, gt), cb = chd(b, gt);
        const std::size_t ba = count_border_edges(a), bb = count_border_edges(b);
        pass &= ca < cb && bb == 0 && ba > 0;
        d << name << " CHD ours " << fmt("%.3e", ca) << " < inflation " << fmt("%.3e", cb) << ", border edges ours "
          << ba << " inflation " << bb << "; ";
    }

    // Resolution sweep on the patch. Roughly flat: max/min over the sweep at
    // most 2. Inflation must decrease strictly with N.
    std::vector<double> a_sweep, b_sweep;
    const MeshUdf f(patch);
    for (std::uint32_t res : {33u, 65u, 129u, 257u}) {
        const GridSpec gs = grid(res);
        a_sweep.push_back(chd(ours(f, gs), patch));
        b_sweep.push_back(chd(inflate_mesh(f, gs, default_inflation_eps(gs)), patch));
    }
    const double flat = *std::max_element(a_sweep.begin(), a_sweep.end()) /
                        *std::min_element(a_sweep.begin(), a_sweep.end());
    bool decreasing = true;
    for (std::size_t i = 1; i < b_sweep.size(); ++i) decreasing &= b_sweep[i] < b_sweep[i - 1];
    pass &= flat <= 2.0 && decreasing;
    d << "sweep N=33/65/129/257 ours";
    for (double v : a_sweep) d << " " << fmt("%.2e", v);
    d << " (max/min " << fmt("%.2f", flat) << ", limit 2), inflation";
    for (double v : b_sweep) d << " " << fmt("%.2e", v);
    d << (decreasing ? " (strictly decreasing)" : " (NOT decreasing)") << "; " << fmt("%.1f", seconds_since(t)) << " s";
    report(3, pass, "inflation ordering", d.str());
}

void criterion4() {
    const auto t = clock_type::now();
    const PlaneUdf plane({0, 0, 1}, 0.0123);
    const SphereShellUdf sphere(0.5);
    const HalfPlaneUdf half(0.0123, kPatchZ);
    std::ostringstream d;
    bool pass = true;
    for (const auto& [name, f] : {std::pair<const char*, const UdfField*>{"translated-plane", &plane},
                                  {"sphere-radius", &sphere},
                                  {"half-plane-border", &half}}) {
        GradcheckOptions o;
        o.grid = grid(65);
        const GradcheckReport r = gradcheck(*f, o);
        std::size_t border = 0;
        for (const auto& e : r.entries) border += e.kind == VertexKind::border;
        pass &= r.pass && !r.entries.empty();
        d << name << " " << (r.pass ? "ok" : "FAILED") << " (" << r.entries.size() << " checks, " << border
          << " border); ";
        if (!r.pass) d << r.message << "; ";
    }

    // n -> -n leaves n * dv/dc unchanged, bit for bit.
    std::size_t compared = 0, mismatched = 0;
    for (const UdfField* f : std::initializer_list<const UdfField*>{&plane, &sphere, &half}) {
        const GridSpec g = grid(33);
        const TriMesh m = ours(*f, g);
        const auto vf = vertex_faces(m);
        for (std::uint32_t v = 0; v < m.vertices.size(); ++v) {
            const Vec3 n = vertex_normal(m, vf[v]);
            const auto a = interior_vertex_derivative(*f, m.vertices[v], n, 1e-2);
            const auto b = interior_vertex_derivative(*f, m.vertices[v], -n, 1e-2);
            for (std::size_t k = 0; k < a.size(); ++k) {
                ++compared;
                mismatched += !(n * a[k] == (-n) * b[k]);
            }
        }
    }
    const double secs = seconds_since(t);
    pass &= mismatched == 0 && compared > 0 && secs < 30.0;
    d << "N=65, eps 1e-3 and 1e-4, alpha 1e-2, tol max(0.1 |pred|, 1e-4); sign flip exact on " << compared - mismatched
      << "/" << compared << " vertex derivatives; " << fmt("%.1f", secs) << " s (limit 30 s)";
    report(4, pass, "derivative correctness", d.str());
}

void criterion5() {
    const auto t = clock_type::now();
    std::ostringstream d;

    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    std::vector<Point3> sphere_target;
    for (int i = 0; i < 200; ++i) sphere_target.push_back(normalized(Vec3{gauss(rng), gauss(rng), gauss(rng)}) * 0.4);
    FitOptions o;
    o.grid = grid(129);
    o.iters = 100;
    o.lr = 5e-3;
    const FitResult r = fit_point_cloud(SphereShellUdf(0.6), sphere_target, o);
    const double err = std::abs(r.params[0] - 0.4);
    bool pass = err < 1e-3 && r.trace.size() <= 100;
    d << "sphere N=129, lr 5e-3, " << r.trace.size() << " iterations: r = " << fmt("%.6f", r.params[0]) << ", |r - 0.4| "
      << fmt("%.2e", err) << " (tol 1e-3); ";

    // Border extension: sheet x <= -0.3 toward a target covering x <= 0.2.
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<Point3> half_target;
    for (int i = 0; i < 400; ++i) {
        const double x = uni(rng) * 0.6 - 0.4, y = uni(rng);
        half_target.push_back({x, y, kPatchZ});
    }
    double loss[2] = {0.0, 0.0};
    double border[2] = {0.0, 0.0};
    for (int with = 0; with < 2; ++with) {
        FitOptions h;
        h.grid = grid(65);
        h.iters = 60;
        h.lr = 5e-3;
        h.jacobian.border_grads = with == 1;
        const FitResult fr = fit_point_cloud(HalfPlaneUdf(-0.3, kPatchZ), half_target, h);
        loss[with] = fr.trace.back().chamfer;
        border[with] = fr.params[0];
    }
    pass &= loss[0] > loss[1];
    d << "half-plane N=65, 60 iterations: final loss with border terms " << fmt("%.4f", loss[1]) << " (border x "
      << fmt("%.3f", border[1]) << ") vs without " << fmt("%.4f", loss[0]) << " (border x " << fmt("%.3f", border[0])
      << "); " << fmt("%.1f", seconds_since(t)) << " s";
    report(5, pass, "fitting convergence", d.str());
}

void criterion6() {
    const auto t = clock_type::now();
    std::ostringstream d;
    bool pass = true;

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<Point3> a(200), b(200);
    for (auto& p : a) p = {uni(rng), uni(rng), uni(rng)};
    for (auto& p : b) p = {uni(rng), uni(rng), uni(rng)};
    auto one_way = [](const std::vector<Point3>& p, const std::vector<Point3>& q) {
        double sum = 0.0;
        for (const auto& x : p) {
            double best = HUGE_VAL;
            for (const auto& y : q) best = std::min(best, squared_norm(y - x));
            sum += best;
        }
        return sum / static_cast<double>(p.size());
    };
    const double brute = one_way(a, b) + one_way(b, a), fast = chamfer(a, b);
    pass &= brute == fast;
    d << "chamfer vs brute force on 200-point sets: diff " << fmt("%.1e", std::abs(brute - fast)) << " (exact); ";

    const auto s = sample_surface(fixtures::octahedron(), 5000, 1);
    const auto q = sample_points(sample_surface(fixtures::octahedron(), 5000, 2));
    const auto p = sample_points(s);
    std::vector<Vec3> n, flipped;
    for (std::size_t i = 0; i < s.size(); ++i) {
        n.push_back(s[i].normal);
        flipped.push_back(i % 2 ? -s[i].normal : s[i].normal);
    }
    std::vector<Vec3> nq;
    for (const auto& x : sample_surface(fixtures::octahedron(), 5000, 2)) nq.push_back(x.normal);
    const bool nc_ok = normal_consistency(p, n, q, nq) == normal_consistency(p, flipped, q, nq);
    pass &= nc_ok;
    d << "NC under normal flips " << (nc_ok ? "unchanged" : "CHANGED") << "; ";

    double worst_ic = 100.0;
    for (const TriMesh& m : {fixtures::octahedron(), fixtures::unit_patch(kPatchZ),
                             fixtures::cylinder(0.4, -0.5, 0.5, 48, 6), ours(SphereShellUdf(0.5), grid(65))})
        worst_ic = std::min(worst_ic, image_consistency(m, m).ic);
    pass &= worst_ic >= 99.5;
    d << "min IC(M,M) over 4 meshes " << fmt("%.3f", worst_ic) << " (limit 99.5); ";

    // The metric unit suite as a whole.
    const auto ts = clock_type::now();
    const int status = std::system((std::string(UDFMC_METRICS_TESTS) + " > /dev/null 2>&1").c_str());
    const double suite = seconds_since(ts);
    const bool suite_ok = status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0 && suite < 10.0;
    pass &= suite_ok;
    d << "metric unit tests " << (suite_ok ? "pass" : "FAIL") << " in " << fmt("%.2f", suite) << " s (limit 10 s); "
      << fmt("%.1f", seconds_since(t)) << " s";
    report(6, pass, "metric self-tests", d.str());
}

void criterion7() {
    const auto t = clock_type::now();
    std::ostringstream d;
    const GridSpec g = grid(65);
    const double step = g.max_step();
    const double za = kPatchZ, zb = kPatchZ + 3 * step;
    const MeshUdf f(fixtures::append(fixtures::unit_patch(za), fixtures::unit_patch(zb)));
    const TriMesh raw = extract_mesh(f, g).mesh;
    const TriMesh pruned = remove_spurious_facets(raw, f, 0.5 * g.cell_diagonal());
    const std::size_t before = off_sheet_faces(raw, {za, zb}, step), after = off_sheet_faces(pruned, {za, zb}, step);
    bool pass = before > 0 && after == 0;
    d << "patches 3 cells apart at N=65: spurious faces " << before << " before pruning, " << after << " after; ";

    // Fan whose rim radius follows a period-4 triangle wave.
    TriMesh fan;
    fan.vertices.push_back({0, 0, 0});
    const double wave[4] = {0.0, 1.0, 0.0, -1.0};
    const int segments = 64;
    for (int i = 0; i < segments; ++i) {
        const double a = 2.0 * std::numbers::pi * i / segments, r = 1.0 + 0.05 * wave[i % 4];
        fan.vertices.push_back({r * std::cos(a), r * std::sin(a), 0});
    }
    for (int i = 0; i < segments; ++i)
        fan.faces.push_back({0, static_cast<std::uint32_t>(1 + i), static_cast<std::uint32_t>(1 + (i + 1) % segments)});
    auto amplitude = [](const TriMesh& m) {
        double mean = 0.0, amp = 0.0;
        for (std::size_t i = 1; i < m.vertices.size(); ++i) mean += norm(m.vertices[i]);
        mean /= static_cast<double>(m.vertices.size() - 1);
        for (std::size_t i = 1; i < m.vertices.size(); ++i) amp = std::max(amp, std::abs(norm(m.vertices[i]) - mean));
        return amp;
    };
    d << "zig-zag amplitude " << fmt("%.4f", amplitude(fan));
    for (int s = 0; s < 5; ++s) {
        const double prev = amplitude(fan);
        fan = smooth_borders(fan, 1, 0.5);
        const double next = amplitude(fan);
        pass &= next < prev;
        d << " -> " << fmt("%.4f", next);
    }
    d << " (strictly decreasing required); " << fmt("%.2f", seconds_since(t)) << " s";
    report(7, pass, "post-processing", d.str());
}

void criterion8() {
    const auto t = clock_type::now();
    const MeshUdf f(fixtures::unit_patch(kPatchZ));
    const GridSpec g = grid(129);
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::string> objs;
    for (unsigned threads : {1u, 4u, hw}) {
        std::ostringstream out;
        write_obj(ours(f, g, threads), out);
        objs.push_back(out.str());
    }
    const bool pass = objs[0] == objs[1] && objs[0] == objs[2] && !objs[0].empty();
    report(8, pass, "determinism",
           "criterion-2 OBJ (" + std::to_string(objs[0].size()) + " bytes) for threads 1, 4, " + std::to_string(hw) +
               (pass ? " byte-identical" : " DIFFER") + "; " + fmt("%.1f", seconds_since(t)) + " s");
}

}  // namespace

int main() {
    const auto t = clock_type::now();
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAIL") << " ("
              << fmt("%.1f", seconds_since(t)) << " s)" << std::endl;
    return failures == 0 ? 0 : 1;
}
