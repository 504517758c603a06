#include "orthovar/config.hpp"
#include "orthovar/curvature.hpp"
#include "orthovar/domain.hpp"
#include "orthovar/domain_io.hpp"
#include "orthovar/mesh.hpp"
#include "orthovar/minimize.hpp"
#include "orthovar/perturb.hpp"
#include "orthovar/reflect.hpp"
#include "orthovar/report.hpp"
#include "orthovar/selftest.hpp"
#include "orthovar/slices.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

using namespace orthovar;

namespace {

constexpr int kSchemaVersion = 1;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Hash of the subcommand, its explicit options and the bytes of its input
// files. Output locations and input file names do not enter.
std::uint64_t invocation_hash(const CLI::App& sub, const std::vector<std::string>& inputs,
                              const std::vector<std::pair<std::string, std::string>>& extra = {}) {
    static const std::set<std::string> skip = {"--help", "--out", "--final", "--export-dir", "--out-dir",
                                               "--mesh", "--domain", "--start", "--graph"};
    Config cfg;
    auto& s = cfg.add_section(sub.get_name());
    s.set("schema_version", kSchemaVersion);
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->count() == 0 || skip.count(opt->get_name())) continue;
        std::string joined;
        for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
        s.set(opt->get_name(), joined);
    }
    for (const auto& [k, v] : extra) s.set(k, v);
    auto& files = cfg.add_section("inputs");
    for (std::size_t i = 0; i < inputs.size(); ++i)
        files.set("input" + std::to_string(i), inputs[i].empty() ? std::string("none") : hex64(fnv1a(read_file(inputs[i]))));
    return cfg.hash();
}

void emit(const CsvTable& table, const std::string& out, std::uint64_t hash) {
    if (out.empty() || out == "-") std::cout << table.to_string(hash);
    else table.write(out, hash);
}

Vec3 parse_vec3(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) v.push_back(std::stod(item));
    if (v.size() != 3) throw Error(ErrorCode::InvalidConfig, "expected three comma-separated values, got '" + text + "'");
    return {v[0], v[1], v[2]};
}

// "a:b:c" -> a, a + c, ..., up to b.
std::vector<double> parse_sweep(const std::string& text) {
    double a, b, c;
    char s1, s2;
    std::stringstream ss(text);
    if (!(ss >> a >> s1 >> b >> s2 >> c) || s1 != ':' || s2 != ':' || !(c > 0) || b < a)
        throw Error(ErrorCode::InvalidConfig, "sweep must be start:stop:step with step > 0, got '" + text + "'");
    std::vector<double> out;
    const long n = std::lround(std::floor((b - a) / c + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(a + k * c);
    return out;
}

// A graph spec is either a domain file of kind graph_cap or inline
// `trh=<value>` / `hessian=<h11>,<h12>,<h22>`.
GraphFunction parse_graph(const std::string& spec) {
    if (std::filesystem::exists(spec)) {
        const DomainPtr d = load_domain(spec);
        const auto* cap = dynamic_cast<const GraphCap*>(d.get());
        if (!cap) throw Error(ErrorCode::InvalidConfig, spec + ": expected a domain of kind graph_cap");
        return cap->graph();
    }
    ConfigSection s("domain");
    s.set("kind", std::string("graph_cap"));
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "graph spec '" + spec + "' is neither a file nor key=value");
    s.set(spec.substr(0, eq), spec.substr(eq + 1));
    return dynamic_cast<const GraphCap&>(*domain_from_section(s)).graph();
}

struct FixtureArgs {
    std::string name, out;
    int level = 4;
    double radius = 1, height = 0, r = 0.3, smooth = 0.05, trh = 2, lambda = 0.1;
    std::string axes = "1,1.2,1.5";
};

const std::vector<std::string>& mesh_fixtures() {
    static const std::vector<std::string> n = {"icosphere",      "halfsphere",      "disk",      "ball_section",
                                               "annulus",        "cylinder_strip",  "orthogonal_cap", "comparison"};
    return n;
}

const std::vector<std::string>& domain_fixtures() {
    static const std::vector<std::string> n = {"ball", "ellipsoid", "annulus_prism", "cylinder", "slab", "graph_cap"};
    return n;
}

int run_fixture(const FixtureArgs& a) {
    auto mesh = [&]() -> std::optional<SurfaceMesh> {
        if (a.name == "icosphere") return icosphere(a.level, a.radius);
        if (a.name == "halfsphere") return hemisphere(a.level, a.radius);
        if (a.name == "disk") return ring_disk(a.level, a.radius, a.height);
        if (a.name == "ball_section") return ball_section(a.level, a.height);
        if (a.name == "annulus") return annulus(a.level);
        if (a.name == "cylinder_strip") return cylinder_strip(a.level, a.radius);
        if (a.name == "orthogonal_cap") return orthogonal_cap(a.level, a.r);
        if (a.name == "comparison") {
            ComparisonOptions opt;
            opt.level = a.level;
            return build_comparison_surface(GraphFunction::isotropic(a.trh), a.lambda, opt);
        }
        return std::nullopt;
    }();
    if (mesh) {
        if (a.out.empty() || a.out == "-") std::cout << format_off(*mesh);
        else write_off(*mesh, a.out);
        std::fprintf(stderr, "%s: V=%d F=%d\n", a.name.c_str(), mesh->num_vertices(), mesh->num_faces());
        return 0;
    }
    DomainPtr d;
    if (a.name == "ball") d = std::make_shared<Ball>(Vec3::Zero(), a.radius);
    else if (a.name == "ellipsoid") d = std::make_shared<Ellipsoid>(Vec3::Zero(), parse_vec3(a.axes));
    else if (a.name == "annulus_prism") d = std::make_shared<AnnulusPrism>(1.0, std::sqrt(2.0), 1.0, a.smooth);
    else if (a.name == "cylinder") d = std::make_shared<Cylinder>(a.radius);
    else if (a.name == "slab") d = std::make_shared<Slab>();
    else if (a.name == "graph_cap") d = std::make_shared<GraphCap>(GraphFunction::isotropic(a.trh));
    else {
        std::string known;
        for (const auto& n : mesh_fixtures()) known += " " + n;
        for (const auto& n : domain_fixtures()) known += " " + n;
        throw Error(ErrorCode::UnknownFixture, "'" + a.name + "'; known:" + known);
    }
    Config cfg;
    cfg.add_section("domain") = domain_section(*d);
    if (a.out.empty() || a.out == "-") std::cout << cfg.to_string();
    else cfg.save(a.out);
    return 0;
}

int exit_code(ErrorCode c) {
    switch (c) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::IoError:
    case ErrorCode::UnknownFixture:
    case ErrorCode::InvalidMesh:
        return 2;
    default:
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"orthovar: free-boundary varifolds, orthogonal slices and boundary reflection"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI file with option values; unknown keys are rejected");
    app.allow_config_extras(false);

    // energy
    std::string mesh_path, domain_path, out;
    double p = 2;
    auto* energy = app.add_subcommand("energy", "Curvature energies of a mesh");
    energy->add_option("--mesh", mesh_path, "OFF mesh")->required()->check(CLI::ExistingFile);
    energy->add_option("--p", p, "Exponent of the A/B energies")->check(CLI::Range(1.0, 1e6));
    energy->add_option("--domain", domain_path, "Domain config; enables the orthogonality angle")->check(CLI::ExistingFile);
    energy->add_option("--out", out, "CSV output (stdout when omitted)");

    // slices find
    int m = 2;
    double tol = 1e-6;
    std::string export_dir;
    auto* slices = app.add_subcommand("slices", "Orthogonal slices");
    slices->require_subcommand(1);
    auto* find = slices->add_subcommand("find", "Search for orthogonal affine slices");
    find->add_option("--domain", domain_path, "Domain config")->required()->check(CLI::ExistingFile);
    find->add_option("--m", m, "Slice dimension")->check(CLI::Range(1, 2));
    find->add_option("--tol", tol, "Orthogonality tolerance")->check(CLI::PositiveNumber);
    find->add_option("--out", out, "CSV output (stdout when omitted)");
    find->add_option("--export-dir", export_dir, "Write slice components as OFF meshes here");

    // minimize
    std::string final_path;
    MinimizeConfig mc;
    auto* mini = app.add_subcommand("minimize", "Penalized descent of int |A|^p with free boundary on S");
    mini->add_option("--domain", domain_path, "Domain config")->required()->check(CLI::ExistingFile);
    mini->add_option("--start", mesh_path, "Start mesh (OFF)")->required()->check(CLI::ExistingFile);
    mini->add_option("--p", mc.p, "Energy exponent")->check(CLI::Range(1.0, 1e6));
    mini->add_option("--max-iters", mc.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
    mini->add_option("--tol-grad", mc.tol_grad, "Gradient tolerance")->check(CLI::PositiveNumber);
    mini->add_option("--tol-boundary", mc.tol_boundary, "Boundary distance tolerance / L")->check(CLI::PositiveNumber);
    mini->add_option("--tol-ortho-deg", mc.tol_ortho_deg, "Orthogonality tolerance in degrees")->check(CLI::PositiveNumber);
    mini->add_option("--out", out, "Trace CSV (stdout when omitted)");
    mini->add_option("--final", final_path, "Final mesh (OFF)");

    // compare
    std::string graph_spec, sweep = "0:0.2:0.01";
    int level = 4;
    auto* compare = app.add_subcommand("compare", "Energy of the comparison surfaces over a lambda sweep");
    compare->add_option("--graph", graph_spec, "graph_cap domain file, or trh=<v>, or hessian=<h11>,<h12>,<h22>")->required();
    compare->add_option("--lambda-sweep", sweep, "start:stop:step");
    compare->add_option("--level", level, "Hemisphere refinement level")->check(CLI::Range(1, 7));
    compare->add_option("--out", out, "CSV output (stdout when omitted)");

    // reflect check
    auto* reflect_cmd = app.add_subcommand("reflect", "Boundary reflection");
    reflect_cmd->require_subcommand(1);
    auto* check = reflect_cmd->add_subcommand("check", "Reflected surface energy and seam report");
    check->add_option("--domain", domain_path, "Domain config")->required()->check(CLI::ExistingFile);
    check->add_option("--mesh", mesh_path, "OFF mesh with boundary on S")->required()->check(CLI::ExistingFile);
    check->add_option("--out", out, "CSV output (stdout when omitted)");

    // perturb generic
    GenericOptions go;
    auto* perturb = app.add_subcommand("perturb", "Boundary perturbations");
    perturb->require_subcommand(1);
    auto* generic = perturb->add_subcommand("generic", "Perturb S until no orthogonal slice remains");
    generic->add_option("--domain", domain_path, "Domain config")->required()->check(CLI::ExistingFile);
    generic->add_option("--step", go.step, "Perturbation size (C^2)")->check(CLI::PositiveNumber);
    generic->add_option("--seed", go.seed, "Random seed");
    generic->add_option("--out", out, "Perturbed domain config")->required();

    // fixture
    FixtureArgs fa;
    auto* fixture = app.add_subcommand("fixture", "Write a fixture mesh (OFF) or domain config");
    fixture->add_option("name", fa.name, "Fixture name")->required();
    fixture->add_option("--level", fa.level, "Refinement level")->check(CLI::Range(0, 8));
    fixture->add_option("--radius", fa.radius)->check(CLI::PositiveNumber);
    fixture->add_option("--height", fa.height);
    fixture->add_option("--r", fa.r, "Cap radius")->check(CLI::PositiveNumber);
    fixture->add_option("--smooth", fa.smooth, "Corner rounding of the annulus prism")->check(CLI::PositiveNumber);
    fixture->add_option("--trh", fa.trh, "Trace of the graph Hessian");
    fixture->add_option("--lambda", fa.lambda, "Comparison-surface scale");
    fixture->add_option("--axes", fa.axes, "Ellipsoid semi-axes a,b,c");
    fixture->add_option("--out", fa.out, "Output file (stdout when omitted)");

    // selftest
    SelftestOptions so;
    std::string out_dir = "selftest_out";
    auto* selftest = app.add_subcommand("selftest", "Run the acceptance checks and write their CSVs");
    selftest->add_option("--seed", so.seed, "Random seed");
    selftest->add_option("--out-dir", out_dir, "Directory for summary.csv and the detail tables");
    selftest->add_option("--only", so.only, "Run only these criteria")->check(CLI::Range(1, 11));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*energy) {
            const SurfaceMesh mesh = read_off(mesh_path);
            DomainPtr d = domain_path.empty() ? nullptr : load_domain(domain_path);
            const EnergyReport e = energy_report(mesh, estimate_curvature(mesh), p, d.get());
            CsvTable t({"vertices", "faces", "area", "boundary_length", "euler_char", "p", "energy_A_p", "energy_B_p",
                        "energy_H_2", "gauss_bonnet_residual", "ortho_angle_max_deg"});
            t.add_row({static_cast<double>(mesh.num_vertices()), static_cast<double>(mesh.num_faces()), e.area,
                       e.boundary_length, static_cast<double>(e.euler_char), e.p, e.energy_A_p, e.energy_B_p,
                       e.energy_H_2, e.gauss_bonnet_residual, e.ortho_angle_max * 180 / kPi});
            emit(t, out, invocation_hash(*energy, {mesh_path, domain_path}));
            return 0;
        }
        if (*find) {
            const DomainPtr d = load_domain(domain_path);
            SliceOptions opt;
            opt.tol_ortho = tol;
            const auto found = find_orthogonal_slices(*d, m, opt);
            CsvTable t({"slice", "dir_x", "dir_y", "dir_z", "z_x", "z_y", "z_z", "ortho_residual", "euler_char",
                        "is_disk", "components", "measure"});
            for (std::size_t k = 0; k < found.size(); ++k) {
                const auto& s = found[k];
                // Plane normal for m = 2, line direction for m = 1.
                const Vec3 dir = m == 2 ? Vec3(s.plane.complement().col(0)) : Vec3(s.plane.basis().col(0));
                t.add_row({static_cast<double>(k), dir.x(), dir.y(), dir.z(), s.plane.z.x(), s.plane.z.y(),
                           s.plane.z.z(), s.ortho_residual, static_cast<double>(s.euler_char), s.is_disk ? 1.0 : 0.0,
                           static_cast<double>(s.components.size()), s.area});
                if (!export_dir.empty()) {
                    std::filesystem::create_directories(export_dir);
                    for (std::size_t c = 0; c < s.components.size(); ++c)
                        write_off(s.components[c], (std::filesystem::path(export_dir) /
                                                    ("slice" + std::to_string(k) + "_" + std::to_string(c) + ".off"))
                                                       .string());
                }
            }
            emit(t, out, invocation_hash(*find, {domain_path}));
            std::fprintf(stderr, "%zu orthogonal slice(s)\n", found.size());
            return 0;
        }
        if (*mini) {
            mc.validate();
            const DomainPtr d = load_domain(domain_path);
            const MinimizeResult res = minimize(read_off(mesh_path), *d, mc);
            CsvTable t({"iter", "energy", "objective", "area", "boundary_length", "ortho_angle_max_deg",
                        "boundary_dist_max", "step", "grad_max", "penalty_boundary", "penalty_ortho"});
            for (const auto& s : res.trace.steps)
                t.add_row({static_cast<double>(s.iter), s.energy, s.objective, s.area, s.boundary_length,
                           s.ortho_angle_max, s.boundary_dist_max, s.step, s.grad_max, s.penalty_boundary,
                           s.penalty_ortho});
            emit(t, out, invocation_hash(*mini, {domain_path, mesh_path}));
            if (!final_path.empty()) write_off(res.mesh, final_path);
            std::fprintf(stderr, "%s; E = %.6g, ortho_angle_max = %.4g deg\n", res.trace.status.c_str(),
                         res.trace.final_report.energy_A_p, res.trace.final_report.ortho_angle_max * 180 / kPi);
            return 0;
        }
        if (*compare) {
            const GraphFunction u = parse_graph(graph_spec);
            ComparisonOptions opt;
            opt.level = level;
            CsvTable t({"lambda", "energy_B_2", "area", "ortho_angle_max_deg"});
            for (double lambda : parse_sweep(sweep)) {
                const SurfaceMesh s = build_comparison_surface(u, lambda, opt);
                const GraphCap dom = comparison_domain(u, lambda);
                const EnergyReport e = energy_report(s, estimate_curvature(s), 2, &dom);
                t.add_row({lambda, e.energy_B_p, e.area, e.ortho_angle_max * 180 / kPi});
            }
            const std::string graph =
                format_double(u.H(0, 0)) + " " + format_double(u.H(0, 1)) + " " + format_double(u.H(1, 1));
            emit(t, out, invocation_hash(*compare, {}, {{"graph", graph}}));
            std::fprintf(stderr, "slope at lambda = 0: %.6g\n", energy_slope_at_zero(u, 0.02, opt));
            return 0;
        }
        if (*check) {
            const DomainPtr d = load_domain(domain_path);
            const SurfaceMesh mesh = read_off(mesh_path);
            const CurvatureField f = estimate_curvature(mesh);
            const ReflectedSurface W = reflect_surface(mesh, f, d);
            const ReflectedEnergyRecord r = reflected_energy_check(mesh, f, d);
            CsvTable t({"energy_W", "mass_W", "twice_H", "B_energy", "mass", "eps", "Lambda", "c_min", "slack",
                        "seam_consistency", "seam_vertices"});
            t.add_row({W.energy(), W.mass(), r.twice_H, r.B_energy, r.mass, r.eps, r.Lambda, r.c_min, r.slack,
                       W.seam_consistency, static_cast<double>(W.seam_vertices)});
            emit(t, out, invocation_hash(*check, {domain_path, mesh_path}));
            return 0;
        }
        if (*generic) {
            const DomainPtr d = load_domain(domain_path);
            const auto before = find_orthogonal_slices(*d, 2, go.search);
            const GenericResult g = make_generic(d, before, go);
            save_domain(*g.domain, out);
            std::fprintf(stderr, "%zu slice(s) before, %zu after %d attempt(s)\n", before.size(), g.remaining.size(),
                         g.attempts);
            return 0;
        }
        if (*fixture) return run_fixture(fa);
        if (*selftest) {
            const SelftestReport rep = run_selftest(so);
            rep.write(out_dir);
            std::string timings;
            for (const auto& c : rep.criteria) {
                std::cout << format_criterion(c) << "\n";
                char line[96];
                std::snprintf(line, sizeof line, "%d %.3f %.0f\n", c.id, c.seconds, c.time_limit);
                timings += line;
            }
            write_text_atomic((std::filesystem::path(out_dir) / "timings.txt").string(), timings);
            std::cout << (rep.pass() ? "selftest: all criteria passed\n" : "selftest: FAILED\n");
            return rep.pass() ? 0 : 3;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "orthovar: %s\n", e.what());
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "orthovar: %s\n", e.what());
        return 3;
    }
    return 0;
}
