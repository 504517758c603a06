#include "orthovar/domain_io.hpp"

#include "orthovar/mesh.hpp"
#include "orthovar/perturb.hpp"

#include <filesystem>

namespace orthovar {

namespace {

const std::set<std::string> kCommon = {"kind", "reach", "proj_tol", "max_iter"};

std::set<std::string> allowed(std::initializer_list<std::string> keys) {
    std::set<std::string> out = kCommon;
    out.insert(keys.begin(), keys.end());
    return out;
}

ConfigSection strip_prefix(const ConfigSection& s, const std::string& prefix, bool rename_kind) {
    ConfigSection inner(s.name());
    for (const auto& [k, v] : s.entries())
        if (k.rfind(prefix, 0) == 0) inner.set(k.substr(prefix.size()), v);
    if (rename_kind && s.has(prefix + "kind")) inner.set("kind", s.get(prefix + "kind"));
    return inner;
}

std::shared_ptr<ImplicitDomain> build(const ConfigSection& s, const std::string& base_dir) {
    const std::string kind = s.get("kind");
    if (kind == "ball") {
        s.require_only(allowed({"center", "radius"}));
        return std::make_shared<Ball>(s.get_vec3_or("center", Vec3::Zero()), s.get_double_or("radius", 1.0));
    }
    if (kind == "ellipsoid") {
        s.require_only(allowed({"center", "axes"}));
        return std::make_shared<Ellipsoid>(s.get_vec3_or("center", Vec3::Zero()), s.get_vec3("axes"));
    }
    if (kind == "slab") {
        s.require_only(allowed({"center", "half_width", "lateral"}));
        return std::make_shared<Slab>(s.get_double_or("center", 0.0), s.get_double_or("half_width", 1.0),
                                      s.get_double_or("lateral", 2.0));
    }
    if (kind == "annulus_prism") {
        s.require_only(allowed({"r_in", "r_out", "half_height", "smooth"}));
        return std::make_shared<AnnulusPrism>(s.get_double_or("r_in", 1.0), s.get_double_or("r_out", std::sqrt(2.0)),
                                              s.get_double_or("half_height", 1.0), s.get_double_or("smooth", 0.05));
    }
    if (kind == "cylinder") {
        s.require_only(allowed({"radius", "half_length"}));
        return std::make_shared<Cylinder>(s.get_double_or("radius", 1.0), s.get_double_or("half_length", 2.0));
    }
    if (kind == "graph_cap") {
        s.require_only(allowed({"hessian", "trh", "extent"}));
        GraphFunction u;
        if (s.has("hessian")) {
            const auto h = s.get_doubles("hessian");
            if (h.size() != 3) throw Error(ErrorCode::InvalidConfig, "hessian expects 3 values h11, h12, h22");
            u.H << h[0], h[1], h[1], h[2];
        } else {
            u = GraphFunction::isotropic(s.get_double("trh"));
        }
        return std::make_shared<GraphCap>(u, s.get_double_or("extent", 1.5));
    }
    if (kind == "custom_mesh_sdf") {
        s.require_only(allowed({"mesh", "resolution", "padding"}));
        std::filesystem::path p = s.get("mesh");
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        const SurfaceMesh m = read_off(p.string());
        std::vector<Vec3> verts;
        for (int v = 0; v < m.num_vertices(); ++v) verts.push_back(m.p3(v));
        auto d = std::make_shared<GridSdf>(verts, m.triangles(), static_cast<int>(s.get_int_or("resolution", 64)),
                                           s.get_double_or("padding", 0.2));
        d->set_source(s.get("mesh"));
        return d;
    }
    if (kind == "scaled") {
        for (const auto& [k, v] : s.entries())
            if (!kCommon.count(k) && k != "scale" && k.rfind("base_", 0) != 0)
                throw Error(ErrorCode::InvalidConfig, "unknown key '" + k + "' for kind scaled");
        const ConfigSection inner = strip_prefix(s, "base_", false);
        return std::make_shared<ScaledDomain>(build(inner, base_dir), s.get_double("scale"));
    }
    if (kind == "perturbed") {
        static const std::set<std::string> spec_keys = {"seed",   "step",       "attempt", "scale",
                                                        "resolution", "charts", "band",    "quadrature",
                                                        "table",  "terms"};
        ConfigSection spec_section;
        for (const auto& [k, v] : s.entries()) {
            if (kCommon.count(k) || k.rfind("base.", 0) == 0) continue;
            if (!spec_keys.count(k) && k.rfind("term", 0) != 0)
                throw Error(ErrorCode::InvalidConfig, "unknown key '" + k + "' for kind perturbed");
            spec_section.set(k, v);
        }
        ConfigSection inner = strip_prefix(s, "base.", false);
        if (!inner.has("kind")) throw Error(ErrorCode::InvalidConfig, "perturbed domain needs base.kind");
        auto base = build(inner, base_dir);
        return make_perturbed(base, GenericSpec::read(spec_section));
    }
    throw Error(ErrorCode::InvalidConfig, "unknown domain kind '" + kind + "'");
}

}  // namespace

const std::set<std::string>& domain_kinds() {
    static const std::set<std::string> k = {"ball",     "ellipsoid",       "slab",   "annulus_prism", "cylinder",
                                            "graph_cap", "custom_mesh_sdf", "scaled", "perturbed"};
    return k;
}

DomainPtr domain_from_section(const ConfigSection& section, const std::string& base_dir) {
    if (!section.has("kind")) throw Error(ErrorCode::InvalidConfig, "domain section needs 'kind'");
    auto d = build(section, base_dir);
    if (section.has("reach")) {
        const double r = section.get_double("reach");
        if (!(r > 0)) throw Error(ErrorCode::InvalidConfig, "reach must be positive");
        d->set_reach(r);
    }
    DomainTolerances tol = d->tolerances();
    tol.proj = section.get_double_or("proj_tol", tol.proj);
    tol.max_iter = static_cast<int>(section.get_int_or("max_iter", tol.max_iter));
    if (!(tol.proj > 0) || tol.max_iter < 1) throw Error(ErrorCode::InvalidConfig, "tolerances must be positive");
    d->set_tolerances(tol);
    return d;
}

DomainPtr load_domain(const std::string& path) {
    const Config cfg = Config::load(path);
    if (!cfg.has_section("domain")) throw Error(ErrorCode::InvalidConfig, path + ": missing [domain] section");
    for (const auto& s : cfg.sections())
        if (s.name() != "domain" && !(s.name().empty() && s.entries().empty()))
            throw Error(ErrorCode::InvalidConfig, path + ": unexpected section [" + s.name() + "]");
    return domain_from_section(cfg.section("domain"), std::filesystem::path(path).parent_path().string());
}

ConfigSection domain_section(const ImplicitDomain& domain) {
    ConfigSection s("domain");
    s.set("kind", domain.kind());
    domain.write_params(s);
    return s;
}

void save_domain(const ImplicitDomain& domain, const std::string& path) {
    Config cfg;
    cfg.add_section("domain") = domain_section(domain);
    cfg.save(path);
}

}  // namespace orthovar
