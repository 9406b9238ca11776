#include "densflow/config.hpp"

#include "densflow/errors.hpp"
#include "densflow/numerics.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace densflow {

namespace {

const std::map<std::string, std::set<std::string>>& allowed_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"", {"seed", "output_dir"}},
        {"exponents", {"N", "p", "m"}},
        {"geometry", {"kind", "table"}},
        {"density", {"kind", "alpha", "table"}},
        {"solver",
         {"n_cells", "r_max", "gamma", "layout", "core_radius", "core_cells", "cfl", "eps_supp",
          "eps_reg", "t_final", "t0", "dt_max", "amplitude", "bump_radius", "backend"}},
        {"experiment",
         {"kind", "sup_tolerance", "interface_tolerance", "universal_tolerance",
          "ratio_tolerance", "mass_tolerance", "mass_factor", "domain_doublings",
          "scaling_lambda", "scaling_tolerance"}},
        {"classify", {"r_max", "decades", "tail_decades", "per_decade", "margin", "psi_cap"}},
        {"embeddings", {"n_cells", "r_max", "random_count", "s_max", "radius", "p1"}},
    };
    return keys;
}

std::string format_number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return {buf, res.ptr};
}

class Reader {
public:
    explicit Reader(std::map<std::string, std::string> raw) : raw_(std::move(raw)) {}

    bool has(const std::string& key) const { return raw_.count(key) != 0; }

    std::string text(const std::string& key, const std::string& fallback) const {
        const auto it = raw_.find(key);
        return it == raw_.end() ? fallback : it->second;
    }

    double number(const std::string& key, double fallback) const {
        const auto it = raw_.find(key);
        if (it == raw_.end()) {
            return fallback;
        }
        const std::string& s = it->second;
        if (s == "inf" || s == "infinity") {
            return std::numeric_limits<double>::infinity();
        }
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
            throw ConfigError("key " + key + ": not a number: '" + s + "'");
        }
        return v;
    }

    long long integer(const std::string& key, long long fallback) const {
        const auto it = raw_.find(key);
        if (it == raw_.end()) {
            return fallback;
        }
        const std::string& s = it->second;
        long long v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
            throw ConfigError("key " + key + ": not an integer: '" + s + "'");
        }
        return v;
    }

private:
    std::map<std::string, std::string> raw_;
};

std::map<std::string, std::string> flatten(const boost::property_tree::ptree& tree) {
    std::map<std::string, std::string> raw;
    const auto& allowed = allowed_keys();
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            if (!allowed.at("").count(name)) {
                throw ConfigError("unknown key '" + name + "'");
            }
            raw[name] = node.data();
            continue;
        }
        const auto section = allowed.find(name);
        if (section == allowed.end() || name.empty()) {
            throw ConfigError("unknown section [" + name + "]");
        }
        for (const auto& [key, leaf] : node) {
            if (!section->second.count(key)) {
                throw ConfigError("unknown key '" + key + "' in [" + name + "]");
            }
            raw[name + "." + key] = leaf.data();
        }
    }
    return raw;
}

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw ConfigError(what);
    }
}

std::string resolve_path(const std::string& base, const std::string& path) {
    const std::filesystem::path p(path);
    return p.is_absolute() ? path : (std::filesystem::path(base) / p).string();
}

void resolve(Config& cfg) {
    if (cfg.auto_r_max) {
        const auto regime = classify_regime(*cfg.geometry, *cfg.density, cfg.exps, cfg.classify);
        if (regime.regime != Regime::Subcritical) {
            throw ConfigError("solver.r_max = auto needs a subcritical configuration");
        }
        double reach = 0.0;
        if (cfg.run.t_final > 0.0) {
            const double mass =
                initial_mass(*cfg.geometry, *cfg.density, cfg.run.amplitude, cfg.run.bump_radius);
            reach = 3.0 * z0(*cfg.geometry, *cfg.density, cfg.exps, cfg.run.t_final, mass,
                             cfg.gamma);
        }
        cfg.grid.r_max = std::max(reach, 10.0 * cfg.run.bump_radius);
    }
    auto& e = cfg.echo;
    e["solver.r_max"] = format_number(cfg.grid.r_max);
    e["seed"] = std::to_string(cfg.seed);
    cfg.run.config_digest = cfg.digest();
}

} // namespace

double initial_mass(const ManifoldProfile& geom, const DensityProfile& dens, double amplitude,
                    double radius) {
    return numerics::adaptive_simpson(
        [&](double r) {
            const double x = r / radius;
            const double b = 1.0 - x * x;
            return dens.rho(r) * amplitude * b * b * geom.area(r);
        },
        0.0, radius);
}

ExperimentConfig Config::experiment_config() const {
    ExperimentConfig x = tolerances;
    x.geometry = geometry;
    x.density = density;
    x.exps = exps;
    x.grid = grid;
    x.solver = solver;
    x.run = run;
    return x;
}

std::string Config::digest() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& [k, v] : echo) {
        for (unsigned char c : k + "=" + v + "\n") {
            h ^= c;
            h *= 1099511628211ULL;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void Config::set_seed(std::uint64_t s) {
    seed = s;
    echo["seed"] = std::to_string(s);
    run.config_digest = digest();
}

Config parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    const auto base = std::filesystem::path(path).parent_path().string();
    return parse_config_text(buf.str(), base.empty() ? "." : base);
}

Config parse_config_text(const std::string& text, const std::string& base_dir) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    const Reader r(flatten(tree));
    Config cfg;

    require(r.has("exponents.N") && r.has("exponents.p") && r.has("exponents.m"),
            "[exponents] needs N, p and m");
    const long long n_dim = r.integer("exponents.N", 0);
    require(n_dim >= 1 && n_dim <= 64, "exponents.N must be a small positive integer");
    cfg.exps = Exponents(static_cast<int>(n_dim), r.number("exponents.p", 0.0),
                         r.number("exponents.m", 0.0));
    const double p = cfg.exps.p();

    const std::string gkind = r.text("geometry.kind", "euclidean");
    if (gkind == "euclidean") {
        cfg.geometry = std::make_shared<const ManifoldProfile>(
            ManifoldProfile::euclidean(cfg.exps.n_dim()));
    } else if (gkind == "tabulated") {
        require(r.has("geometry.table"), "tabulated geometry needs geometry.table");
        cfg.geometry = std::make_shared<const ManifoldProfile>(ManifoldProfile::from_csv(
            resolve_path(base_dir, r.text("geometry.table", "")), cfg.exps.n_dim()));
    } else {
        throw ConfigError("geometry.kind must be euclidean or tabulated");
    }

    const std::string dkind = r.text("density.kind", "power_law");
    if (dkind == "power_law") {
        const double alpha = r.number("density.alpha", 0.0);
        require(alpha >= 0.0, "density.alpha must be >= 0");
        cfg.density = std::make_shared<const DensityProfile>(DensityProfile::power_law(alpha));
    } else if (dkind == "tabulated") {
        require(r.has("density.table"), "tabulated density needs density.table");
        cfg.density = std::make_shared<const DensityProfile>(
            DensityProfile::from_csv(resolve_path(base_dir, r.text("density.table", ""))));
    } else {
        throw ConfigError("density.kind must be power_law or tabulated");
    }

    const long long n_cells = r.integer("solver.n_cells", 2000);
    require(n_cells >= 16 && n_cells <= 100000000, "solver.n_cells must be at least 16");
    cfg.grid.n_cells = static_cast<int>(n_cells);
    const std::string rmax = r.text("solver.r_max", "auto");
    cfg.auto_r_max = rmax == "auto";
    if (!cfg.auto_r_max) {
        cfg.grid.r_max = r.number("solver.r_max", 0.0);
        require(cfg.grid.r_max > 0.0, "solver.r_max must be positive or auto");
    }
    cfg.gamma = r.number("solver.gamma", 1.0);
    require(cfg.gamma > 0.0, "solver.gamma must be positive");
    const std::string layout = r.text("solver.layout", "uniform");
    if (layout == "stretched") {
        cfg.grid.layout = GridLayout::Stretched;
        cfg.grid.core_radius = r.number("solver.core_radius", 0.0);
        cfg.grid.core_cells = static_cast<int>(r.integer("solver.core_cells", 0));
        require(cfg.grid.core_radius > 0.0 && cfg.grid.core_cells >= 1 &&
                    cfg.grid.core_cells < cfg.grid.n_cells,
                "stretched layout needs core_radius > 0 and 1 <= core_cells < n_cells");
    } else {
        require(layout == "uniform", "solver.layout must be uniform or stretched");
        require(!r.has("solver.core_radius") && !r.has("solver.core_cells"),
                "core_radius and core_cells apply to the stretched layout only");
    }

    cfg.run.amplitude = r.number("solver.amplitude", 1.0);
    cfg.run.bump_radius = r.number("solver.bump_radius", 1.0);
    require(cfg.run.amplitude > 0.0 && cfg.run.bump_radius > 0.0,
            "solver.amplitude and solver.bump_radius must be positive");
    cfg.run.t_final = r.number("solver.t_final", 1.0);
    require(cfg.run.t_final >= 0.0 && std::isfinite(cfg.run.t_final),
            "solver.t_final must be finite and >= 0");
    cfg.run.t0 = r.number("solver.t0", 1e-3);
    require(cfg.run.t0 > 0.0, "solver.t0 must be positive");

    cfg.solver.cfl = r.number("solver.cfl", 0.45);
    require(cfg.solver.cfl > 0.0 && cfg.solver.cfl <= 1.0, "solver.cfl must lie in (0, 1]");
    cfg.solver.eps_supp = r.number("solver.eps_supp", 1e-6);
    require(cfg.solver.eps_supp > 0.0, "solver.eps_supp must be positive");
    const double eps_default = p < 2.0 ? 1e-8 * cfg.run.amplitude / cfg.run.bump_radius : 0.0;
    cfg.solver.eps_reg = r.number("solver.eps_reg", eps_default);
    require(cfg.solver.eps_reg >= 0.0, "solver.eps_reg must be >= 0");
    require(p >= 2.0 || cfg.solver.eps_reg > 0.0, "p < 2 needs solver.eps_reg > 0");
    cfg.solver.dt_max = r.number("solver.dt_max", std::numeric_limits<double>::infinity());
    require(cfg.solver.dt_max > 0.0, "solver.dt_max must be positive");
    const std::string backend = r.text("solver.backend", "parallel");
    require(backend == "parallel" || backend == "reference",
            "solver.backend must be parallel or reference");
    cfg.solver.backend = backend == "parallel" ? Backend::Parallel : Backend::Reference;

    const std::string ekind = r.text("experiment.kind", "subcritical");
    if (ekind == "subcritical") {
        cfg.experiment = ExperimentKind::Subcritical;
    } else if (ekind == "universal") {
        cfg.experiment = ExperimentKind::Universal;
    } else if (ekind == "blowup_probe") {
        cfg.experiment = ExperimentKind::BlowupProbe;
    } else {
        throw ConfigError("experiment.kind must be subcritical, universal or blowup_probe");
    }
    auto& tol = cfg.tolerances;
    tol.sup_tolerance = r.number("experiment.sup_tolerance", tol.sup_tolerance);
    tol.interface_tolerance = r.number("experiment.interface_tolerance", tol.interface_tolerance);
    tol.universal_tolerance = r.number("experiment.universal_tolerance", tol.universal_tolerance);
    tol.ratio_tolerance = r.number("experiment.ratio_tolerance", tol.ratio_tolerance);
    tol.mass_tolerance = r.number("experiment.mass_tolerance", tol.mass_tolerance);
    tol.mass_factor = r.number("experiment.mass_factor", tol.mass_factor);
    tol.domain_doublings =
        static_cast<int>(r.integer("experiment.domain_doublings", tol.domain_doublings));
    tol.scaling_lambda = r.number("experiment.scaling_lambda", tol.scaling_lambda);
    tol.scaling_tolerance = r.number("experiment.scaling_tolerance", tol.scaling_tolerance);
    require(tol.sup_tolerance > 0.0 && tol.interface_tolerance > 0.0 &&
                tol.universal_tolerance > 0.0 && tol.ratio_tolerance >= 1.0 &&
                tol.mass_tolerance > 0.0 && tol.scaling_tolerance > 0.0,
            "experiment tolerances must be positive (ratio_tolerance >= 1)");
    require(tol.mass_factor > 0.0 && tol.scaling_lambda > 0.0,
            "experiment.mass_factor and scaling_lambda must be positive");
    require(tol.domain_doublings >= 0 && tol.domain_doublings <= 10,
            "experiment.domain_doublings must lie in [0, 10]");

    auto& cl = cfg.classify;
    cl.r_max = r.number("classify.r_max", cl.r_max);
    cl.decades = r.number("classify.decades", cl.decades);
    cl.tail_decades = r.number("classify.tail_decades", cl.tail_decades);
    cl.per_decade = static_cast<int>(r.integer("classify.per_decade", cl.per_decade));
    cl.margin = r.number("classify.margin", cl.margin);
    cl.psi_cap = r.number("classify.psi_cap", cl.psi_cap);
    require(cl.r_max > 0.0 && cl.decades > 0.0 && cl.tail_decades > 0.0 &&
                cl.tail_decades <= cl.decades && cl.per_decade >= 4 && cl.margin > 0.0 &&
                cl.psi_cap >= 1.0,
            "invalid [classify] settings");

    auto& em = cfg.embeddings;
    em.n_cells = static_cast<int>(r.integer("embeddings.n_cells", em.n_cells));
    em.r_max = r.number("embeddings.r_max", em.r_max);
    em.random_count =
        static_cast<std::size_t>(r.integer("embeddings.random_count", 1000));
    em.s_max = r.number("embeddings.s_max", em.s_max);
    em.radius = r.number("embeddings.radius", em.radius);
    em.p1 = r.number("embeddings.p1", em.p1);
    require(em.n_cells >= 16 && em.r_max > 0.0 && em.s_max > 1e-4 && em.radius > 0.0 &&
                em.p1 >= 0.0,
            "invalid [embeddings] settings");

    const long long seed = r.integer("seed", 42);
    require(seed >= 0, "seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.output_dir = r.text("output_dir", "out");

    auto& e = cfg.echo;
    e["exponents.N"] = std::to_string(cfg.exps.n_dim());
    e["exponents.p"] = format_number(p);
    e["exponents.m"] = format_number(cfg.exps.m());
    e["geometry.kind"] = gkind;
    if (gkind == "tabulated") {
        e["geometry.table"] = r.text("geometry.table", "");
    }
    e["density.kind"] = dkind;
    if (dkind == "tabulated") {
        e["density.table"] = r.text("density.table", "");
    } else {
        e["density.alpha"] = format_number(cfg.density->alpha());
    }
    e["solver.n_cells"] = std::to_string(cfg.grid.n_cells);
    e["solver.r_max_mode"] = cfg.auto_r_max ? "auto" : "fixed";
    e["solver.gamma"] = format_number(cfg.gamma);
    e["solver.layout"] = layout;
    if (cfg.grid.layout == GridLayout::Stretched) {
        e["solver.core_radius"] = format_number(cfg.grid.core_radius);
        e["solver.core_cells"] = std::to_string(cfg.grid.core_cells);
    }
    e["solver.cfl"] = format_number(cfg.solver.cfl);
    e["solver.eps_supp"] = format_number(cfg.solver.eps_supp);
    e["solver.eps_reg"] = format_number(cfg.solver.eps_reg);
    e["solver.t_final"] = format_number(cfg.run.t_final);
    e["solver.t0"] = format_number(cfg.run.t0);
    e["solver.dt_max"] = format_number(cfg.solver.dt_max);
    e["solver.amplitude"] = format_number(cfg.run.amplitude);
    e["solver.bump_radius"] = format_number(cfg.run.bump_radius);
    e["solver.backend"] = backend;
    e["experiment.kind"] = ekind;
    e["experiment.sup_tolerance"] = format_number(tol.sup_tolerance);
    e["experiment.interface_tolerance"] = format_number(tol.interface_tolerance);
    e["experiment.universal_tolerance"] = format_number(tol.universal_tolerance);
    e["experiment.ratio_tolerance"] = format_number(tol.ratio_tolerance);
    e["experiment.mass_tolerance"] = format_number(tol.mass_tolerance);
    e["experiment.mass_factor"] = format_number(tol.mass_factor);
    e["experiment.domain_doublings"] = std::to_string(tol.domain_doublings);
    e["experiment.scaling_lambda"] = format_number(tol.scaling_lambda);
    e["experiment.scaling_tolerance"] = format_number(tol.scaling_tolerance);
    e["classify.r_max"] = format_number(cl.r_max);
    e["classify.decades"] = format_number(cl.decades);
    e["classify.tail_decades"] = format_number(cl.tail_decades);
    e["classify.per_decade"] = std::to_string(cl.per_decade);
    e["classify.margin"] = format_number(cl.margin);
    e["classify.psi_cap"] = format_number(cl.psi_cap);
    e["embeddings.n_cells"] = std::to_string(em.n_cells);
    e["embeddings.r_max"] = format_number(em.r_max);
    e["embeddings.random_count"] = std::to_string(em.random_count);
    e["embeddings.s_max"] = format_number(em.s_max);
    e["embeddings.radius"] = format_number(em.radius);
    e["embeddings.p1"] = format_number(em.p1);
    e["output_dir"] = cfg.output_dir;

    resolve(cfg);
    return cfg;
}

} // namespace densflow
