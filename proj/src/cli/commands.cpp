#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "spl/cli.hpp"
#include "spl/deficit.hpp"
#include "spl/errors.hpp"
#include "spl/kernels.hpp"
#include "spl/optimize.hpp"
#include "spl/rearrange.hpp"
#include "spl/shapecalc.hpp"

namespace spl::cli {

namespace fs = std::filesystem;

namespace {

int node_count_for(const RunConfig& cfg, bool radial_context) {
    if (cfg.text("n") != "auto") {
        const int n = cfg.integer("n");
        if (n < 1) throw ConfigError("config key 'n': must be positive");
        return n;
    }
    if (radial_context) return 4096;
    return cfg.text("geometry") == "interval" ? 2047 : 2048;
}

SolveOptions solve_options(const RunConfig& cfg) {
    SolveOptions o;
    o.tol = cfg.number("tol");
    o.max_iter = cfg.integer("solver_max_iter");
    if (!(o.tol > 0.0)) throw ConfigError("config key 'tol': must be positive");
    if (o.max_iter < 1) throw ConfigError("config key 'solver_max_iter': must be positive");
    return o;
}

fs::path prepare(const RunConfig& cfg) {
    const fs::path out = cfg.text("out");
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ConfigError("cannot create output directory " + out.string() + ": " + ec.message());
    cfg.write(out / "config.txt");
    return out;
}

std::vector<std::string> coordinate_names(const Grid& grid) {
    if (std::holds_alternative<IntervalGrid>(grid)) return {"x"};
    if (std::holds_alternative<RadialGrid>(grid)) return {"r"};
    return {"r", "theta"};
}

void write_coordinates(CsvWriter& csv, const Grid& grid, std::size_t i) {
    if (const auto* g = std::get_if<IntervalGrid>(&grid)) {
        csv << g->nodes()[i];
    } else if (const auto* g = std::get_if<RadialGrid>(&grid)) {
        csv << g->nodes()[i];
    } else {
        const auto& p = std::get<PolarGrid>(grid);
        const auto nt = static_cast<std::size_t>(p.ntheta());
        csv << p.radii()[i / nt] << p.angles()[i % nt];
    }
}

std::vector<std::string> with(std::vector<std::string> head, std::initializer_list<const char*> tail) {
    for (const char* t : tail) head.emplace_back(t);
    return head;
}

void write_text(const fs::path& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << body;
}

std::string gnuplot_head(const std::string& png) {
    return "set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\nset output '" +
           png + "'\n";
}

FourierPerturbation parse_perturbation(const std::string& text) {
    const bool cosine = text.rfind("cos", 0) == 0;
    const bool sine = text.rfind("sin", 0) == 0;
    int k = 0;
    if ((cosine || sine) && text.size() > 3) {
        char* end = nullptr;
        const long v = std::strtol(text.c_str() + 3, &end, 10);
        if (*end == '\0') k = static_cast<int>(v);
    }
    if (k < 1) throw ConfigError("config key 'g': expected cosK or sinK with K >= 1, got '" + text + "'");
    return cosine ? FourierPerturbation::cosine(k) : FourierPerturbation::sine(k);
}

std::vector<PlanEntry> parse_plan(const RunConfig& cfg) {
    std::vector<PlanEntry> plan;
    for (const auto& item : cfg.list("plan")) {
        std::vector<std::string> parts;
        std::stringstream ss(item);
        std::string p;
        while (std::getline(ss, p, ':')) parts.push_back(p);
        if (parts.size() != 4)
            throw ConfigError("config key 'plan': expected family:count:size_lo:size_hi, got '" + item + "'");
        PlanEntry e;
        e.family = parse_family(parts[0]);
        char* end = nullptr;
        e.count = static_cast<int>(std::strtol(parts[1].c_str(), &end, 10));
        bool ok = *end == '\0' && !parts[1].empty();
        e.size_lo = std::strtod(parts[2].c_str(), &end);
        ok = ok && *end == '\0';
        e.size_hi = std::strtod(parts[3].c_str(), &end);
        ok = ok && *end == '\0';
        if (!ok || e.count < 0 || !(e.size_lo > 0.0) || e.size_hi < e.size_lo)
            throw ConfigError("config key 'plan': bad entry '" + item + "'");
        plan.push_back(std::move(e));
    }
    if (plan.empty()) throw ConfigError("config key 'plan': empty survey plan");
    return plan;
}

} // namespace

GridPtr make_grid(const RunConfig& cfg) {
    const std::string& geometry = cfg.text("geometry");
    if (geometry == "interval") return make_interval_grid(cfg.number("a"), cfg.number("b"), node_count_for(cfg, false));
    if (geometry == "disk") return make_radial_grid(cfg.number("R"), node_count_for(cfg, false));
    if (geometry == "polar") return make_polar_grid(cfg.number("R"), cfg.integer("nr"), cfg.integer("ntheta"));
    throw ConfigError("config key 'geometry': expected interval, disk or polar, got '" + geometry + "'");
}

void cmd_eig(const RunConfig& cfg) {
    const GridPtr grid = make_grid(cfg);
    const double v0 = cfg.number("v0");
    const std::string& kind = cfg.text("potential");
    std::optional<PotentialField> V;
    if (kind == "ball") {
        V = ball_potential(grid, v0);
    } else if (kind == "annulus") {
        V = annulus_competitor(grid, v0, cfg.number("delta")).field;
    } else if (kind == "file") {
        auto values = read_potential_csv(cfg.text("potential_file"));
        if (values.size() != node_count(*grid)) {
            std::ostringstream os;
            os << "potential file has " << values.size() << " values, grid has " << node_count(*grid) << " nodes";
            throw ConfigError(os.str());
        }
        V = PotentialField(grid, std::move(values));
    } else {
        throw ConfigError("config key 'potential': expected ball, annulus or file, got '" + kind + "'");
    }
    const SolveOptions opts = solve_options(cfg);
    const fs::path out = prepare(cfg);
    const DiscreteOperator op = assemble(*grid, *V);
    const EigenPair first = principal_eigenpair(op, opts);
    const EigenPair second = second_eigenpair(op, first, opts);

    CsvWriter eig(out / "eig.csv", with(coordinate_names(*grid), {"u", "V"}));
    for (std::size_t i = 0; i < first.u.size(); ++i) {
        write_coordinates(eig, *grid, i);
        eig << first.u[i] << V->values()[i];
        eig.end_row();
    }
    CsvWriter summary(out / "summary.csv", {"lambda", "lambda2", "residual", "mass"});
    summary << first.lambda << second.lambda << first.residual << V->mass();
    summary.end_row();

    const std::string x = coordinate_names(*grid).front();
    if (std::holds_alternative<PolarGrid>(*grid)) {
        write_text(out / "eig.gp", gnuplot_head("eig.png") + "set view map\nsplot 'eig.csv' using ($1*cos($2)):($1*sin($2)):3 with points pt 5 ps 0.3 palette title 'u'\n");
    } else {
        write_text(out / "eig.gp", gnuplot_head("eig.png") + "set xlabel '" + x +
                                       "'\nplot 'eig.csv' using 1:2 with lines title 'u', '' using 1:3 with lines title 'V'\n");
    }
    std::cout << "lambda = " << format_number(first.lambda) << "  lambda2 = " << format_number(second.lambda) << "\n";
}

void cmd_modes(const RunConfig& cfg) {
    const int K = cfg.integer("modes");
    if (K < 1) throw ConfigError("config key 'modes': must be at least 1");
    const GridPtr grid = make_radial_grid(cfg.number("R"), node_count_for(cfg, true));
    const BallContext ctx = ball_context(grid, cfg.number("v0"), solve_options(cfg));
    const fs::path out = prepare(cfg);
    const auto modes = solve_modes(ctx, K);
    CsvWriter csv(out / "omega.csv", {"k", "omega_k", "psi_at_rstar"});
    for (const auto& m : modes) {
        csv << m.k << m.omega_k << m.psi_at_rstar;
        csv.end_row();
    }
    const std::string limit = format_number(-ctx.du_star_boundary);
    write_text(out / "omega.gp", gnuplot_head("omega.png") + "set xlabel 'k'\nset ylabel 'omega_k'\nlimit = " + limit +
                                     "\nplot 'omega.csv' using 1:2 with linespoints title 'omega_k', limit with lines "
                                     "dashtype 2 title \"-u*'(r*)\"\n");
    std::cout << "omega_1 = " << format_number(modes.front().omega_k) << "  omega_" << K << " = "
              << format_number(modes.back().omega_k) << "  -u*'(r*) = " << limit << "\n";
}

void cmd_hessian_check(const RunConfig& cfg) {
    const auto specs = cfg.list("g");
    if (specs.empty()) throw ConfigError("config key 'g': empty mode list");
    std::vector<FourierPerturbation> gs;
    int K = 0;
    for (const auto& s : specs) {
        gs.push_back(parse_perturbation(s));
        K = std::max(K, gs.back().max_mode());
    }
    const auto ts = cfg.numbers("ts");
    if (ts.empty()) throw ConfigError("config key 'ts': empty step list");
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (!(ts[i] > 0.0) || (i && ts[i] >= ts[i - 1]))
            throw ConfigError("config key 'ts': steps must be positive and strictly decreasing");
    const SolveOptions opts = solve_options(cfg);
    const GridPtr radial = make_radial_grid(cfg.number("R"), node_count_for(cfg, true));
    const GridPtr polar = make_polar_grid(cfg.number("R"), cfg.integer("nr"), cfg.integer("ntheta"));
    const BallContext ctx = ball_context(radial, cfg.number("v0"), opts);
    const fs::path out = prepare(cfg);
    const auto modes = solve_modes(ctx, K);

    CsvWriter csv(out / "hessian.csv", {"g", "t", "L_t", "FD1", "FD2", "fourier_form", "rel_err", "boundary_form",
                                        "rel_err_boundary", "noisy"});
    for (std::size_t q = 0; q < gs.size(); ++q) {
        const double fourier = hessian_quadratic_form(ctx, modes, gs[q]);
        const double boundary = second_shape_derivative(ctx, modes, gs[q]);
        const FdShapeRecord rec = fd_shape_check(ctx, polar, gs[q], ts, opts, cfg.integer("subslices"));
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double fd2 = rec.second_derivative[i];
            csv << specs[q] << ts[i] << rec.L_plus[i] << rec.first_derivative[i] << fd2 << fourier
                << std::abs(fd2 - fourier) / std::abs(fourier) << boundary << std::abs(fd2 - boundary) / std::abs(boundary)
                << (rec.noisy ? 1 : 0);
            csv.end_row();
        }
        std::cout << specs[q] << ": FD2(t=" << format_number(ts.back()) << ") = " << format_number(rec.second_derivative.back())
                  << "  fourier_form = " << format_number(fourier) << "  boundary_form = " << format_number(boundary)
                  << (rec.noisy ? "  [noisy]" : "") << "\n";
    }
    write_text(out / "hessian.gp", gnuplot_head("hessian.png") +
                                       "set logscale x\nset xlabel 't'\nset ylabel 'FD2 / boundary_form'\n"
                                       "plot 'hessian.csv' using 2:($5/$8) with linespoints title 'FD2 / boundary form'\n");
}

void cmd_optimize(const RunConfig& cfg_in) {
    RunConfig cfg = cfg_in;
    if (cfg.flag("remark3")) {
        cfg.set("geometry", "interval");
        cfg.set("a", "-1");
        cfg.set("b", "1");
        cfg.set("v0", "0.6");
        cfg.set("deltas", "0.1,0.2,0.4,0.8");
    }
    const auto deltas = cfg.numbers("deltas");
    if (deltas.empty()) throw ConfigError("config key 'deltas': empty list");
    const GridPtr grid = make_grid(cfg);
    const double v0 = cfg.number("v0");
    OptimizeOptions opts;
    opts.solve = solve_options(cfg);
    opts.max_iter = cfg.integer("max_iter");
    const fs::path out = prepare(cfg);
    const bool polar = std::holds_alternative<PolarGrid>(*grid);

    CsvWriter report(out / "report.csv", {"delta", "lambda", "iterations", "converged", "mu", "eta", "zeta", "f_delta",
                                          "l1_to_annulus", "file"});
    std::string plot;
    for (double delta : deltas) {
        const OptimizerReport r = polar ? minimize_delta_2d(grid, v0, delta, opts) : minimize_delta_radial(grid, v0, delta, opts);
        const PotentialField annulus = annulus_competitor(grid, v0, delta).field;
        char name[64];
        std::snprintf(name, sizeof name, "V_delta_%g.csv", delta);
        CsvWriter csv(out / name, with(coordinate_names(*grid), {"V_delta", "V_star_minus_V_delta", "u"}));
        const auto v = r.V.values();
        for (std::size_t i = 0; i < v.size(); ++i) {
            write_coordinates(csv, *grid, i);
            csv << v[i] << r.star[i] - v[i] << r.eig.u[i];
            csv.end_row();
        }
        const double nan = std::nan("");
        report << delta << r.lambda << r.iterations << (r.converged ? 1 : 0) << r.mu_delta.value_or(nan)
               << r.eta_delta.value_or(nan) << r.zeta_delta.value_or(nan) << r.f_delta.value_or(nan)
               << l1_distance(r.V, annulus) << name;
        report.end_row();
        std::cout << "delta = " << format_number(delta) << "  lambda = " << format_number(r.lambda)
                  << "  iterations = " << r.iterations << (r.converged ? "" : "  [not converged]") << "\n";
        if (!polar) plot += std::string(plot.empty() ? "plot " : ", ") + "'" + name + "' using 1:2 with lines title 'V " +
                            format_number(delta) + "', '' using 1:3 with lines title 'V* - V " + format_number(delta) + "'";
    }
    if (!plot.empty()) write_text(out / "optimize.gp", gnuplot_head("optimize.png") + plot + "\n");
}

void cmd_deficit(const RunConfig& cfg) {
    const auto plan = parse_plan(cfg);
    const GridPtr grid = make_grid(cfg);
    const std::uint64_t seed = cfg.unsigned_integer("seed");
    const SolveOptions opts = solve_options(cfg);
    const fs::path out = prepare(cfg);
    const DeficitReport rep = deficit_survey(grid, cfg.number("v0"), plan, seed, opts);

    CsvWriter samples(out / "samples.csv", {"index", "family", "size", "delta", "lambda", "deficit", "ratio", "flagged"});
    for (std::size_t i = 0; i < rep.samples.size(); ++i) {
        const auto& s = rep.samples[i];
        samples << i << family_name(s.family) << s.size << s.delta << s.lambda << s.deficit << s.ratio << (s.flagged ? 1 : 0);
        samples.end_row();
    }
    CsvWriter report(out / "report.csv", {"scope", "count", "flagged", "min_ratio", "median_ratio", "seed", "lambda_star"});
    int flagged = 0;
    for (const auto& s : rep.samples) flagged += s.flagged ? 1 : 0;
    const std::string seed_text = std::to_string(rep.seed);
    report << "all" << rep.samples.size() << flagged << rep.min_ratio << std::nan("") << seed_text << rep.lambda_star;
    report.end_row();
    for (const auto& f : rep.families) {
        report << family_name(f.family) << f.count << f.flagged << f.min_ratio << f.median_ratio << seed_text << rep.lambda_star;
        report.end_row();
    }
    write_text(out / "deficit.gp", gnuplot_head("deficit.png") +
                                       "set logscale xy\nset xlabel 'delta'\nset ylabel 'deficit'\n"
                                       "plot 'samples.csv' using 4:6 with points title 'lambda(V) - lambda(V*)'\n");
    std::cout << "samples = " << rep.samples.size() << "  flagged = " << flagged
              << "  min_ratio = " << format_number(rep.min_ratio) << "  seed = " << rep.seed << "\n";
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const SizingError*>(&e)) return 2;
    if (dynamic_cast<const InfeasibleError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
        dynamic_cast<const DegenerateInputError*>(&e))
        return 3;
    return 4;
}

int run(int argc, char** argv) {
    CLI::App app{"Principal eigenvalue of -Laplace - V over admissible potentials"};
    app.require_subcommand(1);
    struct Sub {
        const char* name;
        const char* help;
        void (*fn)(const RunConfig&);
    };
    const Sub subs[] = {
        {"eig", "principal and second eigenpair of a potential", cmd_eig},
        {"modes", "coercivity sequence omega_k of the ball", cmd_modes},
        {"hessian-check", "finite-difference check of the second shape derivative", cmd_hessian_check},
        {"optimize", "fixed-point optimizer under an L1 distance constraint", cmd_optimize},
        {"deficit", "survey of lambda(V) - lambda(V*) against |V - V*|^2", cmd_deficit},
    };
    std::map<std::string, std::string> flags;
    std::string config_file;
    bool remark3 = false;
    const Sub* chosen = nullptr;
    std::vector<std::pair<CLI::App*, const Sub*>> apps;
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--config", config_file, "key = value configuration file");
        for (const auto& k : RunConfig::keys()) {
            if (std::string(k.name) == "remark3") continue;
            std::string names = std::string("--") + k.name;
            const std::string dashed = [&] {
                std::string d = k.name;
                std::replace(d.begin(), d.end(), '_', '-');
                return d;
            }();
            if (dashed != k.name) names += ",--" + dashed;
            sub->add_option_function<std::string>(names, [&flags, key = std::string(k.name)](const std::string& v) { flags[key] = v; },
                                                  std::string(k.help) + " [" + k.value + "]");
        }
        if (std::string(s.name) == "optimize")
            sub->add_flag("--remark3", remark3, "interval preset v0 = 0.6, deltas 0.1,0.2,0.4,0.8");
        apps.emplace_back(sub, &s);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    for (const auto& [sub, s] : apps)
        if (sub->parsed()) chosen = s;

    try {
        kernels::apply_thread_limit_from_env();
        RunConfig cfg;
        if (!config_file.empty()) cfg.load_file(config_file);
        for (const auto& [k, v] : flags) cfg.set(k, v);
        if (remark3) cfg.set("remark3", "true");
        if (const int threads = cfg.integer("threads"); threads > 0) kernels::set_thread_limit(threads);
        chosen->fn(cfg);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

} // namespace spl::cli
