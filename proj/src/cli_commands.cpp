#include "cavity/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "cavity/errors.hpp"
#include "cavity/inverse.hpp"
#include "cavity/modes.hpp"
#include "cavity/ray.hpp"
#include "cavity/steady_state.hpp"

namespace cavity {

namespace {

using nlohmann::json;

// All numeric output goes through this: 17 significant digits, round-trip safe.
std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string fmt_complex(const Complex& z) {
    return "[" + fmt17(z.real()) + ", " + fmt17(z.imag()) + "]";
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& context) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* key : allowed)
            if (it.key() == key) ok = true;
        if (!ok)
            throw ConfigError("unknown key \"" + it.key() + "\" in " + context);
    }
}

double require_number(const json& obj, const char* key, const std::string& context) {
    if (!obj.contains(key))
        throw ConfigError("missing field \"" + std::string(key) + "\" in " + context);
    if (!obj[key].is_number())
        throw ConfigError("field \"" + std::string(key) + "\" in " + context + " must be a number");
    return obj[key].get<double>();
}

Complex parse_complex(const json& v, const std::string& context) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError(context + " must be a number or [re, im]");
}

ValueWithSigma parse_value_sigma(const json& v, const std::string& context) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError(context + " must be a number or [value, sigma]");
}

ModeEnsemble parse_ensemble(const json& obj) {
    check_keys(obj, {"gamma_r", "omega_r", "modes"}, "ensemble");
    ModeEnsemble e;
    e.gamma_r = require_number(obj, "gamma_r", "ensemble");
    if (obj.contains("omega_r")) e.omega_r = obj["omega_r"].get<double>();
    if (!obj.contains("modes") || !obj["modes"].is_array() || obj["modes"].empty())
        throw ConfigError("ensemble.modes must be a non-empty array");
    for (const json& mj : obj["modes"]) {
        check_keys(mj, {"gamma", "g", "a"}, "ensemble.modes[]");
        ChaoticMode m;
        m.gamma = require_number(mj, "gamma", "ensemble.modes[]");
        m.g = require_number(mj, "g", "ensemble.modes[]");
        m.a = mj.contains("a") ? parse_complex(mj["a"], "modes[].a") : Complex{1.0, 0.0};
        e.modes.push_back(m);
    }
    e.validate();
    return e;
}

PumpDrive parse_drive(const json& obj) {
    check_keys(obj, {"E0", "delta", "gamma_L"}, "drive");
    PumpDrive d;
    if (obj.contains("E0")) d.E0 = parse_complex(obj["E0"], "drive.E0");
    if (obj.contains("delta")) d.delta = obj["delta"].get<double>();
    if (obj.contains("gamma_L")) d.gamma_L = obj["gamma_L"].get<double>();
    d.validate();
    return d;
}

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out)
        throw Error("cannot open output file " + (dir / name).string());
    return out;
}

void write_steady_state_json(std::ostream& out, const char* label, const SteadyState& s,
                             bool trailing_comma) {
    out << "    \"" << label << "\": {\n";
    out << "      \"E_r\": " << fmt_complex(s.E_r) << ",\n";
    out << "      \"E_p\": " << fmt_complex(s.E_p) << ",\n";
    out << "      \"I_r\": " << fmt17(s.I_r) << ",\n";
    out << "      \"I_p\": " << fmt17(s.I_p) << ",\n";
    out << "      \"E_n\": [";
    for (std::size_t i = 0; i < s.E_n.size(); ++i)
        out << (i ? ", " : "") << fmt_complex(s.E_n[i]);
    out << "]";
    if (!s.bracket_diagnostic.empty()) {
        out << ",\n      \"neglected_bracket\": [";
        for (std::size_t i = 0; i < s.bracket_diagnostic.size(); ++i)
            out << (i ? ", " : "") << fmt17(s.bracket_diagnostic[i]);
        out << "]";
    }
    out << "\n    }" << (trailing_comma ? "," : "") << "\n";
}

int cmd_steady(const json& cfg, const CliOptions& opt) {
    check_keys(cfg, {"command", "ensemble", "drive", "seed"}, "config");
    if (!cfg.contains("ensemble")) throw ConfigError("missing field \"ensemble\" in config");
    const ModeEnsemble ensemble = parse_ensemble(cfg["ensemble"]);
    const PumpDrive drive = cfg.contains("drive") ? parse_drive(cfg["drive"]) : PumpDrive{};

    const DerivedParams p = derive_params(ensemble, drive);
    const SteadyState exact = steady_state_exact(ensemble, drive);
    const SteadyState first_order = steady_state_first_order(ensemble, drive);
    const SteadyState oracle = steady_state_linear_solve(ensemble, drive);
    const auto warnings = ensemble.overdamped_violations();

    if (opt.format == "csv") {
        std::ofstream out = open_output(opt.out_dir, "steady.csv");
        out << "quantity,value\n";
        out << "E_p0," << fmt17(p.E_p0) << "\n";
        out << "I_p0," << fmt17(p.I_p0) << "\n";
        out << "g_bar_re," << fmt17(p.g_bar.real()) << "\n";
        out << "g_bar_im," << fmt17(p.g_bar.imag()) << "\n";
        out << "gamma_p," << (p.gamma_p ? fmt17(*p.gamma_p) : "") << "\n";
        out << "G," << fmt17(p.G) << "\n";
        out << "gamma_r_prime," << fmt17(p.gamma_r_prime) << "\n";
        out << "alpha," << fmt17(p.alpha) << "\n";
        out << "alpha_prime," << fmt17(p.alpha_prime) << "\n";
        out << "I_r_exact," << fmt17(exact.I_r) << "\n";
        out << "I_p_exact," << fmt17(exact.I_p) << "\n";
    } else {
        std::ofstream out = open_output(opt.out_dir, "steady.json");
        out << "{\n  \"derived\": {\n";
        out << "    \"E_p0\": " << fmt17(p.E_p0) << ",\n";
        out << "    \"I_p0\": " << fmt17(p.I_p0) << ",\n";
        out << "    \"g_bar\": " << fmt_complex(p.g_bar) << ",\n";
        out << "    \"gamma_p\": " << (p.gamma_p ? fmt17(*p.gamma_p) : "null") << ",\n";
        out << "    \"G\": " << fmt17(p.G) << ",\n";
        out << "    \"gamma_r_prime\": " << fmt17(p.gamma_r_prime) << ",\n";
        out << "    \"alpha\": " << fmt17(p.alpha) << ",\n";
        out << "    \"alpha_prime\": " << fmt17(p.alpha_prime) << "\n";
        out << "  },\n  \"steady\": {\n";
        write_steady_state_json(out, "exact", exact, true);
        write_steady_state_json(out, "first_order", first_order, true);
        write_steady_state_json(out, "linear_solve", oracle, false);
        out << "  },\n  \"overdamped_warning_modes\": [";
        for (std::size_t i = 0; i < warnings.size(); ++i)
            out << (i ? ", " : "") << warnings[i];
        out << "]\n}\n";
    }
    return 0;
}

int cmd_scan(const json& cfg, const CliOptions& opt) {
    check_keys(cfg, {"command", "ensemble", "drive", "delta_grid", "beta_p", "beta_r", "seed"},
               "config");
    if (!cfg.contains("ensemble")) throw ConfigError("missing field \"ensemble\" in config");
    if (!cfg.contains("delta_grid")) throw ConfigError("missing field \"delta_grid\" in config");
    const ModeEnsemble ensemble = parse_ensemble(cfg["ensemble"]);
    const PumpDrive drive = cfg.contains("drive") ? parse_drive(cfg["drive"]) : PumpDrive{};
    const json& grid = cfg["delta_grid"];
    check_keys(grid, {"start", "stop", "step"}, "delta_grid");
    const double start = require_number(grid, "start", "delta_grid");
    const double stop = require_number(grid, "stop", "delta_grid");
    const double step = require_number(grid, "step", "delta_grid");
    if (!(step > 0.0) || stop < start)
        throw ConfigError("delta_grid must be monotone with step > 0");
    const double beta_p = cfg.contains("beta_p") ? cfg["beta_p"].get<double>() : 1.0;
    const double beta_r = cfg.contains("beta_r") ? cfg["beta_r"].get<double>() : 1.0;
    if (!(beta_p > 0.0)) throw InvalidOverlapError("beta_p must be > 0");

    const DerivedParams p = derive_params(ensemble, drive);
    std::ofstream out = open_output(opt.out_dir, "scan.csv");
    out << "delta,I_r,I_p,lineshape,efficiency\n";
    const long n_steps = static_cast<long>((stop - start) / step + 0.5);
    for (long i = 0; i <= n_steps; ++i) {
        const double delta = start + static_cast<double>(i) * step;
        const auto [I_r, I_p] = intensities(p, delta);
        const double L = lineshape_convolved(p, delta, drive.gamma_L / ensemble.gamma_r);
        const double eps = efficiency(p, delta, beta_p, beta_r, drive.gamma_L);
        out << fmt17(delta) << "," << fmt17(I_r) << "," << fmt17(I_p) << ","
            << fmt17(L) << "," << fmt17(eps) << "\n";
    }
    return 0;
}

struct InvertRow {
    std::string label;
    std::string status = "ok";
    ExtractedParams params;
};

int cmd_invert(const json& cfg, const CliOptions& opt, std::uint64_t seed) {
    check_keys(cfg, {"command", "measurements", "n_samples", "seed"}, "config");
    if (!cfg.contains("measurements") || !cfg["measurements"].is_array() ||
        cfg["measurements"].empty())
        throw ConfigError("config.measurements must be a non-empty array");
    const int n_samples = cfg.contains("n_samples") ? cfg["n_samples"].get<int>() : 0;

    std::vector<InvertRow> rows;
    for (const json& rj : cfg["measurements"]) {
        InvertRow row;
        row.label = rj.contains("mode") ? rj["mode"].get<std::string>() : std::to_string(rows.size() + 1);
        try {
            if (rj.contains("G")) {
                // Direct form: (gamma_r, G, gamma_p) given, derived columns only.
                check_keys(rj, {"mode", "gamma_r", "G", "gamma_p"}, "measurements[]");
                const ValueWithSigma gamma_r = parse_value_sigma(rj.at("gamma_r"), "gamma_r");
                const ValueWithSigma G = parse_value_sigma(rj.at("G"), "G");
                const ValueWithSigma gamma_p = parse_value_sigma(rj.at("gamma_p"), "gamma_p");
                const DerivedColumns c = derived_columns(gamma_r.value, G.value, gamma_p.value);
                row.params.mode_label = row.label;
                row.params.gamma_r = gamma_r;
                row.params.G = G;
                row.params.g_bar = {c.g_bar, 0.0};
                row.params.alpha = {c.alpha, 0.0};
                row.params.alpha_prime = {c.alpha_prime, 0.0};
                row.params.gamma_rG = {c.gamma_rG, 0.0};
            } else {
                check_keys(rj, {"mode", "epsilon0", "gamma_r_prime", "beta_r", "beta_p",
                                "gamma_p", "gamma_L"},
                           "measurements[]");
                Measurement m;
                m.mode_label = row.label;
                m.epsilon0 = parse_value_sigma(rj.at("epsilon0"), "epsilon0");
                m.gamma_r_prime = parse_value_sigma(rj.at("gamma_r_prime"), "gamma_r_prime");
                m.beta_r = parse_value_sigma(rj.at("beta_r"), "beta_r");
                m.beta_p = parse_value_sigma(rj.at("beta_p"), "beta_p");
                m.gamma_p = parse_value_sigma(rj.at("gamma_p"), "gamma_p");
                if (rj.contains("gamma_L")) m.gamma_L = rj["gamma_L"].get<double>();
                row.params = n_samples > 0 ? propagate_uncertainty(m, n_samples, seed)
                                           : extract(m);
            }
        } catch (const NoRootError& err) {
            row.status = std::string("NoRoot: ") + err.what();
        } catch (const InvalidOverlapError& err) {
            row.status = std::string("InvalidOverlap: ") + err.what();
        }
        rows.push_back(std::move(row));
    }

    std::size_t ok_count = 0;
    std::vector<GbarTunnelingRow> consistency_input;
    for (const InvertRow& r : rows)
        if (r.status == "ok") {
            ++ok_count;
            if (r.params.gamma_rG.value > 0.0)
                consistency_input.push_back({r.params.g_bar.value, r.params.gamma_rG.value});
        }

    auto emit_row_csv = [](std::ostream& out, const InvertRow& r) {
        const ExtractedParams& p = r.params;
        out << r.label << "," << r.status;
        for (const ValueWithSigma* v :
             {&p.gamma_r, &p.G, &p.g_bar, &p.alpha, &p.alpha_prime, &p.gamma_rG})
            out << "," << fmt17(v->value) << "," << fmt17(v->sigma);
        out << "\n";
    };

    if (opt.format == "csv") {
        std::ofstream out = open_output(opt.out_dir, "invert.csv");
        out << "mode,status,gamma_r,sigma_gamma_r,G,sigma_G,g_bar,sigma_g_bar,"
               "alpha,sigma_alpha,alpha_prime,sigma_alpha_prime,gamma_rG,sigma_gamma_rG\n";
        for (const InvertRow& r : rows) emit_row_csv(out, r);
    } else {
        std::ofstream out = open_output(opt.out_dir, "invert.json");
        out << "{\n  \"rows\": [\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const InvertRow& r = rows[i];
            const ExtractedParams& p = r.params;
            out << "    {\"mode\": \"" << r.label << "\", \"status\": \"" << r.status << "\"";
            if (r.status == "ok") {
                out << ",\n     \"gamma_r\": [" << fmt17(p.gamma_r.value) << ", " << fmt17(p.gamma_r.sigma) << "]"
                    << ", \"G\": [" << fmt17(p.G.value) << ", " << fmt17(p.G.sigma) << "]"
                    << ",\n     \"g_bar\": [" << fmt17(p.g_bar.value) << ", " << fmt17(p.g_bar.sigma) << "]"
                    << ", \"alpha\": [" << fmt17(p.alpha.value) << ", " << fmt17(p.alpha.sigma) << "]"
                    << ",\n     \"alpha_prime\": [" << fmt17(p.alpha_prime.value) << ", " << fmt17(p.alpha_prime.sigma) << "]"
                    << ", \"gamma_rG\": [" << fmt17(p.gamma_rG.value) << ", " << fmt17(p.gamma_rG.sigma) << "]"
                    << ", \"rejection_fraction\": " << fmt17(p.rejection_fraction);
                if (!p.extra_G_roots.empty()) {
                    out << ", \"extra_G_roots\": [";
                    for (std::size_t k = 0; k < p.extra_G_roots.size(); ++k)
                        out << (k ? ", " : "") << fmt17(p.extra_G_roots[k]);
                    out << "]";
                }
            }
            out << "}" << (i + 1 < rows.size() ? "," : "") << "\n";
        }
        out << "  ]\n}\n";
    }

    if (consistency_input.size() >= 2) {
        const GammaPConsistency gc = gamma_p_consistency(consistency_input);
        std::ofstream out = open_output(opt.out_dir, "gamma_p_consistency.json");
        out << "{\n  \"per_mode\": [";
        for (std::size_t i = 0; i < gc.per_mode.size(); ++i)
            out << (i ? ", " : "") << fmt17(gc.per_mode[i]);
        out << "],\n  \"mean\": " << fmt17(gc.mean)
            << ",\n  \"relative_spread\": " << fmt17(gc.relative_spread) << "\n}\n";
    }

    if (ok_count == 0) {
        std::cerr << "invert: every measurement row failed\n";
        return 3;
    }
    return 0;
}

int cmd_raysim(const json& cfg, const CliOptions& opt, std::optional<std::uint64_t> seed_override) {
    check_keys(cfg, {"command", "geometry", "bundle", "max_bounces", "seed"}, "config");
    if (!cfg.contains("geometry")) throw ConfigError("missing field \"geometry\" in config");
    if (!cfg.contains("bundle")) throw ConfigError("missing field \"bundle\" in config");

    const json& gj = cfg["geometry"];
    check_keys(gj, {"r0", "deformation", "m"}, "geometry");
    CavityGeometry geom;
    geom.r0 = require_number(gj, "r0", "geometry");
    geom.m = require_number(gj, "m", "geometry");
    if (gj.contains("deformation")) {
        for (const json& hj : gj["deformation"]) {
            check_keys(hj, {"k", "eta"}, "geometry.deformation[]");
            geom.deformation.push_back({hj.at("k").get<int>(), hj.at("eta").get<double>()});
        }
    }
    geom.validate();

    const json& bj = cfg["bundle"];
    check_keys(bj, {"theta0", "chi0", "sigma_theta", "sigma_chi", "count", "seed"}, "bundle");
    RayBundle bundle;
    bundle.theta0 = require_number(bj, "theta0", "bundle");
    bundle.chi0 = require_number(bj, "chi0", "bundle");
    if (bj.contains("sigma_theta")) bundle.sigma_theta = bj["sigma_theta"].get<double>();
    if (bj.contains("sigma_chi")) bundle.sigma_chi = bj["sigma_chi"].get<double>();
    if (bj.contains("count")) bundle.count = bj["count"].get<int>();
    if (bj.contains("seed")) bundle.seed = bj["seed"].get<std::uint64_t>();
    if (seed_override) bundle.seed = *seed_override;
    bundle.validate();

    const int max_bounces = cfg.contains("max_bounces") ? cfg["max_bounces"].get<int>() : 100000;

    const EscapeStats stats = bundle_stats(geom, bundle, max_bounces, opt.threads);

    {
        std::ofstream out = open_output(opt.out_dir, "raysim.json");
        out << "{\n";
        out << "  \"L_p\": " << fmt17(stats.L_p) << ",\n";
        out << "  \"gamma_p\": " << fmt17(stats.gamma_p) << ",\n";
        out << "  \"escaped\": " << stats.escaped << ",\n";
        out << "  \"confined\": " << stats.confined << ",\n";
        out << "  \"seed\": " << bundle.seed << "\n";
        out << "}\n";
    }
    {
        std::ofstream out = open_output(opt.out_dir, "birkhoff.csv");
        out << "s,sin_chi\n";
        for (const auto& [s, sc] : stats.birkhoff_trace)
            out << fmt17(s) << "," << fmt17(sc) << "\n";
    }
    {
        std::ofstream out = open_output(opt.out_dir, "survival.csv");
        out << "path_length,fraction_remaining\n";
        for (const auto& [L, frac] : stats.survival_curve)
            out << fmt17(L) << "," << fmt17(frac) << "\n";
    }
    return 0;
}

} // namespace

int run_cli(const CliOptions& options) {
    json cfg;
    std::string command;
    try {
        std::ifstream in(options.config_path);
        if (!in)
            throw ConfigError("cannot read config file " + options.config_path);
        cfg = json::parse(in);
        if (!cfg.is_object() || !cfg.contains("command") || !cfg["command"].is_string())
            throw ConfigError("config must be an object with a \"command\" string");
        command = cfg["command"].get<std::string>();
        if (options.format != "csv" && options.format != "json")
            throw ConfigError("--format must be csv or json");
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    std::uint64_t seed = 0;
    if (cfg.contains("seed") && cfg["seed"].is_number()) seed = cfg["seed"].get<std::uint64_t>();
    if (options.seed) seed = *options.seed;

    try {
        if (command == "steady") return cmd_steady(cfg, options);
        if (command == "scan") return cmd_scan(cfg, options);
        if (command == "invert") return cmd_invert(cfg, options, seed);
        if (command == "raysim")
            return cmd_raysim(cfg, options,
                              options.seed ? options.seed : std::optional<std::uint64_t>{});
        throw ConfigError("unknown command \"" + command + "\"");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidEnsembleError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidOverlapError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const GeometryError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "computation error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace cavity
