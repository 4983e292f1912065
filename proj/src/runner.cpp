#include "bilag/runner.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include "bilag/errors.hpp"
#include "bilag/lifts.hpp"
#include "bilag/torus.hpp"

namespace bilag {

namespace {

using nlohmann::ordered_json;

std::string fmt_double(double v) {
    std::array<char, 32> buf;
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), p);
}

ordered_json check_to_json(const CheckResult& c) {
    return ordered_json{{"name", c.name},
                        {"kind", c.lower_bound ? "lower" : "upper"},
                        {"residual", c.residual},
                        {"tolerance", c.tolerance},
                        {"samples", c.samples},
                        {"pass", c.pass},
                        {"worst_point", c.worst_point},
                        {"note", c.note}};
}

struct Ctx {
    const Scene& scene;
    VerifyOptions opt;
    long iters = 10000;
    int grid = 0;   // 0 = command default
    double tmax = 1e3;
    std::optional<double> tol_override;
};

Ctx make_ctx(const Scene& scene, const RunFlags& f) {
    Ctx c{scene, scene.tolerances, f.iters, f.grid.value_or(0), f.tmax.value_or(1e3),
          f.tol};
    c.opt.seed = f.seed.value_or(scene.seed);
    if (f.samples) c.opt.samples = *f.samples;
    if (f.tol) {
        // Blanket override of every residual (upper-bound) tolerance; the
        // lower-bound floors (determinant, transversality) keep their values.
        double t = *f.tol;
        c.opt.tol_closed = t;
        c.opt.tol_lagrangian = t;
        c.opt.tol_involutive = t;
        c.opt.tol_hess = t;
        c.opt.tol_affine = t;
        c.opt.tol_parakahler = t;
        c.opt.tol_inverse = t;
    }
    if (c.iters < 1) throw DomainError("--iters must be at least 1");
    return c;
}

RunResult finish(const Ctx& c, const std::string& command, const VerificationReport& rep,
                 ordered_json artifacts, std::string csv, int samples_field) {
    ordered_json j;
    j["schema"] = 1;
    j["command"] = command;
    j["scene"] = c.scene.origin;
    j["seed"] = c.opt.seed;
    j["samples"] = samples_field;
    j["pass"] = rep.pass();
    ordered_json checks = ordered_json::array();
    for (const auto& ck : rep.checks) checks.push_back(check_to_json(ck));
    j["checks"] = std::move(checks);
    j["artifacts"] = std::move(artifacts);
    return RunResult{rep.pass() ? 0 : 1, std::move(j), std::move(csv)};
}

const std::vector<std::pair<std::string, BiLagrangianStructure>>&
require_structures(const Ctx& c) {
    if (c.scene.structures.empty())
        throw DomainError("the scene declares no [structure] sections");
    return c.scene.structures;
}

const std::pair<std::string, TorusVectorField>& require_torusfield(const Ctx& c) {
    if (c.scene.torusfields.empty())
        throw DomainError("the scene declares no [torusfield] section");
    return c.scene.torusfields.front();
}

ordered_json structure_names(const Ctx& c) {
    ordered_json a = ordered_json::array();
    for (const auto& [n, S] : c.scene.structures) a.push_back(n);
    return a;
}

// ---------------------------------------------------------------- geometry

RunResult cmd_verify_structure(const Ctx& c) {
    VerificationReport rep;
    rep.title = "verify-structure";
    for (const auto& [name, S] : require_structures(c))
        rep.merge(verify_structure(S, c.opt), name + "/");
    return finish(c, "verify-structure", rep, {{"structures", structure_names(c)}}, "",
                  c.opt.samples);
}

RunResult cmd_hess(const Ctx& c) {
    VerificationReport rep;
    rep.title = "hess";
    for (const auto& [name, S] : require_structures(c)) {
        Connection nabla = hess_connection(S);
        rep.merge(check_hess_defining(S, nabla, c.opt), name + "/");
    }
    return finish(c, "hess", rep, {{"structures", structure_names(c)}}, "", c.opt.samples);
}

RunResult cmd_lift_tangent(const Ctx& c) {
    VerificationReport rep;
    rep.title = "lift-tangent";
    ordered_json charts = ordered_json::object();
    for (const auto& [name, S] : require_structures(c)) {
        BiLagrangianStructure TS = tangent_structure(S);
        rep.merge(verify_structure(TS, c.opt), name + "/tangent/");
        charts[name] = TS.chart->coords;
    }
    return finish(c, "lift-tangent", rep,
                  {{"structures", structure_names(c)}, {"lifted_charts", charts}}, "",
                  c.opt.samples);
}

RunResult cmd_lift_cotangent(const Ctx& c) {
    VerificationReport rep;
    rep.title = "lift-cotangent";
    ordered_json charts = ordered_json::object();
    for (const auto& [name, S] : require_structures(c)) {
        BiLagrangianStructure CD = cotangent_structure(S, false);
        BiLagrangianStructure CM = cotangent_structure(S, true);
        rep.merge(verify_structure(CD, c.opt), name + "/cotangent-dtheta/");
        rep.merge(verify_structure(CM, c.opt), name + "/cotangent-mixed/");
        charts[name] = CD.chart->coords;
    }
    return finish(c, "lift-cotangent", rep,
                  {{"structures", structure_names(c)}, {"lifted_charts", charts}}, "",
                  c.opt.samples);
}

RunResult cmd_verify_theorem1(const Ctx& c) {
    VerificationReport rep;
    rep.title = "verify-theorem1";
    for (const auto& [name, S] : require_structures(c))
        rep.merge(verify_theorem1(S, c.opt), name + "/");
    return finish(c, "verify-theorem1", rep, {{"structures", structure_names(c)}}, "",
                  c.opt.samples);
}

RunResult cmd_para_kahler(const Ctx& c) {
    VerificationReport rep;
    rep.title = "para-kahler";
    for (const auto& [name, S] : require_structures(c)) {
        ParaKahlerPair pk = para_kahler(S);
        rep.merge(check_para_kahler(S, pk, c.opt), name + "/");
    }
    return finish(c, "para-kahler", rep, {{"structures", structure_names(c)}}, "",
                  c.opt.samples);
}

RunResult cmd_pushforward(const Ctx& c) {
    if (c.scene.maps.empty()) throw DomainError("the scene declares no [map] section");
    VerificationReport rep;
    rep.title = "pushforward";
    ordered_json applied = ordered_json::array();
    for (const auto& [mn, mp] : c.scene.maps) {
        bool used = false;
        for (const auto& [sn, S] : require_structures(c)) {
            if (S.chart.get() != mp.forward.src().get()) continue;
            used = true;
            double res = inverse_residual(mp.forward, mp.inverse, c.opt.samples, c.opt.seed);
            rep.add(CheckResult::upper(mn + "/inverse-residual", res, c.opt.tol_inverse,
                                       c.opt.samples));
            BiLagrangianStructure T = pushforward_structure(mp.forward, mp.inverse, S);
            rep.merge(verify_structure(T, c.opt), mn + "/" + sn + "/");
            applied.push_back(ordered_json{{"map", mn},
                                           {"structure", sn},
                                           {"target_chart", mp.forward.dst()->name}});
        }
        if (!used)
            throw DomainError("map '" + mn +
                              "' starts on a chart that carries no declared structure");
    }
    return finish(c, "pushforward", rep, {{"applied", applied}}, "", c.opt.samples);
}

// ------------------------------------------------------------------- torus

ordered_json singularities_json(const TorusVectorField& X) {
    ordered_json a = ordered_json::array();
    for (const auto& s : find_singularities(X))
        a.push_back(ordered_json{{"x", s.x},
                                 {"y", s.y},
                                 {"class", s.cls},
                                 {"eig_re", s.eig_re},
                                 {"eig_im", s.eig_im}});
    return a;
}

RunResult cmd_cherry_validate(const Ctx& c) {
    if (c.scene.torusfields.empty())
        throw DomainError("the scene declares no [torusfield] section");
    VerificationReport rep;
    rep.title = "cherry-validate";
    ordered_json arts = ordered_json::object();
    for (const auto& [name, X] : c.scene.torusfields) {
        rep.merge(validate_cherry(X), name + "/");
        arts[name] = ordered_json{{"singularities", singularities_json(X)}};
    }
    return finish(c, "cherry-validate", rep, std::move(arts), "", 64 * 64);
}

ReturnMapOptions return_opts(const Ctx& c) {
    ReturnMapOptions o;
    if (c.grid > 0) o.grid = c.grid;
    o.tmax = c.tmax;
    o.flow.tmax = c.tmax;
    return o;
}

// Grid rows for a sampled circle map. Captured starts carry the flat value
// with transit time -1; graph rows reuse the stored samples when the grid
// point was sampled and fall back to evaluation otherwise.
std::string csv_of(const CircleMapWithFlat& m, int grid) {
    std::string out = "x,f_x,t_x,in_delta\n";
    for (int i = 0; i < grid; ++i) {
        double x = static_cast<double>(i) / grid;
        double f = 0, t = -1.0;
        int flat = 0;
        if (m.has_flat && m.in_flat(x)) {
            f = m.v;
            flat = 1;
        } else {
            auto it = std::lower_bound(m.xs.begin(), m.xs.end(), x - 1e-9);
            if (it != m.xs.end() && std::abs(*it - x) <= 1e-9) {
                size_t k = static_cast<size_t>(it - m.xs.begin());
                f = m.fs[k];
                if (k < m.ts.size()) t = m.ts[k];
            } else {
                f = m.eval(x);
            }
        }
        out += fmt_double(x);
        out += ',';
        out += fmt_double(f);
        out += ',';
        out += fmt_double(t);
        out += ',';
        out += flat ? '1' : '0';
        out += '\n';
    }
    return out;
}

ordered_json flat_json(const CircleMapWithFlat& m) {
    return ordered_json{{"has_flat", m.has_flat},
                        {"a", m.a},
                        {"b", m.b},
                        {"value", m.v},
                        {"width", m.width()}};
}

int count_inversions(const CircleMapWithFlat& m) {
    int inv = 0;
    for (size_t i = 0; i + 1 < m.xs.size(); ++i) {
        double d = m.fs[i + 1] - m.fs[i];
        if (d < -0.5) d += 1.0; // seam wrap of the value
        if (d < -1e-9) ++inv;
    }
    return inv;
}

RunResult cmd_cherry_return_map(const Ctx& c) {
    const auto& [name, X] = require_torusfield(c);
    ReturnMapOptions rmo = return_opts(c);
    CircleMapWithFlat m = return_map(X, rmo);
    VerificationReport rep;
    rep.title = "cherry-return-map";
    rep.add(CheckResult::lower("return-map/flat-width", m.width(), 0.01, rmo.grid, "",
                               m.has_flat ? "" : "no capture region; " + m.warning));
    if (m.has_flat) {
        double left = m.fn(wrap01(m.a - 1e-7));
        double right = m.fn(wrap01(m.b + 1e-7));
        double gap = circle_dist(left, right);
        double drift = std::max(circle_dist(left, m.v), circle_dist(right, m.v));
        rep.add(CheckResult::upper("return-map/flat-gap", gap,
                                   c.tol_override.value_or(1e-6), 2,
                                   "(" + fmt_double(m.a) + ")"));
        rep.add(CheckResult::upper("return-map/flat-value", drift,
                                   c.tol_override.value_or(1e-6), 2,
                                   "(" + fmt_double(m.a) + ")",
                                   "one-sided limits against the assigned flat value"));
    }
    rep.add(CheckResult::upper("return-map/monotone", count_inversions(m), 0,
                               static_cast<int>(m.xs.size()), "",
                               "inversions off the flat piece"));
    ordered_json arts{{"field", name},
                      {"flat", flat_json(m)},
                      {"warning", m.warning},
                      {"grid", rmo.grid}};
    return finish(c, "cherry-return-map", rep, std::move(arts), csv_of(m, rmo.grid),
                  rmo.grid);
}

// First circle map when one is declared, else the return map of the first
// torus field.
struct MapSource {
    CircleMapWithFlat map;
    std::string label;
};

MapSource resolve_map(const Ctx& c) {
    if (!c.scene.circlemaps.empty()) {
        const auto& [n, m] = c.scene.circlemaps.front();
        return {m, n};
    }
    if (!c.scene.torusfields.empty()) {
        const auto& [n, X] = c.scene.torusfields.front();
        return {return_map(X, return_opts(c)), n};
    }
    throw DomainError("the scene declares neither a [circlemap] nor a [torusfield]");
}

RunResult cmd_cherry_rho(const Ctx& c) {
    MapSource src = resolve_map(c);
    RotationNumberEstimate est = rotation_number(src.map, c.iters);
    VerificationReport rep;
    rep.title = "cherry-rho";
    ordered_json arts{{"source", src.label},
                      {"rho", est.value},
                      {"enclosure", est.enclosure},
                      {"iterations", est.iterations},
                      {"flat", flat_json(src.map)}};
    return finish(c, "cherry-rho", rep, std::move(arts), "",
                  static_cast<int>(c.iters));
}

ordered_json fit_json(const ExponentFit& fit) {
    return ordered_json{{"ell_left", fit.ell_left},
                        {"ell_right", fit.ell_right},
                        {"r2_left", fit.r2_left},
                        {"r2_right", fit.r2_right},
                        {"points_left", fit.points_left},
                        {"points_right", fit.points_right}};
}

RunResult cmd_cherry_exponents(const Ctx& c) {
    MapSource src = resolve_map(c);
    ExponentFit fit = critical_exponents(src.map);
    VerificationReport rep;
    rep.title = "cherry-exponents";
    ordered_json arts{{"source", src.label},
                      {"flat", flat_json(src.map)},
                      {"fit", fit_json(fit)}};
    return finish(c, "cherry-exponents", rep, std::move(arts), "",
                  fit.points_left + fit.points_right);
}

RunResult cmd_cherry_glue(const Ctx& c) {
    if (c.scene.circlemaps.size() < 2)
        throw DomainError("cherry-glue needs two [circlemap] sections");
    const auto& [n1, f1] = c.scene.circlemaps[0];
    const auto& [n2, f2] = c.scene.circlemaps[1];
    CircleMapWithFlat g = glue(f1, f2);
    VerificationReport rep;
    rep.title = "cherry-glue";
    rep.add(CheckResult::upper("glue/flat-left", std::abs(g.a - f1.a), 0.0, 1, "",
                               "left endpoint must come from the first map"));
    rep.add(CheckResult::upper("glue/flat-right", std::abs(g.b - f2.b), 0.0, 1, "",
                               "right endpoint must come from the second map"));
    double delta = 1e-8;
    double joins = std::max(std::abs(g.fn(wrap01(g.a - delta)) - g.v),
                            std::abs(g.fn(wrap01(g.b + delta)) - g.v));
    rep.add(CheckResult::upper("glue/continuity", joins, c.tol_override.value_or(1e-6), 2,
                               "(" + fmt_double(g.a) + ")",
                               "one-sided limits at the joints"));
    ExponentFit fit = critical_exponents(g);
    ordered_json arts{{"pieces", ordered_json::array({n1, n2})},
                      {"flat", flat_json(g)},
                      {"fit", fit_json(fit)}};
    return finish(c, "cherry-glue", rep, std::move(arts), csv_of(g, 512), 512);
}

RunResult cmd_cherry_conjugate(const Ctx& c) {
    if (c.scene.circlediffeos.empty())
        throw DomainError("cherry-conjugate needs a [circlediffeo] section");
    MapSource src = resolve_map(c);
    RotationNumberEstimate rho_f = rotation_number(src.map, c.iters);
    VerificationReport rep;
    rep.title = "cherry-conjugate";
    ordered_json arts = ordered_json::object();
    arts["source"] = src.label;
    arts["rho_source"] = rho_f.value;
    std::string csv;
    for (const auto& [dn, phi] : c.scene.circlediffeos) {
        CircleMapWithFlat h = conjugate_map(phi, src.map);
        RotationNumberEstimate rho_h = rotation_number(h, c.iters);
        double res = circle_dist(rho_f.value, rho_h.value);
        rep.add(CheckResult::upper(dn + "/rho-invariant", res, 2.0 / c.iters + 1e-6,
                                   static_cast<int>(c.iters)));
        arts[dn] = ordered_json{{"flat", flat_json(h)}, {"rho_conjugate", rho_h.value}};
        if (csv.empty()) csv = csv_of(h, 512);
    }
    return finish(c, "cherry-conjugate", rep, std::move(arts), std::move(csv),
                  static_cast<int>(c.iters));
}

RunResult cmd_cherry_equivariance(const Ctx& c) {
    const auto& [name, X] = require_torusfield(c);
    if (c.scene.circlediffeos.empty())
        throw DomainError("cherry-equivariance needs a [circlediffeo] section");
    int sup = c.grid > 0 ? c.grid : 256;
    ReturnMapOptions rmo = return_opts(c);
    rmo.grid = std::max(512, sup);
    double tol = c.tol_override.value_or(1e-4);
    VerificationReport rep;
    rep.title = "cherry-equivariance";
    for (const auto& [dn, phi] : c.scene.circlediffeos)
        rep.merge(verify_equivariance(phi, X, sup, rmo, tol), dn + "/");
    ordered_json arts{{"field", name}, {"sup_grid", sup}, {"return_grid", rmo.grid}};
    return finish(c, "cherry-equivariance", rep, std::move(arts), "", sup);
}

} // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> k{
        "verify-structure", "hess",           "lift-tangent",     "lift-cotangent",
        "verify-theorem1",  "para-kahler",    "pushforward",      "cherry-validate",
        "cherry-return-map", "cherry-rho",    "cherry-exponents", "cherry-glue",
        "cherry-conjugate", "cherry-equivariance"};
    return k;
}

RunResult run_command(const std::string& command, const Scene& scene, const RunFlags& flags) {
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), command) == names.end()) {
        ordered_json j{{"schema", 1}, {"command", command}, {"scene", scene.origin},
                       {"error", "unknown command '" + command + "'"}, {"pass", false}};
        return RunResult{2, std::move(j), ""};
    }
    try {
        Ctx c = make_ctx(scene, flags);
        if (command == "verify-structure") return cmd_verify_structure(c);
        if (command == "hess") return cmd_hess(c);
        if (command == "lift-tangent") return cmd_lift_tangent(c);
        if (command == "lift-cotangent") return cmd_lift_cotangent(c);
        if (command == "verify-theorem1") return cmd_verify_theorem1(c);
        if (command == "para-kahler") return cmd_para_kahler(c);
        if (command == "pushforward") return cmd_pushforward(c);
        if (command == "cherry-validate") return cmd_cherry_validate(c);
        if (command == "cherry-return-map") return cmd_cherry_return_map(c);
        if (command == "cherry-rho") return cmd_cherry_rho(c);
        if (command == "cherry-exponents") return cmd_cherry_exponents(c);
        if (command == "cherry-glue") return cmd_cherry_glue(c);
        if (command == "cherry-conjugate") return cmd_cherry_conjugate(c);
        return cmd_cherry_equivariance(c);
    } catch (const Error& e) {
        ordered_json j{{"schema", 1}, {"command", command}, {"scene", scene.origin},
                       {"error", e.what()}, {"pass", false}};
        return RunResult{1, std::move(j), ""};
    }
}

std::string csv_path_for(const std::string& out_path) {
    if (out_path.size() > 5 && out_path.substr(out_path.size() - 5) == ".json")
        return out_path.substr(0, out_path.size() - 5) + ".csv";
    return out_path + ".csv";
}

void write_outputs(const RunResult& r, const std::string& out_path) {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw Error("cannot write report to '" + out_path + "'");
    f << r.report.dump(2) << "\n";
    if (!r.csv.empty()) {
        const std::string cp = csv_path_for(out_path);
        std::ofstream cf(cp, std::ios::binary);
        if (!cf) throw Error("cannot write table to '" + cp + "'");
        cf << r.csv;
    }
}

} // namespace bilag
