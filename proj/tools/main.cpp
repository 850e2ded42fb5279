// Command-line driver: reproducible experiments with CSV/JSON/SVG outputs.
//
// Commands: equilibria, scan, return-map, orbit, kepler-compare, convexity,
// golden.  Exit code 0 on pass, 2 on a failed check, 1 on error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cr3bp/convexity.hpp"
#include "cr3bp/equilibria.hpp"
#include "cr3bp/flow.hpp"
#include "cr3bp/kepler_oracle.hpp"
#include "cr3bp/sections.hpp"

using namespace cr3bp;
using nlohmann::json;

namespace {

struct RunConfig {
    double mu = 0.5;
    std::string c = "auto-below-L1";
    std::string chart = "moon";
    double delta = 0.4;
    double epsilon = 0.15;
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    double max_step = 1e30;
    double max_time = 200.0;
    double t_final = 10.0;
    int samples = 1000;
    std::uint64_t seed = 1;
    std::string output = "out";
    bool emit_plot = false;
};

Chart parse_chart(const std::string& s) {
    if (s == "moon") return Chart::Moon;
    if (s == "earth") return Chart::Earth;
    if (s == "single") return Chart::SingleCenter;
    throw ConfigError("unknown chart: " + s);
}

// Energy shorthands resolve against the critical values:
// auto-below-L1 -> H(L1) - 0.2, auto-above-L1 -> H(L1) + min(0.05, gap/4).
double resolve_energy(const std::string& c, double mu) {
    if (c == "auto-below-L1") {
        return lagrange_points(mu).values[0] - 0.2;
    }
    if (c == "auto-above-L1") {
        const LagrangeSet ls = lagrange_points(mu);
        return ls.values[0] + std::min(0.05, (ls.values[1] - ls.values[0]) / 4.0);
    }
    try {
        std::size_t pos = 0;
        const double v = std::stod(c, &pos);
        if (pos != c.size()) throw std::invalid_argument(c);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse energy: " + c);
    }
}

IntegratorConfig integrator_of(const RunConfig& rc) {
    IntegratorConfig cfg;
    cfg.rel_tol = rc.rel_tol;
    cfg.abs_tol = rc.abs_tol;
    cfg.max_step = rc.max_step;
    cfg.max_time = rc.max_time;
    return cfg;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json state_json(const RegState& r) {
    return json{{"xi", r.xi}, {"eta", r.eta}};
}

// Minimal scatter plot: points in the (xi3, eta3) plane colored by value
// (blue = min, red = max).
void write_scatter_svg(const std::string& path, const std::vector<RegState>& states,
                       const std::vector<double>& value) {
    double lo = 1e300, hi = -1e300, ext = 1e-9;
    for (std::size_t i = 0; i < states.size(); ++i) {
        lo = std::min(lo, value[i]);
        hi = std::max(hi, value[i]);
        ext = std::max({ext, std::abs(states[i].xi[3]), std::abs(states[i].eta[3])});
    }
    const double span = std::max(hi - lo, 1e-300);
    const int W = 720;
    std::ofstream out(path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << W
        << "' viewBox='0 0 " << W << " " << W << "'>\n"
        << "<rect width='" << W << "' height='" << W << "' fill='white'/>\n";
    auto px = [&](double v) { return 0.5 * W + 0.47 * W * v / ext; };
    for (std::size_t i = 0; i < states.size(); ++i) {
        const double t = (value[i] - lo) / span;
        const int r = static_cast<int>(255 * t), b = static_cast<int>(255 * (1.0 - t));
        out << "<circle cx='" << px(states[i].xi[3]) << "' cy='" << px(-states[i].eta[3])
            << "' r='1.6' fill='rgb(" << r << ",40," << b << ")'/>\n";
    }
    out << "<text x='10' y='20' font-size='14'>xi3 (x) vs eta3 (y); min="
        << fmt(lo) << " max=" << fmt(hi) << "</text>\n</svg>\n";
}

int cmd_equilibria(const RunConfig& rc) {
    const LagrangeSet ls = lagrange_points(rc.mu);
    std::ofstream csv(rc.output + "_lagrange.csv");
    csv << "point,x,y,z,value\n";
    for (int i = 0; i < 5; ++i) {
        csv << "L" << (i + 1) << "," << fmt(ls.points[i][0]) << "," << fmt(ls.points[i][1])
            << "," << fmt(ls.points[i][2]) << "," << fmt(ls.values[i]) << "\n";
        std::printf("L%d  (% .12f, % .12f)  H = % .12f\n", i + 1, ls.points[i][0],
                    ls.points[i][1], ls.values[i]);
    }
    if (ls.values[0] > -1.5) {
        std::printf("FAIL: H(L1) = %.12f > -3/2\n", ls.values[0]);
        return 2;
    }
    std::printf("H(L1) = %.12f <= -3/2\n", ls.values[0]);
    return 0;
}

int cmd_scan(const RunConfig& rc) {
    const double c = resolve_energy(rc.c, rc.mu);
    const LagrangeSet ls = lagrange_points(rc.mu);
    json summary;
    ScanReport rep;
    if (c < ls.values[0]) {
        const SystemSpec spec = SystemSpec::three_body(rc.mu, c, parse_chart(rc.chart));
        const CutoffSpec cut =
            auto_amplitude(spec, rc.delta, rc.epsilon, std::min(rc.samples, 2000), rc.seed + 1);
        rep = transversality_scan(spec, cut, rc.samples, rc.seed);
        summary["mode"] = "single-chart";
        summary["amplitude"] = cut.amplitude;

        // sample export for the CSV / plot
        Rng rng(rc.seed);
        SigmaSampler sampler(spec);
        std::vector<RegState> states;
        std::vector<double> pairing, normalized;
        const SectionMap section = SectionMap::interpolated(cut);
        while (static_cast<int>(states.size()) < std::min(rc.samples, 20000)) {
            RegState s;
            if (!sampler.draw(rng, s)) continue;
            const double b2 = sqr(s.xi[3]) + sqr(s.eta[3]);
            states.push_back(s);
            pairing.push_back(section.pairing(s, spec));
            normalized.push_back(pairing.back() / std::max(b2, 1e-300));
        }
        write_scan_csv(rc.output + "_scan.csv", states, pairing, normalized);
        if (rc.emit_plot) write_scatter_svg(rc.output + "_scan.svg", states, normalized);
    } else if (c < ls.values[1]) {
        const SystemSpec spec = SystemSpec::three_body(rc.mu, c, Chart::Moon);
        const CutoffSpec cut{0.15, 0.06, 1.0};
        const ConnectedSumReport crep = connected_sum_scan(spec, cut, rc.samples, rc.seed);
        rep = crep.scan;
        summary["mode"] = "connected-sum";
        summary["max_overlap_angle_error"] = crep.max_overlap_angle_error;
        summary["n_moon"] = crep.n_moon;
        summary["n_earth"] = crep.n_earth;
        summary["n_physical"] = crep.n_physical;
    } else {
        throw ConfigError("scan: energy must lie below H(L2)");
    }
    summary["c"] = c;
    summary["mu"] = rc.mu;
    summary["min_normalized_pairing"] = rep.min_normalized;
    summary["pass"] = rep.pass;
    std::ofstream(rc.output + "_summary.json") << summary.dump(2) << "\n";
    write_scan_json(rc.output + "_report.json", rep);
    std::printf("scan: n=%d  min normalized pairing = %.6e  %s\n", rep.n_evaluated,
                rep.min_normalized, rep.pass ? "PASS" : "FAIL");
    return rep.pass ? 0 : 2;
}

int cmd_return_map(const RunConfig& rc) {
    const double c = resolve_energy(rc.c, rc.mu);
    const SystemSpec spec = SystemSpec::three_body(rc.mu, c, parse_chart(rc.chart));
    const CutoffSpec cut = auto_amplitude(spec, rc.delta, rc.epsilon, 2000, rc.seed + 1);
    const SectionMap section = SectionMap::interpolated(cut);
    const IntegratorConfig cfg = integrator_of(rc);

    Rng rng(rc.seed);
    SigmaSampler sampler(spec);
    std::ofstream out(rc.output + "_returns.jsonl");
    std::vector<RegState> starts, ends;
    int done = 0;
    double max_drift = 0.0;
    while (done < rc.samples) {
        RegState s;
        if (!sampler.draw(rng, s)) continue;
        if (std::abs(section.value(s)) < 1e-3) continue;
        ReturnRecord rec;
        try {
            rec = return_map(s, spec, section, cfg);
        } catch (const NoReturn&) {
            continue;
        }
        json j;
        j["start"] = state_json(rec.start);
        j["end"] = state_json(rec.end);
        j["return_time"] = rec.return_time;
        j["physical_return_time"] = rec.physical_return_time;
        j["angle_swept"] = rec.angle_swept;
        j["q_drift"] = rec.q_drift;
        out << j.dump() << "\n";
        starts.push_back(rec.start);
        ends.push_back(rec.end);
        max_drift = std::max(max_drift, rec.q_drift);
        ++done;
    }
    if (rc.emit_plot) {
        // displacement field in the (xi1, xi2) plane
        std::ofstream svg(rc.output + "_displacement.svg");
        const int W = 720;
        svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << W
            << "'>\n<rect width='" << W << "' height='" << W << "' fill='white'/>\n";
        auto px = [&](double v) { return 0.5 * W + 0.45 * W * v; };
        for (std::size_t i = 0; i < starts.size(); ++i) {
            svg << "<line x1='" << px(starts[i].xi[1]) << "' y1='" << px(-starts[i].xi[2])
                << "' x2='" << px(ends[i].xi[1]) << "' y2='" << px(-ends[i].xi[2])
                << "' stroke='steelblue' stroke-width='0.7'/>\n"
                << "<circle cx='" << px(starts[i].xi[1]) << "' cy='" << px(-starts[i].xi[2])
                << "' r='1.4' fill='black'/>\n";
        }
        svg << "</svg>\n";
    }
    std::printf("return-map: %d returns, max |dQ| = %.3e\n", done, max_drift);
    return max_drift < 1e-8 ? 0 : 2;
}

int cmd_orbit(const RunConfig& rc) {
    const double c = resolve_energy(rc.c, rc.mu);
    const SystemSpec spec = SystemSpec::three_body(rc.mu, c, parse_chart(rc.chart));
    const CutoffSpec cut{rc.delta, rc.epsilon, 1.0};
    Rng rng(rc.seed);
    SigmaSampler sampler(spec);
    RegState s;
    while (!sampler.draw(rng, s)) {}
    const Trajectory traj = integrate(s, rc.t_final, spec, integrator_of(rc));
    std::ofstream out(rc.output + "_orbit.jsonl");
    for (const auto& sample : traj.samples) {
        const Complex th = theta_interpolated_value(sample.state, cut);
        json j;
        j["t"] = sample.t;
        j["t_phys"] = sample.t_phys;
        j["state"] = state_json(sample.state);
        j["Q"] = Q_reg(sample.state, spec);
        j["theta"] = {th.real(), th.imag()};
        out << j.dump() << "\n";
    }
    const double drift =
        std::abs(Q_reg(traj.end().state, spec) - Q_reg(s, spec));
    std::printf("orbit: %zu steps to t = %.3f, |dQ| = %.3e\n", traj.samples.size() - 1,
                traj.end().t, drift);
    return 0;
}

int cmd_kepler_compare(const RunConfig& rc) {
    const double c = resolve_energy(rc.c, rc.mu);
    const SystemSpec spec = SystemSpec::three_body(1.0, c, Chart::Moon);
    const KeplerContext ctx(c);
    const SectionMap page = SectionMap::geodesic();
    const IntegratorConfig cfg = integrator_of(rc);

    Rng rng(rc.seed);
    double worst_state = 0.0, worst_time = 0.0;
    int done = 0;
    while (done < rc.samples) {
        // geodesic-page sample: xi3 = 0, eta3 > 0
        Vec4 xi = rng.gaussian_vec<4>();
        xi[3] = 0.0;
        const double n = norm(xi);
        if (n < 1e-9) continue;
        RegState s;
        s.xi = (1.0 / n) * xi;
        Vec4 e = rng.gaussian_vec<4>();
        e[3] = std::abs(e[3]) + 0.3;
        axpy(-dot(s.xi, e), s.xi, e);
        if (e[3] < 0.1) continue;
        s.eta = e;
        try {
            s = scale_eta_to_level(s, spec);
        } catch (const Error&) {
            continue;
        }
        if (s.eta[3] < 0.15 || (1.0 - s.xi[0]) * norm(s.eta) > 1.0) continue;
        ++done;
        const ReturnRecord rec = return_map(s, spec, page, cfg);
        const RegState expect = analytic_return(s, ctx);
        for (int i = 0; i < 4; ++i) {
            worst_state = std::max(worst_state, std::abs(rec.end.xi[i] - expect.xi[i]));
            worst_state = std::max(worst_state, std::abs(rec.end.eta[i] - expect.eta[i]));
        }
        const double T = kepler_period(c - angular_momentum_reg(s));
        worst_time = std::max(worst_time, std::abs(rec.physical_return_time - T));
    }
    std::printf("kepler-compare: %d samples, max coordinate deviation = %.3e, "
                "max return-time deviation = %.3e\n",
                done, worst_state, worst_time);
    return (worst_state < 1e-6 && worst_time < 1e-8) ? 0 : 2;
}

int cmd_convexity(const RunConfig& rc) {
    const double c = resolve_energy(rc.c, rc.mu);
    const SystemSpec spec = SystemSpec::three_body(rc.mu, c, parse_chart(rc.chart));
    const ConvexityReport rep = convexity_certificate(spec, rc.samples, rc.seed);
    json j;
    j["mu"] = rc.mu;
    j["c"] = c;
    j["n_samples"] = rep.n_samples;
    j["eigen_min"] = rep.eigen_min;
    j["argmin"] = state_json(rep.argmin);
    j["pass"] = rep.pass;
    std::ofstream(rc.output + "_convexity.json") << j.dump(2) << "\n";
    std::printf("convexity: min eigenvalue of S over %d samples = %.6e  %s\n", rep.n_samples,
                rep.eigen_min, rep.pass ? "PASS" : "FAIL");
    return rep.pass ? 0 : 2;
}

int cmd_golden(const RunConfig& rc) {
    std::ofstream csv(rc.output + "_golden.csv");
    csv << "c,r_dir,r_ret,p_dir,p_ret,T_c\n";
    for (double c : {-1.5, -1.6, -1.8, -2.0, -2.2, -2.5, -3.0, -4.0}) {
        const CircularOrbits co = circular_orbits(c);
        csv << fmt(c) << "," << fmt(co.r_dir) << "," << fmt(co.r_ret) << "," << fmt(co.p_dir)
            << "," << fmt(co.p_ret) << "," << fmt(kepler_period(c)) << "\n";
    }
    std::printf("golden: wrote %s_golden.csv\n", rc.output.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regularized spatial CR3BP sections and return maps"};
    app.require_subcommand(1);
    RunConfig rc;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--mu", rc.mu, "mass ratio in (0,1]");
        cmd->add_option("--c", rc.c, "Jacobi energy or auto-below-L1 / auto-above-L1");
        cmd->add_option("--chart", rc.chart, "moon | earth");
        cmd->add_option("--delta", rc.delta, "cutoff outer width");
        cmd->add_option("--epsilon", rc.epsilon, "cutoff inner width");
        cmd->add_option("--rel-tol", rc.rel_tol, "integrator relative tolerance");
        cmd->add_option("--abs-tol", rc.abs_tol, "integrator absolute tolerance");
        cmd->add_option("--max-step", rc.max_step, "integrator max step");
        cmd->add_option("--max-time", rc.max_time, "flow-time budget");
        cmd->add_option("--samples", rc.samples, "sample count");
        cmd->add_option("--seed", rc.seed, "random seed");
        cmd->add_option("--output", rc.output, "output path prefix");
        cmd->add_flag("--emit-plot", rc.emit_plot, "write SVG plots");
        cmd->add_option("--t", rc.t_final, "integration time (orbit)");
    };

    CLI::App* c_eq = app.add_subcommand("equilibria", "Lagrange points and critical values");
    CLI::App* c_scan = app.add_subcommand("scan", "transversality scan on Sigma_c");
    CLI::App* c_rm = app.add_subcommand("return-map", "numerical return maps");
    CLI::App* c_orbit = app.add_subcommand("orbit", "trajectory export");
    CLI::App* c_kc = app.add_subcommand("kepler-compare", "numerics vs the integrable oracle");
    CLI::App* c_cx = app.add_subcommand("convexity", "normal-Hessian certificate");
    CLI::App* c_gold = app.add_subcommand("golden", "golden value table");
    for (CLI::App* cmd : {c_eq, c_scan, c_rm, c_orbit, c_kc, c_cx, c_gold}) add_common(cmd);

    try {
        app.parse(argc, argv);
        if (app.got_subcommand(c_eq)) return cmd_equilibria(rc);
        if (app.got_subcommand(c_scan)) return cmd_scan(rc);
        if (app.got_subcommand(c_rm)) return cmd_return_map(rc);
        if (app.got_subcommand(c_orbit)) return cmd_orbit(rc);
        if (app.got_subcommand(c_kc)) return cmd_kepler_compare(rc);
        if (app.got_subcommand(c_cx)) return cmd_convexity(rc);
        if (app.got_subcommand(c_gold)) return cmd_golden(rc);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
