// nclab command-line driver.
//
// Exit codes: 0 success, 1 acceptance criterion failure, 2 configuration
// error, 3 solver or mesh failure.

#include "nclab/acceptance.hpp"
#include "nclab/closed_forms.hpp"
#include "nclab/conductivity.hpp"
#include "nclab/config.hpp"
#include "nclab/experiments.hpp"
#include "nclab/mesh.hpp"
#include "nclab/report.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

namespace fs = std::filesystem;
using namespace nclab;

namespace {

enum Exit { kOk = 0, kCriterion = 1, kConfig = 2, kSolver = 3 };

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

fs::path output_dir(const ExperimentConfig& cfg, const std::string& override_dir) {
    fs::path d = override_dir.empty() ? fs::path(cfg.output.directory) : fs::path(override_dir);
    std::error_code ec;
    fs::create_directories(d, ec);
    if (ec) fail(ErrorKind::Config, "cannot create output directory " + d.string() + ": " + ec.message());
    return d;
}

void write_manifest(const fs::path& dir, const std::string& command, const ExperimentConfig& cfg,
                    const Json& timings, const std::vector<std::string>& outputs) {
    write_text(dir / "manifest.json", manifest(command, cfg, timings, outputs).dump(2) + "\n");
}

void write_field(const fs::path& p, const Vector& f) {
    std::ofstream o(p);
    if (!o) fail(ErrorKind::Config, "cannot write " + p.string());
    for (Eigen::Index i = 0; i < f.size(); ++i) o << i << ' ' << fmt17(f[i]) << '\n';
}

// ---------------------------------------------------------------------------

struct ConstantsArgs {
    int n = 2;
    double m = 2.0;
    double lambda = 1.0;
    std::vector<double> curvatures;
    bool json = false;
};

int cmd_constants(const ConstantsArgs& a) {
    NeckProfile p = a.curvatures.empty() ? NeckProfile::power_law(a.m, a.lambda)
                                         : NeckProfile::quadratic(a.curvatures);
    require_admissible(a.n, p.order());
    InclusionPair g(a.n, p, 1e-3, 0.5, 16.0);
    ConstantsReport r = constants_report(g);
    Json j{{"n", r.n},
           {"m", r.m},
           {"lambda", r.lambda},
           {"kappa", r.kappa ? Json(*r.kappa) : Json(nullptr)},
           {"L_analytic", r.L.analytic},
           {"L_quadrature", r.L.quadrature},
           {"omega", r.omega},
           {"oracle_analytic", r.oracle_analytic},
           {"oracle_numeric", r.oracle_numeric},
           {"printed", r.printed},
           {"printed_over_oracle", r.printed_over_oracle()},
           {"L_lambda_inverse", r.L_lambda_inverse}};
    if (a.json) {
        std::cout << j.dump(2) << "\n";
        return kOk;
    }
    std::cout.precision(12);
    std::cout << "n = " << r.n << ", m = " << r.m << ", lambda = " << r.lambda << "\n";
    if (r.kappa) std::cout << "kappa_n              " << *r.kappa << "\n";
    std::cout << "L analytic           " << r.L.analytic << "\n"
              << "L quadrature         " << r.L.quadrature << "\n"
              << "sphere measure       " << r.omega << "\n"
              << "oracle (analytic)    " << r.oracle_analytic << "\n"
              << "oracle (quadrature)  " << r.oracle_numeric << "\n"
              << "closed-form stated   " << r.printed << "\n"
              << "printed / oracle     " << r.printed_over_oracle() << "\n";
    if (r.L_lambda_inverse > 0.0) std::cout << "L lambda^-(n-1)/m    " << r.L_lambda_inverse << "\n";
    return kOk;
}

struct RunArgs {
    std::string config = "default";
    std::string out;
    double epsilon = 1e-3;
    double cusp = 0.0;
    bool dump_fields = false;
    int criterion = 0;
    std::string csv, summary;
};

int cmd_mesh(const RunArgs& a) {
    auto t0 = Clock::now();
    ExperimentConfig cfg = load_config(a.config);
    fs::path dir = output_dir(cfg, a.out);
    MeshGenerator gen(cfg.pair(a.epsilon), cfg.mesh);
    Mesh m = a.cusp > 0.0 ? gen.generate_cusp(a.cusp) : gen.generate(a.epsilon);
    MeshAudit au = audit(m);
    fs::path file = dir / "mesh.txt";
    {
        std::ofstream o(file);
        if (!o) fail(ErrorKind::Config, "cannot write " + file.string());
        write_mesh(o, m);
    }
    std::cout << "vertices " << m.num_vertices() << ", triangles " << m.num_triangles() << ", boundary edges "
              << m.boundary.size() << "\n"
              << "neck triangles " << au.neck_triangles << ", far min angle " << au.far_min_angle_deg
              << " deg, neck max aspect " << au.neck_max_aspect << "\n"
              << "wrote " << file.string() << "\n";
    write_manifest(dir, "mesh", cfg, Json{{"total", since(t0)}}, {"mesh.txt"});
    bool ok = au.ok(a.cusp > 0.0 ? 2 : 3);
    for (const auto& p : au.problems) std::cerr << "audit: " << p << "\n";
    return ok ? kOk : kSolver;
}

int cmd_solve(const RunArgs& a) {
    auto t0 = Clock::now();
    ExperimentConfig cfg = load_config(a.config);
    require(a.epsilon > 0.0, "epsilon must be positive", ErrorKind::Config);
    fs::path dir = output_dir(cfg, a.out);
    InclusionPair g = cfg.pair(a.epsilon);
    MeshGenerator gen(g, cfg.mesh);
    auto t1 = Clock::now();
    Mesh m = gen.generate(a.epsilon);
    double t_mesh = since(t1);
    t1 = Clock::now();
    ConductivityProblem prob(m, g);
    SolveBundle b = prob.solve(cfg.phi());
    double t_solve = since(t1);
    const FluxSystem& s = b.system;
    Json j{{"epsilon", a.epsilon},
           {"a11", s.a11},
           {"a12", s.a12},
           {"a21", s.a21},
           {"a22", s.a22},
           {"b1", s.b1},
           {"b2", s.b2},
           {"C1", b.constants.C1},
           {"C2", b.constants.C2},
           {"B_eps", b.B_eps},
           {"energy_v1", b.energy_v1},
           {"max_grad_u_neck", max_gradient_neck(m, b.u).value},
           {"max_grad_vb_neck", max_gradient_neck(m, b.vb).value},
           {"max_grad_w_neck", max_gradient_neck(m, b.w).value}};
    std::string text = j.dump(2) + "\n";
    std::cout << text;
    std::vector<std::string> outputs{"solve.json"};
    write_text(dir / "solve.json", text);
    if (a.dump_fields) {
        std::ofstream o(dir / "mesh.txt");
        write_mesh(o, m);
        outputs.push_back("mesh.txt");
        const std::pair<const char*, const Vector*> fields[] = {{"v1", &b.fields.v1}, {"v2", &b.fields.v2},
                                                                {"v0", &b.fields.v0}, {"u", &b.u},
                                                                {"vb", &b.vb},        {"w", &b.w}};
        for (auto [name, f] : fields) {
            std::string file = std::string("field_") + name + ".txt";
            write_field(dir / file, *f);
            outputs.push_back(file);
        }
    }
    write_manifest(dir, "solve", cfg, Json{{"mesh", t_mesh}, {"solve", t_solve}, {"total", since(t0)}}, outputs);
    return kOk;
}

void write_sweep_outputs(const fs::path& dir, const std::vector<SweepRecord>& recs, const Json& summary, bool svg,
                         std::vector<std::string>& outputs) {
    {
        std::ofstream o(dir / "sweep.csv", std::ios::binary);
        if (!o) fail(ErrorKind::Config, "cannot write sweep.csv");
        write_sweep_csv(o, recs);
    }
    outputs.push_back("sweep.csv");
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    outputs.push_back("summary.json");
    if (svg) {
        write_text(dir / "gradients.svg", svg_gradients(recs));
        write_text(dir / "energy.svg", svg_energy(recs));
        outputs.push_back("gradients.svg");
        outputs.push_back("energy.svg");
    }
}

void print_records(const std::vector<SweepRecord>& recs) {
    std::printf("%-12s %-14s %-14s %-14s %-14s %s\n", "epsilon", "energy_v1", "B_eps", "max|grad u|",
                "max|grad v1|", "status");
    for (const auto& r : recs)
        std::printf("%-12.4g %-14.8g %-14.8g %-14.8g %-14.8g %s\n", r.epsilon, r.energy_v1, r.B_eps, r.max_grad_u,
                    r.max_grad_v1, r.ok ? "ok" : r.error.c_str());
}

void print_summary(const Json& s) {
    if (s.contains("fits"))
        for (const auto& [name, f] : s["fits"].items())
            std::printf("fit %-18s slope %+.6f +- %.2e  intercept %+.6f\n", name.c_str(), f["slope"].get<double>(),
                        f["slope_stderr"].get<double>(), f["intercept"].get<double>());
    if (s.contains("energy_constants")) {
        const auto& e = s["energy_constants"];
        std::printf("A_fit %.8g  oracle %.8g  printed %.8g  A/oracle %.6f  A/printed %.6f  M_fit %.6g\n",
                    e["A_fit"].get<double>(), e["oracle"].get<double>(), e["printed"].get<double>(),
                    e["A_over_oracle"].get<double>(), e["A_over_printed"].get<double>(), e["M_fit"].get<double>());
    }
    if (s.contains("B0"))
        std::printf("B0 (%s) %.8g +- %.2e\n", s["B0"]["method"].get<std::string>().c_str(),
                    s["B0"]["value"].get<double>(), s["B0"]["uncertainty"].get<double>());
    if (s.contains("checks"))
        for (const auto& [name, v] : s["checks"].items()) std::printf("check %-16s %s\n", name.c_str(), v ? "ok" : "off");
}

int cmd_sweep(const RunArgs& a) {
    auto t0 = Clock::now();
    ExperimentConfig cfg = load_config(a.config);
    fs::path dir = output_dir(cfg, a.out);
    SweepSpec spec = cfg.sweep_spec();
    auto t1 = Clock::now();
    std::vector<SweepRecord> recs = run_sweep(spec);
    double t_sweep = since(t1);
    Json per = Json::array();
    for (const auto& r : recs) per.push_back({{"epsilon", r.epsilon}, {"seconds", r.wall_seconds}});
    SweepSummary sum = summarize(recs, spec.family);
    Json js = summary_json(sum, cfg);
    std::vector<std::string> outputs;
    write_sweep_outputs(dir, recs, js, cfg.output.svg, outputs);
    print_records(recs);
    print_summary(js);
    write_manifest(dir, "sweep", cfg, Json{{"sweep", t_sweep}, {"per_epsilon", per}, {"total", since(t0)}}, outputs);
    return kOk;
}

int cmd_verify(const RunArgs& a) {
    auto t0 = Clock::now();
    ExperimentConfig cfg = load_config(a.config);
    fs::path dir = output_dir(cfg, a.out);
    AcceptanceSuite suite(cfg);
    AcceptanceReport rep = suite.run(&std::cout, a.criterion);
    Json j = Json::array();
    Json timings = Json::object();
    for (const auto& c : rep.criteria) {
        j.push_back({{"criterion", c.id}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
        timings["criterion_" + std::to_string(c.id)] = c.seconds;
    }
    timings["total"] = since(t0);
    write_text(dir / "acceptance.json", j.dump(2) + "\n");
    write_manifest(dir, "verify", cfg, timings, {"acceptance.json"});
    std::cout << (rep.all_pass() ? "PASS" : "FAIL") << " acceptance suite\n";
    return rep.all_pass() ? kOk : kCriterion;
}

int cmd_report(const RunArgs& a) {
    require(!a.csv.empty(), "report needs --csv", ErrorKind::Config);
    std::ifstream in(a.csv);
    if (!in) fail(ErrorKind::Config, "cannot open " + a.csv);
    std::vector<SweepRecord> recs = read_sweep_csv(in);
    print_records(recs);
    if (!a.summary.empty()) {
        std::ifstream s(a.summary);
        if (!s) fail(ErrorKind::Config, "cannot open " + a.summary);
        Json js;
        try {
            js = Json::parse(s);
        } catch (const std::exception& e) {
            fail(ErrorKind::Config, std::string("malformed summary JSON: ") + e.what());
        }
        print_summary(js);
    }
    if (!a.out.empty()) {
        fs::create_directories(a.out);
        write_text(fs::path(a.out) / "gradients.svg", svg_gradients(recs));
        write_text(fs::path(a.out) / "energy.svg", svg_energy(recs));
        std::cout << "wrote " << (fs::path(a.out) / "gradients.svg").string() << ", "
                  << (fs::path(a.out) / "energy.svg").string() << "\n";
    }
    return kOk;
}

int exit_code(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::Config:
    case ErrorKind::Domain: return kConfig;
    case ErrorKind::Mesh:
    case ErrorKind::Solver: return kSolver;
    }
    return kSolver;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nclab: perfect-conductivity lab for two nearly touching inclusions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    ConstantsArgs ca;
    auto* constants = app.add_subcommand("constants", "closed-form constants and gap-integral oracle");
    constants->add_option("--n", ca.n, "dimension")->capture_default_str();
    constants->add_option("--m", ca.m, "convexity order")->capture_default_str();
    constants->add_option("--lambda", ca.lambda, "power-law coefficient")->capture_default_str();
    constants->add_option("--curvatures", ca.curvatures, "principal relative curvatures (quadratic profile)");
    constants->add_flag("--json", ca.json, "print JSON");

    RunArgs ra;
    auto common = [&ra](CLI::App* c) {
        c->add_option("--config", ra.config, "config file or 'default'")->capture_default_str();
        c->add_option("--out", ra.out, "output directory (overrides the config)");
    };
    auto* mesh = app.add_subcommand("mesh", "generate and write a mesh");
    common(mesh);
    mesh->add_option("--epsilon", ra.epsilon, "gap")->capture_default_str();
    mesh->add_option("--cusp", ra.cusp, "truncated-cusp mesh with this cut radius");
    auto* solve = app.add_subcommand("solve", "solve one gap");
    common(solve);
    solve->add_option("--epsilon", ra.epsilon, "gap")->capture_default_str();
    solve->add_flag("--dump-fields", ra.dump_fields, "write nodal fields");
    auto* sweep = app.add_subcommand("sweep", "run the configured gap sweep");
    common(sweep);
    auto* verify = app.add_subcommand("verify", "run the acceptance suite");
    common(verify);
    verify->add_option("--criterion", ra.criterion, "run a single criterion (1-9)")->check(CLI::Range(0, 9));
    auto* report = app.add_subcommand("report", "summarize a stored sweep");
    report->add_option("--csv", ra.csv, "sweep CSV")->required();
    report->add_option("--summary", ra.summary, "summary JSON");
    report->add_option("--out", ra.out, "directory for SVG plots");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*constants) return cmd_constants(ca);
        if (*mesh) return cmd_mesh(ra);
        if (*solve) return cmd_solve(ra);
        if (*sweep) return cmd_sweep(ra);
        if (*verify) return cmd_verify(ra);
        if (*report) return cmd_report(ra);
    } catch (const ConfigError& e) {
        std::cerr << "config error:\n" << e.what() << "\n";
        return kConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSolver;
    }
    return kOk;
}
