#pragma once

// Sweep persistence: versioned CSV, JSON summaries, SVG log-log plots and
// run manifests.

#include "nclab/config.hpp"
#include "nclab/experiments.hpp"
#include "nclab/fitting.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace nclab {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kCsvSchema = "nclab-sweep-csv/1";

using Json = nlohmann::ordered_json;

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = {
        "epsilon",  "rho",        "energy_v1",       "a11",           "a12",
        "a21",      "a22",        "b1",              "b2",            "C1",
        "C2",       "B_eps",      "B_eps_direct",    "max_grad_u_neck", "max_grad_v1_neck",
        "max_grad_w_neck", "max_grad_vb_neck", "centerline_residual", "vertices", "triangles",
        "ok",       "error"};
    return cols;
}

/// First line "# nclab-sweep-csv/1", then the column header, then one row per
/// record. Wall time is deliberately absent so reruns are byte-identical.
inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& recs) {
    os << "# " << kCsvSchema << "\n";
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << "\n";
    for (const auto& r : recs) {
        const FluxSystem& s = r.system;
        for (double v : {r.epsilon, r.rho, r.energy_v1, s.a11, s.a12, s.a21, s.a22, s.b1, s.b2, r.C1, r.C2, r.B_eps,
                         r.B_eps_direct, r.max_grad_u, r.max_grad_v1, r.max_grad_w, r.max_grad_vb,
                         r.centerline_residual})
            os << fmt17(v) << ",";
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        os << r.mesh.vertices << "," << r.mesh.triangles << "," << (r.ok ? 1 : 0) << "," << err << "\n";
    }
}

inline std::vector<SweepRecord> read_sweep_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != std::string("# ") + kCsvSchema)
        fail(ErrorKind::Config, "not a sweep CSV (expected schema line '# " + std::string(kCsvSchema) + "')");
    if (!std::getline(is, line)) fail(ErrorKind::Config, "sweep CSV has no header");
    std::vector<std::string> head;
    {
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) head.push_back(c);
    }
    if (head != csv_columns()) fail(ErrorKind::Config, "sweep CSV header does not match schema");

    std::vector<SweepRecord> out;
    int lineno = 2;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) f.push_back(c);
        if (f.size() == head.size() - 1) f.emplace_back();
        if (f.size() != head.size())
            fail(ErrorKind::Config, "sweep CSV line " + std::to_string(lineno) + ": wrong field count");
        std::vector<double> v;
        for (std::size_t i = 0; i < 18; ++i) {
            double x = 0.0;
            auto [p, ec] = std::from_chars(f[i].data(), f[i].data() + f[i].size(), x);
            if (ec != std::errc() || p != f[i].data() + f[i].size())
                fail(ErrorKind::Config, "sweep CSV line " + std::to_string(lineno) + ": bad number in " + head[i]);
            v.push_back(x);
        }
        SweepRecord r;
        r.epsilon = v[0];
        r.rho = v[1];
        r.energy_v1 = v[2];
        r.system = {v[3], v[4], v[5], v[6], v[7], v[8]};
        r.C1 = v[9];
        r.C2 = v[10];
        r.B_eps = v[11];
        r.B_eps_direct = v[12];
        r.max_grad_u = v[13];
        r.max_grad_v1 = v[14];
        r.max_grad_w = v[15];
        r.max_grad_vb = v[16];
        r.centerline_residual = v[17];
        r.mesh.vertices = std::stoul(f[18]);
        r.mesh.triangles = std::stoul(f[19]);
        r.ok = f[20] == "1";
        r.error = f[21];
        out.push_back(std::move(r));
    }
    return out;
}

inline Json to_json(const FitResult& f) {
    return Json{{"model", f.model},
                {"slope", f.slope},
                {"intercept", f.intercept},
                {"slope_stderr", f.slope_stderr},
                {"intercept_stderr", f.intercept_stderr},
                {"residual_norm", f.residual_norm},
                {"points", f.points},
                {"residuals", f.residuals}};
}

// ---------------------------------------------------------------------------
// Summaries

struct SweepSummary {
    std::optional<FitResult> grad_u, grad_v1, grad_w;
    std::optional<EnergyFit> energy;
    std::optional<LimitBundle> limit;
    double expected_u_slope = 0.0;
    bool monotone_energy = true;
};

inline SweepSummary summarize(const std::vector<SweepRecord>& recs, const InclusionPair& family) {
    SweepSummary s;
    const int n = family.dimension();
    const double m = family.profile().order();
    s.expected_u_slope = rate_exponent(n, m) - 1.0;
    std::size_t ok = std::count_if(recs.begin(), recs.end(), [](const SweepRecord& r) { return r.ok; });
    if (ok >= 4) {
        s.grad_u = fit_rate(recs, [](const SweepRecord& r) { return r.max_grad_u; });
        s.grad_v1 = fit_rate(recs, [](const SweepRecord& r) { return r.max_grad_v1; });
        s.grad_w = fit_rate(recs, [](const SweepRecord& r) { return r.max_grad_w; });
        s.energy = fit_energy_constants(recs, family);
    }
    if (ok >= 3) {
        std::vector<double> e, b;
        for (const auto& r : recs)
            if (r.ok) {
                e.push_back(r.epsilon);
                b.push_back(r.B_eps);
            }
        s.limit = estimate_B0(e, b, n, m);
    }
    double prev = -1.0;
    for (const auto& r : recs)
        if (r.ok) {
            if (r.energy_v1 <= prev) s.monotone_energy = false;
            prev = r.energy_v1;
        }
    return s;
}

inline Json summary_json(const SweepSummary& s, const ExperimentConfig& cfg) {
    Json j;
    j["schema"] = "nclab-sweep-summary/1";
    j["expected_grad_u_slope"] = s.expected_u_slope;
    j["tolerance"] = {{"rate", cfg.tolerance.rate},
                      {"energy_constant", cfg.tolerance.energy_constant},
                      {"m_stability", cfg.tolerance.m_stability}};
    Json fits = Json::object();
    if (s.grad_u) fits["max_grad_u_neck"] = to_json(*s.grad_u);
    if (s.grad_v1) fits["max_grad_v1_neck"] = to_json(*s.grad_v1);
    if (s.grad_w) fits["max_grad_w_neck"] = to_json(*s.grad_w);
    if (s.energy) fits["energy_v1"] = to_json(s.energy->fit);
    if (s.limit && s.limit->fit) fits["B_eps"] = to_json(*s.limit->fit);
    j["fits"] = fits;
    if (s.energy) {
        const EnergyFit& e = *s.energy;
        j["energy_constants"] = {{"A_fit", e.A},
                                 {"M_fit", e.M},
                                 {"M_fit_lower_half", e.M_half},
                                 {"oracle", e.oracle},
                                 {"oracle_numeric", e.oracle_numeric},
                                 {"printed", e.printed},
                                 {"A_over_oracle", e.A_over_oracle()},
                                 {"A_over_printed", e.A_over_printed()},
                                 {"M_shift", e.M_shift()}};
    }
    if (s.limit) j["B0"] = {{"method", to_string(s.limit->method)}, {"value", s.limit->B0},
                            {"uncertainty", s.limit->uncertainty}};
    j["energy_monotone"] = bool(s.monotone_energy);
    if (s.grad_u) {
        j["checks"] = {
            {"grad_u_slope", std::abs(s.grad_u->slope - s.expected_u_slope) <= cfg.tolerance.rate},
            {"grad_v1_slope", std::abs(s.grad_v1->slope + 1.0) <= cfg.tolerance.rate},
        };
        if (s.energy) {
            j["checks"]["energy_constant"] = std::abs(s.energy->A_over_oracle() - 1.0) <= cfg.tolerance.energy_constant;
            j["checks"]["M_stability"] = s.energy->M_shift() <= cfg.tolerance.m_stability;
        }
    }
    return j;
}

// ---------------------------------------------------------------------------
// SVG

struct Series {
    std::string name;
    std::vector<double> x, y;
};

/// Log-log scatter-and-line plot of positive data.
inline std::string svg_loglog(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                              const std::vector<Series>& series) {
    const double W = 640, H = 440, ml = 80, mr = 150, mt = 40, mb = 60;
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.x[i] > 0 && s.y[i] > 0)) continue;
            x0 = std::min(x0, std::log10(s.x[i]));
            x1 = std::max(x1, std::log10(s.x[i]));
            y0 = std::min(y0, std::log10(s.y[i]));
            y1 = std::max(y1, std::log10(s.y[i]));
        }
    if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    x0 = std::floor(x0), x1 = std::ceil(x1), y0 = std::floor(y0), y1 = std::ceil(y1);
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    auto X = [&](double v) { return ml + (std::log10(v) - x0) / (x1 - x0) * (W - ml - mr); };
    auto Y = [&](double v) { return H - mb - (std::log10(v) - y0) / (y1 - y0) * (H - mt - mb); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

    std::ostringstream o;
    o << std::fixed << std::setprecision(2);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
    for (double e = x0; e <= x1; e += 1.0) {
        double px = ml + (e - x0) / (x1 - x0) * (W - ml - mr);
        o << "<line x1=\"" << px << "\" y1=\"" << mt << "\" x2=\"" << px << "\" y2=\"" << H - mb
          << "\" stroke=\"#ddd\"/>\n";
        o << "<text x=\"" << px << "\" y=\"" << H - mb + 18 << "\" text-anchor=\"middle\" font-size=\"11\">1e"
          << int(e) << "</text>\n";
    }
    for (double e = y0; e <= y1; e += 1.0) {
        double py = H - mb - (e - y0) / (y1 - y0) * (H - mt - mb);
        o << "<line x1=\"" << ml << "\" y1=\"" << py << "\" x2=\"" << W - mr << "\" y2=\"" << py
          << "\" stroke=\"#ddd\"/>\n";
        o << "<text x=\"" << ml - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\" font-size=\"11\">1e" << int(e)
          << "</text>\n";
    }
    o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    o << "<text x=\"" << ml + (W - ml - mr) / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\" font-size=\"13\">"
      << xlabel << "</text>\n";
    o << "<text x=\"18\" y=\"" << mt + (H - mt - mb) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << mt + (H - mt - mb) / 2 << ")\">" << ylabel << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const Series& s = series[k];
        const char* c = colors[k % 5];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.x[i] > 0 && s.y[i] > 0)) continue;
            std::ostringstream p;
            p << std::fixed << std::setprecision(2) << X(s.x[i]) << "," << Y(s.y[i]) << " ";
            pts += p.str();
            o << "<circle cx=\"" << X(s.x[i]) << "\" cy=\"" << Y(s.y[i]) << "\" r=\"3\" fill=\"" << c << "\"/>\n";
        }
        o << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << c << "\"/>\n";
        o << "<text x=\"" << W - mr + 10 << "\" y=\"" << mt + 16 * (k + 1) << "\" font-size=\"12\" fill=\"" << c
          << "\">" << s.name << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

inline std::string svg_gradients(const std::vector<SweepRecord>& recs) {
    Series u{"max |grad u|", {}, {}}, v1{"max |grad v1|", {}, {}}, w{"max |grad w|", {}, {}};
    for (const auto& r : recs)
        if (r.ok) {
            for (Series* s : {&u, &v1, &w}) s->x.push_back(r.epsilon);
            u.y.push_back(r.max_grad_u);
            v1.y.push_back(r.max_grad_v1);
            w.y.push_back(r.max_grad_w);
        }
    return svg_loglog("neck gradients", "epsilon", "max gradient", {u, v1, w});
}

inline std::string svg_energy(const std::vector<SweepRecord>& recs) {
    Series e{"energy(v1)", {}, {}};
    for (const auto& r : recs)
        if (r.ok) {
            e.x.push_back(1.0 / r.rho);
            e.y.push_back(r.energy_v1);
        }
    return svg_loglog("capacity energy", "1 / rho", "energy(v1)", {e});
}

// ---------------------------------------------------------------------------
// Manifest

inline std::string hex64(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline Json manifest(const std::string& command, const ExperimentConfig& cfg, const Json& timings,
                     const std::vector<std::string>& outputs) {
    Json j;
    j["command"] = command;
    j["config_hash"] = "fnv1a64:" + hex64(config_hash(cfg));
    j["versions"] = {{"nclab", kVersion},
                     {"csv_schema", kCsvSchema},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"compiler", __VERSION__},
                     {"cxx", long(__cplusplus)}};
    j["randomness"] = "none";
    j["timings_seconds"] = timings;
    j["outputs"] = outputs;
    j["config"] = emit_config(cfg);
    return j;
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream f(p, std::ios::binary);
    if (!f) fail(ErrorKind::Config, "cannot write " + p.string());
    f << s;
}

} // namespace nclab
