#pragma once

// Experiment configuration: a sectioned key = value text format.
//
//   # comment
//   [geometry]
//   dimension = 2
//   profile = quadratic        # or power_law
//   ...
//
// Unknown sections or keys, duplicates and malformed values are errors that
// carry their line number. emit_config writes every field, so
// parse_config(emit_config(c)) == c.

#include "nclab/closed_forms.hpp"
#include "nclab/conductivity.hpp"
#include "nclab/error.hpp"
#include "nclab/experiments.hpp"
#include "nclab/geometry.hpp"
#include "nclab/mesh.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace nclab {

struct GeometryConfig {
    int dimension = 2;
    ProfileKind profile = ProfileKind::Quadratic;
    std::vector<double> curvatures{2.0}; ///< quadratic: lambda_j
    double order = 2.0;                  ///< power law: m
    double coefficient = 1.0;            ///< power law: lambda
    double upper_share = 0.5;
    double neck_radius = 0.5;
    double outer_radius = 4.0;
    double outer_shift = 0.0;
    bool operator==(const GeometryConfig&) const = default;

    NeckProfile neck_profile() const {
        return profile == ProfileKind::Quadratic ? NeckProfile::quadratic(curvatures, upper_share)
                                                 : NeckProfile::power_law(order, coefficient, upper_share);
    }
    double convexity_order() const { return profile == ProfileKind::Quadratic ? 2.0 : order; }
};

struct BoundaryConfig {
    PresetKind preset = PresetKind::LinearXn;
    double value = 0.0;
    std::vector<double> cosines, sines;
    bool operator==(const BoundaryConfig&) const = default;
};

struct SweepConfig {
    std::vector<double> epsilons{1e-2, 1e-3, 1e-4, 1e-5};
    bool log_spaced = false; ///< use log_start, log_stop, points instead of epsilons
    double log_start = -2.0;
    double log_stop = -5.0;
    int points = 4;
    int threads = 0;
    bool operator==(const SweepConfig&) const = default;
};

struct ToleranceConfig {
    double rate = 0.05;
    double cauchy_rate = 0.15;
    double energy_constant = 0.02;
    double m_stability = 0.10;
    bool operator==(const ToleranceConfig&) const = default;
};

struct OutputConfig {
    std::string directory = "nclab-out";
    bool svg = true;
    bool operator==(const OutputConfig&) const = default;
};

struct ExperimentConfig {
    GeometryConfig geometry;
    BoundaryConfig boundary;
    SweepConfig sweep;
    MeshParams mesh;
    ToleranceConfig tolerance;
    OutputConfig output;
    bool operator==(const ExperimentConfig&) const = default;

    InclusionPair pair(double eps) const {
        const GeometryConfig& g = geometry;
        return InclusionPair(g.dimension, g.neck_profile(), eps, g.neck_radius, g.outer_radius, g.outer_shift);
    }

    BoundaryData phi() const {
        switch (boundary.preset) {
        case PresetKind::Constant: return BoundaryData::constant(boundary.value);
        case PresetKind::LinearXn: return BoundaryData::linear_xn();
        case PresetKind::LinearX1: return BoundaryData::linear_x1();
        case PresetKind::Fourier: return BoundaryData::fourier(boundary.cosines, boundary.sines);
        }
        return BoundaryData::linear_xn();
    }

    std::vector<double> epsilons() const {
        if (sweep.log_spaced) return log_spaced(sweep.log_start, sweep.log_stop, sweep.points);
        return sweep.epsilons;
    }

    SweepSpec sweep_spec() const {
        return SweepSpec{pair(epsilons().front()), phi(), epsilons(), mesh, {}, sweep.threads};
    }
};

struct ConfigIssue {
    int line = 0;
    std::string key;
    std::string message;
};

class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues)
        : Error(ErrorKind::Config, render(issues)), issues_(std::move(issues)) {}
    const std::vector<ConfigIssue>& issues() const { return issues_; }

private:
    static std::string render(const std::vector<ConfigIssue>& issues) {
        std::string s;
        for (const auto& i : issues) {
            if (!s.empty()) s += '\n';
            s += "line " + std::to_string(i.line) + ": " + (i.key.empty() ? "" : i.key + ": ") + i.message;
        }
        return s;
    }
    std::vector<ConfigIssue> issues_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::string entry(const char* key, const std::string& value) {
    return value.empty() ? std::string(key) + " =\n" : std::string(key) + " = " + value + "\n";
}

inline std::optional<double> to_double(std::string_view s) {
    s = trim(s);
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<int> to_int(std::string_view s) {
    s = trim(s);
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<bool> to_bool(std::string_view s) {
    s = trim(s);
    if (s == "true") return true;
    if (s == "false") return false;
    return std::nullopt;
}

inline std::optional<std::vector<double>> to_list(std::string_view s) {
    std::vector<double> out;
    s = trim(s);
    if (s.empty()) return out;
    while (true) {
        auto comma = s.find(',');
        auto v = to_double(s.substr(0, comma));
        if (!v) return std::nullopt;
        out.push_back(*v);
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

inline std::string fmt(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

inline std::string fmt_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s;
}

} // namespace detail

inline ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig c;
    std::vector<ConfigIssue> issues;
    std::map<std::string, int> key_lines; // "section.key" -> line

    using Setter = std::function<bool(std::string_view)>;
    auto num = [](double& dst) -> Setter {
        return [&dst](std::string_view s) { auto v = detail::to_double(s); if (v) dst = *v; return bool(v); };
    };
    auto integer = [](int& dst) -> Setter {
        return [&dst](std::string_view s) { auto v = detail::to_int(s); if (v) dst = *v; return bool(v); };
    };
    auto boolean = [](bool& dst) -> Setter {
        return [&dst](std::string_view s) { auto v = detail::to_bool(s); if (v) dst = *v; return bool(v); };
    };
    auto list = [](std::vector<double>& dst) -> Setter {
        return [&dst](std::string_view s) { auto v = detail::to_list(s); if (v) dst = *v; return bool(v); };
    };

    GeometryConfig& g = c.geometry;
    BoundaryConfig& b = c.boundary;
    SweepConfig& w = c.sweep;
    MeshParams& m = c.mesh;
    ToleranceConfig& t = c.tolerance;
    OutputConfig& o = c.output;
    std::optional<double> grading;

    std::map<std::string, std::map<std::string, Setter>> table = {
        {"geometry",
         {{"dimension", integer(g.dimension)},
          {"profile",
           [&g](std::string_view s) {
               if (s == "quadratic") g.profile = ProfileKind::Quadratic;
               else if (s == "power_law") g.profile = ProfileKind::PowerLaw;
               else return false;
               return true;
           }},
          {"curvatures", list(g.curvatures)},
          {"order", num(g.order)},
          {"coefficient", num(g.coefficient)},
          {"upper_share", num(g.upper_share)},
          {"neck_radius", num(g.neck_radius)},
          {"outer_radius", num(g.outer_radius)},
          {"outer_shift", num(g.outer_shift)}}},
        {"boundary",
         {{"preset",
           [&b](std::string_view s) {
               if (s == "constant") b.preset = PresetKind::Constant;
               else if (s == "linear_xn") b.preset = PresetKind::LinearXn;
               else if (s == "linear_x1") b.preset = PresetKind::LinearX1;
               else if (s == "fourier") b.preset = PresetKind::Fourier;
               else return false;
               return true;
           }},
          {"value", num(b.value)},
          {"cosines", list(b.cosines)},
          {"sines", list(b.sines)}}},
        {"sweep",
         {{"epsilons", list(w.epsilons)},
          {"log_spaced", boolean(w.log_spaced)},
          {"log_start", num(w.log_start)},
          {"log_stop", num(w.log_stop)},
          {"points", integer(w.points)},
          {"threads", integer(w.threads)}}},
        {"mesh",
         {{"layers", integer(m.layers)},
          {"h_far", num(m.h_far)},
          {"h_near", num(m.h_near)},
          {"grade", num(m.grade)},
          {"neck_step", num(m.neck_step)},
          {"grading_exponent",
           [&grading](std::string_view s) {
               if (detail::trim(s) == "auto") { grading.reset(); return true; }
               auto v = detail::to_double(s);
               if (v) grading = *v;
               return bool(v);
           }},
          {"level", integer(m.level)},
          {"level_ratio", num(m.level_ratio)}}},
        {"tolerance",
         {{"rate", num(t.rate)},
          {"cauchy_rate", num(t.cauchy_rate)},
          {"energy_constant", num(t.energy_constant)},
          {"m_stability", num(t.m_stability)}}},
        {"output",
         {{"directory", [&o](std::string_view s) { o.directory = std::string(s); return !s.empty(); }},
          {"svg", boolean(o.svg)}}},
    };

    std::string section;
    int lineno = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                issues.push_back({lineno, "", "malformed section header"});
                continue;
            }
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            if (!table.count(section)) issues.push_back({lineno, section, "unknown section"});
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            issues.push_back({lineno, "", "expected key = value"});
            continue;
        }
        std::string key(detail::trim(line.substr(0, eq)));
        std::string_view value = detail::trim(line.substr(eq + 1));
        if (section.empty()) {
            issues.push_back({lineno, key, "key outside any section"});
            continue;
        }
        auto sec = table.find(section);
        if (sec == table.end()) continue; // already reported
        auto it = sec->second.find(key);
        std::string full = section + "." + key;
        if (it == sec->second.end()) {
            issues.push_back({lineno, full, "unknown key"});
            continue;
        }
        if (auto prev = key_lines.find(full); prev != key_lines.end()) {
            issues.push_back({lineno, full, "duplicate key (first set on line " + std::to_string(prev->second) + ")"});
            continue;
        }
        key_lines[full] = lineno;
        if (!it->second(value)) issues.push_back({lineno, full, "invalid value '" + std::string(value) + "'"});
    }
    m.grading_exponent = grading;

    auto at = [&](const std::string& key) {
        auto it = key_lines.find(key);
        return it == key_lines.end() ? 0 : it->second;
    };
    auto check = [&](bool ok, const std::string& key, const std::string& msg) {
        if (!ok) issues.push_back({at(key), key, msg});
    };

    check(g.dimension == 2 || g.dimension == 3, "geometry.dimension", "dimension must be 2 or 3");
    if (g.profile == ProfileKind::Quadratic) {
        check(int(g.curvatures.size()) == g.dimension - 1, "geometry.curvatures",
              "a quadratic profile needs n-1 principal curvatures");
        for (double v : g.curvatures) check(v > 0.0, "geometry.curvatures", "curvatures must be positive");
    } else {
        check(admissible(g.dimension, g.order), "geometry.order",
              "inadmissible convexity order: need m >= 2 for n = 2 and m >= n-1 for n >= 3");
        check(g.coefficient > 0.0, "geometry.coefficient", "coefficient must be positive");
    }
    check(g.upper_share > 0.0 && g.upper_share < 1.0, "geometry.upper_share", "split fraction must lie in (0, 1)");
    check(g.neck_radius > 0.0 && g.neck_radius < 1.0, "geometry.neck_radius", "R0 must lie in (0, 1)");
    check(g.outer_radius > 0.0, "geometry.outer_radius", "outer radius must be positive");
    check(g.outer_shift >= 0.0 && g.outer_shift <= 1.0, "geometry.outer_shift", "outer shift must lie in [0, 1]");
    if (b.preset == PresetKind::Fourier)
        check(!b.cosines.empty() || !b.sines.empty(), "boundary.preset", "fourier data needs coefficients");
    if (w.log_spaced) {
        check(w.points >= 2, "sweep.points", "need at least two points");
        check(w.log_start > w.log_stop, "sweep.log_stop", "log_stop must be below log_start");
    } else {
        check(!w.epsilons.empty(), "sweep.epsilons", "empty gap list");
        for (double e : w.epsilons) check(e > 0.0, "sweep.epsilons", "gaps must be positive");
    }
    check(w.threads >= 0, "sweep.threads", "threads must be >= 0");
    try {
        m.validate();
    } catch (const Error& e) {
        issues.push_back({0, "mesh", e.what()});
    }
    check(t.rate > 0 && t.cauchy_rate > 0 && t.energy_constant > 0 && t.m_stability > 0, "tolerance",
          "tolerances must be positive");

    if (issues.empty()) {
        try {
            (void)c.pair(c.epsilons().front());
        } catch (const Error& e) {
            issues.push_back({0, "geometry", e.what()});
        }
    }
    if (!issues.empty()) throw ConfigError(std::move(issues));
    return c;
}

inline std::string emit_config(const ExperimentConfig& c) {
    using detail::fmt;
    using detail::fmt_list;
    std::ostringstream s;
    const GeometryConfig& g = c.geometry;
    s << "[geometry]\n"
      << "dimension = " << g.dimension << "\n"
      << "profile = " << (g.profile == ProfileKind::Quadratic ? "quadratic" : "power_law") << "\n"
      << "curvatures = " << fmt_list(g.curvatures) << "\n"
      << "order = " << fmt(g.order) << "\n"
      << "coefficient = " << fmt(g.coefficient) << "\n"
      << "upper_share = " << fmt(g.upper_share) << "\n"
      << "neck_radius = " << fmt(g.neck_radius) << "\n"
      << "outer_radius = " << fmt(g.outer_radius) << "\n"
      << "outer_shift = " << fmt(g.outer_shift) << "\n\n";
    const BoundaryConfig& b = c.boundary;
    s << "[boundary]\n"
      << "preset = " << to_string(b.preset) << "\n"
      << "value = " << fmt(b.value) << "\n"
      << detail::entry("cosines", fmt_list(b.cosines))
      << detail::entry("sines", fmt_list(b.sines)) << "\n";
    const SweepConfig& w = c.sweep;
    s << "[sweep]\n"
      << detail::entry("epsilons", fmt_list(w.epsilons))
      << "log_spaced = " << (w.log_spaced ? "true" : "false") << "\n"
      << "log_start = " << fmt(w.log_start) << "\n"
      << "log_stop = " << fmt(w.log_stop) << "\n"
      << "points = " << w.points << "\n"
      << "threads = " << w.threads << "\n\n";
    const MeshParams& m = c.mesh;
    s << "[mesh]\n"
      << "layers = " << m.layers << "\n"
      << "h_far = " << fmt(m.h_far) << "\n"
      << "h_near = " << fmt(m.h_near) << "\n"
      << "grade = " << fmt(m.grade) << "\n"
      << "neck_step = " << fmt(m.neck_step) << "\n"
      << "grading_exponent = " << (m.grading_exponent ? fmt(*m.grading_exponent) : std::string("auto")) << "\n"
      << "level = " << m.level << "\n"
      << "level_ratio = " << fmt(m.level_ratio) << "\n\n";
    const ToleranceConfig& t = c.tolerance;
    s << "[tolerance]\n"
      << "rate = " << fmt(t.rate) << "\n"
      << "cauchy_rate = " << fmt(t.cauchy_rate) << "\n"
      << "energy_constant = " << fmt(t.energy_constant) << "\n"
      << "m_stability = " << fmt(t.m_stability) << "\n\n";
    s << "[output]\n"
      << "directory = " << c.output.directory << "\n"
      << "svg = " << (c.output.svg ? "true" : "false") << "\n";
    return s.str();
}

inline ExperimentConfig default_config() { return ExperimentConfig{}; }

/// "default" names the built-in configuration; anything else is a file path.
inline ExperimentConfig load_config(const std::string& where) {
    if (where == "default") return default_config();
    std::ifstream f(where);
    if (!f) fail(ErrorKind::Config, "cannot open config file " + where);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

/// FNV-1a over the emitted configuration.
inline std::uint64_t config_hash(const ExperimentConfig& c) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : emit_config(c)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace nclab
