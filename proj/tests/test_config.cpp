#include "nclab/config.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace nclab;

namespace {

std::vector<ConfigIssue> issues_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.issues();
    }
    return {};
}

bool has_issue(const std::vector<ConfigIssue>& v, int line, const std::string& key) {
    for (const auto& i : v)
        if (i.line == line && i.key == key) return true;
    return false;
}

} // namespace

TEST(Config, EmptyTextIsDefault) { EXPECT_EQ(parse_config(""), default_config()); }

TEST(Config, ShippedDefaultParsesAndRoundTrips) {
    std::ifstream f(NCLAB_SOURCE_DIR "/configs/default.cfg");
    ASSERT_TRUE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    ExperimentConfig c = parse_config(ss.str());
    EXPECT_EQ(c, default_config());
    EXPECT_EQ(parse_config(emit_config(c)), c);
    EXPECT_EQ(c.epsilons().size(), 4u);
}

TEST(Config, RoundTripsEveryField) {
    ExperimentConfig c;
    c.geometry.profile = ProfileKind::PowerLaw;
    c.geometry.order = 4.0;
    c.geometry.coefficient = 2.0;
    c.geometry.upper_share = 0.3;
    c.geometry.outer_radius = 6.0;
    c.geometry.outer_shift = 0.5;
    c.boundary.preset = PresetKind::Fourier;
    c.boundary.cosines = {0.1, 1.0 / 3.0};
    c.boundary.sines = {0.0, 0.7};
    c.sweep.log_spaced = true;
    c.sweep.log_start = -2.5;
    c.sweep.log_stop = -5.0;
    c.sweep.points = 6;
    c.sweep.threads = 3;
    c.mesh.layers = 8;
    c.mesh.grading_exponent = 0.3;
    c.mesh.h_near = 0.0123456789;
    c.tolerance.rate = 0.07;
    c.output.directory = "out/dir";
    c.output.svg = false;
    ExperimentConfig back = parse_config(emit_config(c));
    EXPECT_EQ(back, c);
    EXPECT_EQ(emit_config(back), emit_config(c));
    EXPECT_EQ(back.epsilons().size(), 6u);
}

TEST(Config, InadmissibleOrderRejected) {
    auto v = issues_of("[geometry]\ndimension = 3\nprofile = power_law\norder = 1.5\n");
    EXPECT_TRUE(has_issue(v, 4, "geometry.order"));
}

TEST(Config, DuplicateKeyLocated) {
    auto v = issues_of("[mesh]\nlayers = 6\n\n[mesh]\nlayers = 8\n");
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].line, 5);
    EXPECT_EQ(v[0].key, "mesh.layers");
}

TEST(Config, UnknownKeysAndSectionsAreErrors) {
    auto v = issues_of("[mesh]\nlayer = 6\n[plots]\nx = 1\n");
    EXPECT_TRUE(has_issue(v, 2, "mesh.layer"));
    EXPECT_TRUE(has_issue(v, 3, "plots"));
}

TEST(Config, TypeErrorsLocated) {
    auto v = issues_of("# comment\n[mesh]\nlayers = six\nh_far = 0.2.1\n[output]\nsvg = yes\n[sweep]\nepsilons = 1e-2, x\n");
    EXPECT_TRUE(has_issue(v, 3, "mesh.layers"));
    EXPECT_TRUE(has_issue(v, 4, "mesh.h_far"));
    EXPECT_TRUE(has_issue(v, 6, "output.svg"));
    EXPECT_TRUE(has_issue(v, 8, "sweep.epsilons"));
}

TEST(Config, SyntaxErrorsLocated) {
    auto v = issues_of("layers = 6\n[mesh\n[mesh]\njust words\n");
    EXPECT_TRUE(has_issue(v, 1, "layers"));
    EXPECT_TRUE(has_issue(v, 2, ""));
    EXPECT_TRUE(has_issue(v, 4, ""));
}

TEST(Config, SemanticChecks) {
    EXPECT_FALSE(issues_of("[geometry]\ncurvatures = 2, 3\n").empty());
    EXPECT_FALSE(issues_of("[geometry]\nupper_share = 1\n").empty());
    EXPECT_FALSE(issues_of("[boundary]\npreset = fourier\n").empty());
    EXPECT_FALSE(issues_of("[sweep]\nepsilons = 1e-2, -1e-3\n").empty());
    EXPECT_FALSE(issues_of("[mesh]\nlayers = 2\n").empty());
    EXPECT_FALSE(issues_of("[tolerance]\nrate = 0\n").empty());
    EXPECT_FALSE(issues_of("[geometry]\nouter_radius = 1.5\n").empty());
}

TEST(Config, ErrorMessageCarriesLines) {
    try {
        parse_config("[mesh]\nbogus = 1\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(Config, HashTracksContent) {
    ExperimentConfig a, b;
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.mesh.layers = 8;
    EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, LoadDefaultAndMissingFile) {
    EXPECT_EQ(load_config("default"), default_config());
    EXPECT_THROW(load_config("/nonexistent/file.cfg"), Error);
}

TEST(Config, BuildsDomainObjects) {
    ExperimentConfig c = parse_config("[geometry]\nprofile = power_law\norder = 4\ncoefficient = 2\n"
                                      "[boundary]\npreset = constant\nvalue = 1.5\n");
    InclusionPair g = c.pair(1e-3);
    EXPECT_EQ(g.profile().order(), 4.0);
    EXPECT_EQ(c.phi()(Vec2{1.0, 1.0}, g), 1.5);
}
