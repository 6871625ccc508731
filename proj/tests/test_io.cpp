#include "doctest.h"

#include "superbsde/config.hpp"
#include "superbsde/csv.hpp"
#include "superbsde/errors.hpp"
#include "superbsde/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace superbsde;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kConfig = R"({
  "problem": {
    "label": "unit",
    "forward": { "T": 1.0, "x0": 0.0, "sigma": 1.0 },
    "generator": { "family": "kpz", "lambda": 1.0, "q": 3.0 },
    "terminal": { "family": "linear", "scale": 2.0 },
    "growth": { "l": 2.0, "p_g": 0.9, "alpha_bar": 2.0, "C_growth": 8.0 }
  },
  "pde": { "N_x": 400, "N_t": 2000 },
  "mc": { "paths": 1000, "steps": 10, "bins": 5 }
})";

} // namespace

TEST_CASE("csv: fixed numeric formatting") {
    CHECK(CsvWriter::format(1.0) == "1");
    CHECK(CsvWriter::format(0.1) == "0.1");
    CHECK(CsvWriter::format(-2.5e-13) == "-2.5e-13");
    CHECK(CsvWriter::format(1234567890.123) == "1234567890.12");
}

TEST_CASE("csv: repeated writes are byte-identical") {
    auto emit = [](const std::string& path) {
        CsvWriter w(path);
        w.header({"a", "b"});
        w.row({1.0, 2.0 / 3.0});
        w.mixed_row({"tag", CsvWriter::format(0.25)});
    };
    emit("unit_a.csv");
    emit("unit_b.csv");
    std::string a = slurp("unit_a.csv"), b = slurp("unit_b.csv");
    CHECK(a == b);
    CHECK(a.find("a,b\n") == 0);
    std::remove("unit_a.csv");
    std::remove("unit_b.csv");
}

TEST_CASE("manifest: sha256 known vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("manifest: canonicalization ignores comments and whitespace") {
    std::string a = "{\n\"x\": 1\n}";
    std::string b = "  {   \n# a comment\n\n  \"x\": 1  # trailing note\n }  ";
    CHECK(sha256_hex(canonicalize_config_text(a)) ==
          sha256_hex(canonicalize_config_text(b)));
}

TEST_CASE("manifest: save/load round-trip") {
    RunManifest m;
    m.subcommand = "solve-mc";
    m.config_digest = sha256_hex("cfg");
    m.config_text = "cfg";
    m.master_seed = 42;
    m.resolutions = {{"paths", "1000"}};
    m.constants = {{"C_y", 2.5}};
    m.outputs = {"out.csv"};
    m.wall_seconds = 0.25;
    m.pass = true;
    m.save("unit_manifest.json");
    RunManifest back = RunManifest::load("unit_manifest.json");
    CHECK(back.subcommand == m.subcommand);
    CHECK(back.config_digest == m.config_digest);
    CHECK(back.master_seed == m.master_seed);
    CHECK(back.resolutions == m.resolutions);
    CHECK(back.constants == m.constants);
    CHECK(back.outputs == m.outputs);
    CHECK(back.pass == m.pass);
    std::remove("unit_manifest.json");
}

TEST_CASE("config: full schema parse") {
    LoadedConfig cfg = parse_config_text(kConfig, "unit");
    CHECK(cfg.problem.label == "unit");
    CHECK(cfg.problem.generator.family == GeneratorFamily::Kpz);
    CHECK(cfg.problem.terminal.scale == doctest::Approx(2.0));
    CHECK(cfg.has_pde);
    CHECK(cfg.pde.N_x == 400);
    CHECK(cfg.has_mc);
    CHECK(cfg.mc_paths == 1000);
    CHECK(cfg.mc_basis.bins == 5);
}

TEST_CASE("config: schema violations raise ConfigError") {
    CHECK_THROWS_AS(parse_config_text("not json", "unit"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("{}", "unit"), ConfigError);
    // invalid growth exponent is rejected at load time
    std::string bad = kConfig;
    bad.replace(bad.find("\"l\": 2.0"), 8, "\"l\": 0.5");
    CHECK_THROWS_AS(parse_config_text(bad, "unit"), ConfigError);
}
