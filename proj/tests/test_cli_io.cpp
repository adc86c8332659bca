#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "homog/field_io.hpp"
#include "homog/pipeline.hpp"

using namespace homog;
namespace fs = std::filesystem;

namespace {

const char* kSmallConfig = R"(
# identical phases, small grid: every stage is cheap
[grid]
nx = 32
ny = 32

[material]
case = kelvin_voigt
mu1 = 1.0
mu2 = 1.0
nu1 = 1.0
nu2 = 1.0

[microstructure]
kind = laminate
vf = 1.0
epsilon = 0.25

[time]
T = 0.01
dt = 2e-3
K = 20
horizon = 1.0
snapshot_every = 2

[solver]
tol = 1e-10

[run]
convection = off
out = unused
initial_velocity = shear_sine
v0_amplitude = 0.1
)";

std::string read_bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("config parsing, validation errors with line numbers") {
  SimConfig c = parse_config_text(kSmallConfig);
  CHECK(c.n[0] == 32);
  CHECK(c.material.mu1 == 1.0);
  CHECK(c.structure.vf == 1.0);
  CHECK(c.T == 0.01);
  CHECK(c.snapshot_every == 2);

  try {
    (void)parse_config_text("[grid]\nnx = not_a_number\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line == 2);
  }
  CHECK_THROWS_AS((void)parse_config_text("nx = 3\n"), ConfigError);       // key outside section
  CHECK_THROWS_AS((void)parse_config_text("[solver]\nmode = bogus\n"), ConfigError);
  CHECK_THROWS_AS((void)parse_config_text("[grid]\nnx = 63\n"), ConfigError);  // odd n
}

TEST_CASE("config serialization round-trips exactly") {
  SimConfig c = parse_config_text(kSmallConfig);
  const std::string s1 = serialize_config(c);
  SimConfig c2 = parse_config_text(s1);
  const std::string s2 = serialize_config(c2);
  CHECK(s1 == s2);
  CHECK(config_hash(c) == config_hash(c2));
}

TEST_CASE("pipeline: all stages run, artifacts appear, validate passes") {
  const fs::path dir = fs::temp_directory_path() / "homog_pipeline_test";
  fs::remove_all(dir);
  SimConfig cfg = parse_config_text(kSmallConfig);
  PipelineOptions opt;
  opt.out_dir = dir.string();
  opt.log_level = 0;

  CHECK(run_pipeline(cfg, {"all"}, opt) == exit_ok);
  CHECK(fs::exists(dir / "theta0.fld"));
  CHECK(fs::exists(dir / "micro" / "energy.csv"));
  CHECK(fs::exists(dir / "correctors" / "correctors.json"));
  CHECK(fs::exists(dir / "effective_law.txt"));
  CHECK(fs::exists(dir / "macro" / "kinetic.csv"));
  CHECK(fs::exists(dir / "validation" / "report.csv"));
  CHECK(fs::exists(dir / "manifest_validate.json"));

  // stage outputs load back
  EffectiveLaw law = read_effective_law((dir / "effective_law.txt").string());
  CHECK(law.K == 20);
  CorrectorSet cs = load_corrector_set((dir / "correctors").string());
  CHECK(cs.pairs.size() == 3);
  fs::remove_all(dir);
}

TEST_CASE("missing prerequisite artifacts produce actionable errors") {
  const fs::path dir = fs::temp_directory_path() / "homog_missing_test";
  fs::remove_all(dir);
  SimConfig cfg = parse_config_text(kSmallConfig);
  PipelineOptions opt;
  opt.out_dir = dir.string();
  opt.log_level = 0;
  // run-macro without an effective law names assemble-effective
  CHECK(run_stage(cfg, "run-macro", opt) == exit_config);
  CHECK(run_stage(cfg, "run-micro", opt) == exit_config);  // theta0 missing too
  CHECK(run_stage(cfg, "made-up-stage", opt) == exit_config);
  fs::remove_all(dir);
}

TEST_CASE("determinism: re-running a config reproduces numerical artifacts byte for byte") {
  SimConfig cfg = parse_config_text(kSmallConfig);
  cfg.structure.kind = StructureKind::random_inclusions;
  cfg.structure.vf = 0.3;
  cfg.structure.seed = 7;
  cfg.initial_velocity = "random";

  const fs::path d1 = fs::temp_directory_path() / "homog_det_1";
  const fs::path d2 = fs::temp_directory_path() / "homog_det_2";
  fs::remove_all(d1);
  fs::remove_all(d2);
  PipelineOptions o1{d1.string(), 0}, o2{d2.string(), 0};
  REQUIRE(run_pipeline(cfg, {"gen-structure", "run-micro", "run-correctors", "assemble-effective"},
                       o1) == exit_ok);
  REQUIRE(run_pipeline(cfg, {"gen-structure", "run-micro", "run-correctors", "assemble-effective"},
                       o2) == exit_ok);

  for (const char* rel :
       {"theta0.fld", "micro/energy.csv", "micro/snapshot_0000_v.fld", "effective_law.txt",
        "correctors/pair2_n.fld", "correctors/pair2_F3.csv"}) {
    CAPTURE(rel);
    CHECK(read_bytes(d1 / rel) == read_bytes(d2 / rel));
  }
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("corrector set round trip preserves averages") {
  const fs::path dir = fs::temp_directory_path() / "homog_cs_roundtrip";
  fs::remove_all(dir);
  SimConfig cfg = parse_config_text(kSmallConfig);
  PipelineOptions opt{dir.string(), 0};
  REQUIRE(run_pipeline(cfg, {"gen-structure", "run-correctors"}, opt) == exit_ok);
  CorrectorSet cs = load_corrector_set((dir / "correctors").string());
  save_corrector_set((dir / "correctors2").string(), cs);
  CHECK(read_bytes(dir / "correctors" / "pair0_F3.csv") ==
        read_bytes(dir / "correctors2" / "pair0_F3.csv"));
  CHECK(read_bytes(dir / "correctors" / "pair1_n.fld") ==
        read_bytes(dir / "correctors2" / "pair1_n.fld"));
  fs::remove_all(dir);
}
