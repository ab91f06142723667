#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "../tools/cli.hpp"
#include "helpers.hpp"
#include "htsentinel/calibration.hpp"
#include "htsentinel/ingest.hpp"
#include "htsentinel/rng.hpp"
#include "htsentinel/spectra.hpp"
#include "htsentinel/synth.hpp"

using httest::TempDir;
using nlohmann::json;

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
  json doc;  // parsed stdout when nonempty
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = htsentinel::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  if (!r.out.empty() && r.out.front() == '{') r.doc = json::parse(r.out);
  return r;
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f << s;
}

}  // namespace

TEST_CASE("missing arguments yield exit 1 and usage text") {
  const auto r = run_cli({"esd"});
  CHECK(r.code == 1);
  CHECK(r.err.find("Usage") != std::string::npos);
  const auto r2 = run_cli({});
  CHECK(r2.code == 1);
}

TEST_CASE("help exits 0") {
  const auto r = run_cli({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("Subcommands") != std::string::npos);
}

TEST_CASE("esd on an identity matrix writes a file of ones") {
  TempDir dir;
  const auto npy = dir / "eye.npy";
  std::vector<double> eye(9, 0.0);
  eye[0] = eye[4] = eye[8] = 1.0;
  htsentinel::ingest::write_matrix(htsentinel::spectra::WeightMatrix(3, 3, eye), npy);
  const auto out = dir / "eig.txt";
  const auto r = run_cli({"esd", npy.string(), out.string()});
  CHECK(r.code == 0);
  CHECK(r.doc["schema"] == "ht-sentinel/v1");
  CHECK(r.doc["count"] == 3);
  const auto s = htsentinel::ingest::read_eigenvalues(out);
  for (double v : s.eigenvalues) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("esd on a corrupt file exits 2") {
  TempDir dir;
  const auto bad = dir / "bad.npy";
  write_text(bad, "not an npy file");
  const auto r = run_cli({"esd", bad.string(), (dir / "out.txt").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("error") != std::string::npos);
}

TEST_CASE("fit identifies a synthetic power-law spectrum as heavy-tailed") {
  TempDir dir;
  htsentinel::RngStream rng(31);
  const auto values = htsentinel::calibration::sample_powerlaw(2.5, 1.0, 800, rng);
  const auto spec = httest::make_spectrum(values);
  const auto path = dir / "pl.txt";
  htsentinel::ingest::write_eigenvalues(spec, path);
  const auto r = run_cli({"fit", path.string()});
  REQUIRE(r.code == 0);
  CHECK(r.doc["heavy_tailed"] == true);
  CHECK(r.doc["alpha"].get<double>() > 2.0);
  CHECK(r.doc["exponential"]["comparison"]["winner"] == "power_law");
  CHECK(r.doc["bootstrap"].is_null());
}

TEST_CASE("fit exits 2 when the tail is too small") {
  TempDir dir;
  const auto path = dir / "five.txt";
  write_text(path, "1\n2\n3\n4\n5\n");
  const auto r = run_cli({"fit", path.string()});
  CHECK(r.code == 2);
}

TEST_CASE("fit rejects undersized bootstrap counts with exit 1") {
  TempDir dir;
  const auto path = dir / "v.txt";
  write_text(path, "1\n2\n3\n4\n5\n6\n7\n8\n9\n10\n11\n12\n");
  const auto r = run_cli({"fit", path.string(), "--bootstrap", "10"});
  CHECK(r.code == 1);
}

TEST_CASE("fit runs the bootstrap when asked") {
  TempDir dir;
  htsentinel::RngStream rng(77);
  const auto spec =
      httest::make_spectrum(htsentinel::calibration::sample_powerlaw(2.2, 1.0, 300, rng));
  const auto path = dir / "pl.txt";
  htsentinel::ingest::write_eigenvalues(spec, path);
  const auto r = run_cli({"fit", path.string(), "--bootstrap", "100", "--seed", "5"});
  REQUIRE(r.code == 0);
  CHECK(r.doc["bootstrap"]["n_bootstrap"] == 100);
  CHECK(r.doc["bootstrap"]["p_value"].get<double>() >= 0.0);
}

TEST_CASE("calibrate writes outputs and prints the recommendation") {
  TempDir dir;
  const auto out = dir / "cal.json";
  const auto hist = dir / "hist.csv";
  const auto r = run_cli({"calibrate", "--runs", "200", "--seed", "4", "--out", out.string(),
                          "--hist", hist.string()});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("recommended C = 2") != std::string::npos);
  CHECK(r.doc["recommended_c"] == 2.0);
  CHECK(std::filesystem::exists(out));
  CHECK(std::filesystem::exists(hist));
  const auto full = json::parse(std::ifstream(out));
  CHECK(full["schema"] == "ht-sentinel/v1");
  CHECK(full["cells"].size() == 12);
}

TEST_CASE("calibrate rejects alphas at or below one") {
  const auto r = run_cli({"calibrate", "--alphas", "0.5", "--runs", "10"});
  CHECK(r.code == 1);
}

TEST_CASE("calibrate accepts a single replicate per cell") {
  TempDir dir;
  const auto r = run_cli({"calibrate", "--runs", "1", "--seed", "8", "--out",
                          (dir / "c.json").string(), "--hist", (dir / "h.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(r.doc["recommended_c"].get<double>() >= r.doc["pooled"]["max"].get<double>());
}

TEST_CASE("fit accepts NPY matrices directly") {
  TempDir dir;
  const auto npy = dir / "h.npy";
  htsentinel::ingest::write_matrix(htsentinel::synth::gen_heavytail_matrix(200, 200, 2.5, 3),
                                   npy);
  const auto r = run_cli({"fit", npy.string(), "--min-tail", "100"});
  REQUIRE(r.code == 0);
  CHECK(r.doc["heavy_tailed"] == true);
  CHECK(r.doc["eigenvalues"] == 200);
}

TEST_CASE("HT_SENTINEL_THREADS is honored and validated") {
  TempDir dir;
  ::setenv("HT_SENTINEL_THREADS", "2", 1);
  const auto ok = run_cli({"calibrate", "--runs", "20", "--out", (dir / "a.json").string(),
                           "--hist", (dir / "a.csv").string()});
  CHECK(ok.code == 0);
  ::setenv("HT_SENTINEL_THREADS", "zero", 1);
  const auto bad = run_cli({"calibrate", "--runs", "20", "--out", (dir / "b.json").string(),
                            "--hist", (dir / "b.csv").string()});
  CHECK(bad.code == 1);
  ::unsetenv("HT_SENTINEL_THREADS");
}

TEST_CASE("analyze runs the full pipeline over a synthetic manifest") {
  TempDir dir;
  htsentinel::synth::TrajectorySpec spec;
  spec.rows = spec.cols = 60;
  spec.epochs = 24;
  spec.phase1_boundary = 4;
  spec.phase2_boundary = 16;
  spec.seed = 3;
  htsentinel::synth::gen_trajectory(spec, dir.path());
  const auto prefix = (dir / "traj").string();
  const auto r = run_cli({"analyze", (dir / "manifest.json").string(), "--mode", "offline",
                          "--out-prefix", prefix});
  REQUIRE(r.code == 0);
  CHECK(r.doc["records"] == 24);
  CHECK(r.doc["stop"]["mode"] == "offline");
  CHECK(std::filesystem::exists(prefix + ".csv"));
  CHECK(std::filesystem::exists(prefix + ".json"));
  CHECK(std::filesystem::exists(prefix + "_indicator.svg"));
  CHECK(r.err.find("stop epoch") != std::string::npos);
}

TEST_CASE("analyze exits 2 on manifests with duplicate epochs") {
  TempDir dir;
  write_text(dir / "m.json", R"({"model_label":"x","matrix_id":"v",
    "entries":[{"epoch":5,"path":"a.npy","kind":"matrix"},
               {"epoch":5,"path":"b.npy","kind":"matrix"}]})");
  const auto r = run_cli({"analyze", (dir / "m.json").string()});
  CHECK(r.code == 2);
}

TEST_CASE("analyze reports per-entry failures with exit 2 and partial results") {
  TempDir dir;
  htsentinel::RngStream rng(8);
  const auto spec =
      httest::make_spectrum(htsentinel::calibration::sample_powerlaw(2.5, 1.0, 300, rng));
  htsentinel::ingest::write_eigenvalues(spec, dir / "good.txt");
  write_text(dir / "bad.txt", "-1\n");
  write_text(dir / "m.json", R"({"model_label":"x","matrix_id":"v","min_tail":10,
    "entries":[{"epoch":1,"path":"good.txt","kind":"eigenvalues"},
               {"epoch":2,"path":"bad.txt","kind":"eigenvalues"},
               {"epoch":3,"path":"missing.txt","kind":"eigenvalues"}]})");
  const auto prefix = (dir / "out").string();
  const auto r = run_cli({"analyze", (dir / "m.json").string(), "--out-prefix", prefix});
  CHECK(r.code == 2);
  CHECK(r.doc["records"] == 1);
  CHECK(r.doc["failures"].size() == 2);
  CHECK(std::filesystem::exists(prefix + ".csv"));
}

TEST_CASE("a single positive-indicator record stops at its own epoch") {
  TempDir dir;
  htsentinel::RngStream rng(9);
  const auto spec =
      httest::make_spectrum(htsentinel::calibration::sample_powerlaw(2.5, 1.0, 400, rng));
  htsentinel::ingest::write_eigenvalues(spec, dir / "e.txt");
  write_text(dir / "m.json", R"({"model_label":"x","matrix_id":"v","min_tail":10,
    "entries":[{"epoch":42,"path":"e.txt","kind":"eigenvalues"}]})");
  const auto r =
      run_cli({"analyze", (dir / "m.json").string(), "--out-prefix", (dir / "o").string()});
  REQUIRE(r.code == 0);
  CHECK(r.doc["stop"]["stop_epoch"] == 42);
  CHECK(r.doc["stop"]["triggered"] == true);
  CHECK(r.doc["segmentation"].is_null());
}

TEST_CASE("unknown synth kinds exit 1") {
  const auto r = run_cli({"synth", "warp"});
  CHECK(r.code == 1);
}

TEST_CASE("synth distribution writes draws") {
  TempDir dir;
  const auto out = dir / "draws.txt";
  const auto r = run_cli({"synth", "distribution", "--dist", "power_law", "--n", "50", "--seed",
                          "2", "--out", out.string()});
  REQUIRE(r.code == 0);
  CHECK(r.doc["n"] == 50);
  std::ifstream f(out);
  std::string line;
  std::size_t count = 0;
  while (std::getline(f, line))
    if (!line.empty()) ++count;
  CHECK(count == 50);
}

TEST_CASE("synth trajectory emits matrices and a manifest") {
  TempDir dir;
  const auto out_dir = dir / "run";
  const auto r = run_cli({"synth", "trajectory", "--epochs", "8", "--b1", "2", "--b2", "5",
                          "--rows", "40", "--cols", "40", "--out-dir", out_dir.string()});
  REQUIRE(r.code == 0);
  CHECK(r.doc["files"] == 8);
  std::size_t npy = 0;
  for (const auto& e : std::filesystem::directory_iterator(out_dir))
    if (e.path().extension() == ".npy") ++npy;
  CHECK(npy == 8);
  CHECK(std::filesystem::exists(out_dir / "manifest.json"));
}

TEST_CASE("theory reports the quarter-bound flag but exits 0") {
  TempDir dir;
  const auto out = dir / "theory.json";
  const auto r = run_cli({"theory", "--seed", "11", "--out", out.string()});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("FLAG") != std::string::npos);
  CHECK(r.err.find("FAIL") == std::string::npos);
  const auto doc = json::parse(std::ifstream(out));
  bool quarter_flagged = false;
  for (const auto& c : doc["checks"]) {
    if (c["informational"] == true) {
      CHECK(c["pass"] == false);
      CHECK(c["observed"].get<double>() > 0.49);
      quarter_flagged = true;
    }
  }
  CHECK(quarter_flagged);
}

TEST_CASE("stdout JSON is schema versioned across subcommands") {
  TempDir dir;
  const auto r = run_cli({"synth", "gaussian", "--rows", "10", "--cols", "10", "--out",
                          (dir / "g.npy").string()});
  REQUIRE(r.code == 0);
  CHECK(r.doc["schema"] == "ht-sentinel/v1");
}
