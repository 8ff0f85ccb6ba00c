#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cocopnp/dct_denoiser.hpp"
#include "cocopnp/image_io.hpp"
#include "cocopnp/noise.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace cocopnp {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    rows.push_back(std::move(fields));
  }
  return rows;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::path(COCOPNP_TEST_TMPDIR) / info->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  RunResult run(const std::string& args) const {
    const fs::path out = dir_ / "stdout.txt";
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = std::string("\"") + COCOPNP_CLI_PATH + "\" " + args +
                            " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  // Piecewise-constant test image written as PNG and dump.
  fs::path clean_image(std::uint32_t size = 16) const {
    Image x({size, size, 1}, 0.2);
    for (std::uint32_t i = size / 4; i < 3 * size / 4; ++i)
      for (std::uint32_t j = size / 8; j < size / 2 + 2; ++j) x.at(i, j) = 0.8;
    write_dump(path("clean.dump"), x);
    write_png(path("clean.png"), x);
    return path("clean.dump");
  }

  fs::path kernel_file() const {
    std::ofstream k(path("kernel.txt"));
    k << "1 2 1\n2 4 2\n1 2 1\n";
    return path("kernel.txt");
  }

  std::string q(const fs::path& p) const { return "\"" + p.string() + "\""; }

  fs::path dir_;
};

TEST_F(Cli, TheoryPrintsT0) {
  const RunResult r = run("theory --gamma 0.5");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("t0"), std::string::npos);
  EXPECT_NE(r.out.find("0.3760"), std::string::npos) << r.out;
}

TEST_F(Cli, TheoryJsonSchema) {
  const RunResult r = run("theory --gamma 0.25 --t 0.2 --json");
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  std::vector<std::string> want{"L",     "admm_margin", "beta", "case", "gamma",
                                "pegd_step_bound", "r", "t", "t0"};
  std::sort(want.begin(), want.end());
  EXPECT_EQ(keys, want);
  EXPECT_NEAR(j["t0"].get<double>(), 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(j["admm_margin"].get<double>(), 0.171875, 1e-12);
  EXPECT_EQ(j["case"].get<int>(), 2);
}

TEST_F(Cli, TheoryGammaOneHasNoT0) {
  const RunResult r = run("theory --gamma 1 --t 0.3 --json");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(json::parse(r.out)["t0"].is_null());
}

TEST_F(Cli, TheoryRejectsBadGamma) {
  EXPECT_EQ(run("theory --gamma 1.5").code, 2);
  EXPECT_EQ(run("theory --gamma 0.5 --sigma 0.1 --beta 3").code, 2);
}

TEST_F(Cli, UnknownOptionIsValidationError) {
  EXPECT_EQ(run("theory --no-such-flag").code, 2);
  EXPECT_EQ(run("").code, 2);
}

TEST_F(Cli, SimulateIsByteIdenticalAcrossRuns) {
  const auto clean = clean_image();
  const auto k = kernel_file();
  for (const char* out : {"a", "b"}) {
    const RunResult r = run("simulate --input " + q(clean) + " --kernel " + q(k) +
                            " --peak 100 --seed 7 --out " + q(path(out)));
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(slurp(path("a/observation.dump")), slurp(path("b/observation.dump")));
  EXPECT_EQ(slurp(path("a/observation.png")), slurp(path("b/observation.png")));
  const json m = read_json(path("a/manifest.json"));
  EXPECT_EQ(m["seed"].get<std::uint64_t>(), 7u);
  EXPECT_EQ(m["peak"].get<double>(), 100.0);
  EXPECT_EQ(m["kernel_hash"].get<std::string>().size(), 16u);
  EXPECT_TRUE(m["kernel_renormalized"].get<bool>());
}

TEST_F(Cli, SimulateWarnsWhenRenormalizing) {
  const RunResult r = run("simulate --input " + q(clean_image()) + " --kernel " +
                          q(kernel_file()) + " --out " + q(path("o")));
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("renormalized"), std::string::npos);
}

TEST_F(Cli, SimulateHugePeakMatchesClean) {
  const auto clean = clean_image();
  const RunResult r = run("simulate --input " + q(clean) + " --peak 1e9 --out " +
                          q(path("o")));
  ASSERT_EQ(r.code, 0) << r.err;
  const Image obs = read_dump(path("o/observation.dump"));
  const Image x = read_dump(clean);
  EXPECT_LE((obs - x).values().cwiseAbs().maxCoeff(), 1e-3);
}

TEST_F(Cli, SimulateMissingKernelNamesPath) {
  const RunResult r = run("simulate --input " + q(clean_image()) + " --kernel " +
                          q(path("nope.txt")) + " --out " + q(path("o")));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("nope.txt"), std::string::npos) << r.err;
}

TEST_F(Cli, SimulateReplaysFromItsConfig) {
  const auto clean = clean_image();
  ASSERT_EQ(run("simulate --input " + q(clean) + " --kernel " + q(kernel_file()) +
                " --peak 30 --seed 11 --out " + q(path("first")))
                .code,
            0);
  fs::create_directories(path("replay"));
  // The recorded config names the first output directory; redirect it.
  const RunResult r = run("--config " + q(path("first/simulate.ini")) +
                          " simulate --out " + q(path("replay")));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("first/observation.dump")),
            slurp(path("replay/observation.dump")));
  EXPECT_EQ(read_json(path("replay/manifest.json"))["peak"].get<double>(), 30.0);
}

TEST_F(Cli, FlagsOverrideConfigFile) {
  const auto clean = clean_image();
  {
    std::ofstream ini(path("cfg.ini"));
    ini << "[simulate]\ninput=\"" << clean.string() << "\"\npeak=50\nseed=3\nout=\""
        << path("o").string() << "\"\n";
  }
  const RunResult r = run("--config " + q(path("cfg.ini")) + " simulate --peak 80");
  ASSERT_EQ(r.code, 0) << r.err;
  const json m = read_json(path("o/manifest.json"));
  EXPECT_EQ(m["peak"].get<double>(), 80.0);
  EXPECT_EQ(m["seed"].get<std::uint64_t>(), 3u);
}

TEST_F(Cli, RestoreSummaryPsnrMatchesWrittenFiles) {
  const auto clean = clean_image();
  const auto k = kernel_file();
  ASSERT_EQ(run("simulate --input " + q(clean) + " --kernel " + q(k) +
                " --peak 50 --seed 1 --out " + q(path("sim")))
                .code,
            0);
  const RunResult r =
      run("restore --observation " + q(path("sim/observation.dump")) +
          " --reference " + q(clean) + " --task deconvolve --kernel " + q(k) +
          " --lambda 50 --sigma 0.2 --max-iter 60 --out " + q(path("res")));
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = read_json(path("res/summary.json"));
  const Image restored = read_dump(path("res/restored.dump"));
  EXPECT_DOUBLE_EQ(s["psnr"].get<double>(), psnr(restored, read_dump(clean)));
  EXPECT_LE(s["iterations"].get<int>(), 60);
  EXPECT_EQ(s["solver"], "coco-admm");
  EXPECT_TRUE(s["theory"].contains("admm_margin"));
  EXPECT_TRUE(fs::exists(path("res/restored.png")));

  const auto rows = read_csv(path("res/trace.csv"));
  ASSERT_GE(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"iter", "rel_change", "psnr",
                                               "fidelity", "lyapunov", "millis"}));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 6u);
    EXPECT_EQ(std::stoi(rows[i][0]), static_cast<int>(i));
    for (int c : {1, 2, 3, 5}) EXPECT_TRUE(std::isfinite(std::stod(rows[i][c])));
  }
  EXPECT_EQ(static_cast<int>(rows.size()) - 1, s["iterations"].get<int>());
}

TEST_F(Cli, RestoreEnforcedTheoryCitesT0) {
  const auto clean = clean_image();
  const auto k = kernel_file();
  ASSERT_EQ(run("simulate --input " + q(clean) + " --kernel " + q(k) + " --out " +
                q(path("sim")))
                .code,
            0);
  const RunResult r = run("restore --observation " + q(path("sim/observation.dump")) +
                          " --task deconvolve --kernel " + q(k) +
                          " --t 0.5 --gamma 0.25 --enforce-theory --out " +
                          q(path("res")));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("0.3333"), std::string::npos) << r.err;
}

TEST_F(Cli, RestoreZeroFidelityIteratesDenoiser) {
  const auto clean = clean_image();
  const RunResult r =
      run("restore --observation " + q(clean) + " --lambda 0 --sigma 0.05 --t 0.5"
          " --stop-tol 1e-12 --max-iter 2000 --out " + q(path("res")));
  ASSERT_EQ(r.code, 0) << r.err;
  // With lambda = 0 the v-iterates are D^t applied repeatedly from f.
  DctSoftThresholdDenoiser dct(1.0);
  Image v = read_dump(clean);
  for (int k = 0; k < 5000; ++k) {
    Image next = averaged_apply(dct, 0.5, v, 0.05);
    const bool done = norm(next - v) <= 1e-14 * std::max(1.0, norm(v));
    v = std::move(next);
    if (done) break;
  }
  const Image restored = read_dump(path("res/restored.dump"));
  EXPECT_LE((restored - v).values().cwiseAbs().maxCoeff(), 1e-6);
}

TEST_F(Cli, RestoreRejectsKernelForDenoise) {
  const RunResult r = run("restore --observation " + q(clean_image()) +
                          " --kernel " + q(kernel_file()) + " --out " + q(path("r")));
  EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, PegdRuns) {
  const auto clean = clean_image();
  ASSERT_EQ(run("simulate --input " + q(clean) + " --peak 50 --out " + q(path("sim")))
                .code,
            0);
  const RunResult r =
      run("restore --observation " + q(path("sim/observation.dump")) +
          " --reference " + q(clean) + " --solver coco-pegd --t 1 --lambda 50"
          " --sigma 0.2 --beta 2 --enforce-theory --out " + q(path("res")));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(read_json(path("res/summary.json"))["theory"]["pegd_step_ok"].get<bool>());
}

TEST_F(Cli, CertifyDctNormsAtMostOne) {
  const RunResult r = run("certify --denoiser dct --points 8 --patch 8x8 --seed 5 --out " +
                          q(path("c")));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(path("c/certification.csv"));
  ASSERT_EQ(rows.size(), 9u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"point_id", "sigma", "gamma", "norm_coco",
                                               "norm_symmetry", "iterations_used"}));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(std::stoi(rows[i][0]), static_cast<int>(i - 1));
    EXPECT_LE(std::stod(rows[i][3]), 1.0 + 1e-9);
    EXPECT_LE(std::stod(rows[i][4]), 1e-9);
    EXPECT_GE(std::stoi(rows[i][5]), 1);
  }
  const json j = read_json(path("c/certification.json"));
  EXPECT_EQ(j["coco_pass_fraction"].get<double>(), 1.0);
  EXPECT_EQ(j["gamma"].get<double>(), 1.0);
}

TEST_F(Cli, TrainDefaultsThenRestoreWithCheckpoint) {
  const RunResult r = run("train --out " + q(path("t")));
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_TRUE(fs::exists(path("t/denoiser.cpnpden")));
  const auto rows = read_csv(path("t/loss.csv"));
  ASSERT_EQ(rows.size(), 501u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"step", "data_l1", "hamiltonian",
                                               "spectral", "total"}));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 5u);
    for (const auto& f : rows[i]) EXPECT_TRUE(std::isfinite(std::stod(f)));
  }
  const json summary = read_json(path("t/train.json"));
  EXPECT_LT(summary["certification"]["mean_symmetry"].get<double>(), 1e-6);

  const auto clean = clean_image();
  const RunResult c = run("certify --denoiser " + q(path("t/denoiser.cpnpden")) +
                          " --points 4 --out " + q(path("c")));
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(read_json(path("c/certification.json"))["gamma"].get<double>(), 0.25);

  const RunResult res = run("restore --observation " + q(clean) + " --denoiser " +
                            q(path("t/denoiser.cpnpden")) + " --max-iter 5 --out " +
                            q(path("res")));
  ASSERT_EQ(res.code, 0) << res.err;
  EXPECT_NE(read_json(path("res/summary.json"))["denoiser"].get<std::string>().find(
                "tiled"),
            std::string::npos);
}

TEST_F(Cli, TrainDivergenceExitsThreeAndKeepsLog) {
  const RunResult r = run("train --lr 1e308 --steps 50 --out " + q(path("t")));
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_TRUE(fs::exists(path("t/loss.csv")));
  EXPECT_FALSE(fs::exists(path("t/denoiser.cpnpden")));
}

TEST_F(Cli, SweepIsIndependentOfWorkerCount) {
  const auto clean = clean_image();
  ASSERT_EQ(run("simulate --input " + q(clean) + " --peak 50 --out " + q(path("sim")))
                .code,
            0);
  const std::string base = "sweep --observation " + q(path("sim/observation.dump")) +
                           " --reference " + q(clean) +
                           " --lambda 50 --ts 0.1,0.3 --sigmas 0.1,0.2 --max-iter 30";
  ASSERT_EQ(run(base + " --workers 1 --out " + q(path("w1"))).code, 0);
  const RunResult r = run(base + " --workers 3 --out " + q(path("w3")));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("w1/sweep.csv")), slurp(path("w3/sweep.csv")));
  const auto rows = read_csv(path("w3/sweep.csv"));
  ASSERT_EQ(rows.size(), 5u);
  for (int i = 0; i < 4; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "run_%04d", i);
    EXPECT_EQ(slurp(path("w1") / name / "restored.dump"),
              slurp(path("w3") / name / "restored.dump"));
  }
}

TEST_F(Cli, SweepReportsRejectedRuns) {
  const auto clean = clean_image();
  const RunResult r =
      run("sweep --observation " + q(clean) + " --gammas 0.5,2 --max-iter 3 --out " +
          q(path("s")));
  EXPECT_EQ(r.code, 2);
  const auto rows = read_csv(path("s/sweep.csv"));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][5], "\"ok\"");
  EXPECT_NE(rows[2][5].find("validation"), std::string::npos);
}

}  // namespace
}  // namespace cocopnp
