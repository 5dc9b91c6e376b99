// Copyright 2026 The icosweep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "icosweep/config.hpp"
#include "icosweep/image.hpp"
#include "icosweep/network.hpp"
#include "icosweep/pipeline.hpp"
#include "test_util.hpp"

using namespace icosweep;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

/// Runs the CLI with `args`, capturing stdout and stderr.
Run cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" ICOSWEEP_CLI_PATH "\" " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  Run r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

/// Value of a `key=value` line in command output.
double value_of(const std::string& out, const std::string& key) {
  std::istringstream in(out);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + "=", 0) == 0) return std::stod(line.substr(key.size() + 1));
  }
  FAIL("missing key " << key << " in output:\n" << out);
  return 0;
}

std::vector<std::string> csv_rows(const std::string& out) {
  std::vector<std::string> rows;
  std::istringstream in(out);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && (std::isdigit(static_cast<unsigned char>(line[0])) || line.rfind("angle,", 0) == 0))
      rows.push_back(line);
  }
  return rows;
}

struct Workspace {
  fs::path dir = testutil::temp_dir("cli");
  fs::path config = dir / "run.cfg";
  Workspace() {
    std::ofstream(config) << "level = 3\nN = 4\nc_feat = 4\nimage_size = 32\nsupersample = 1\n"
                             "train_scenes = 101, 102\nval_scenes = 201\niterations = 4\nval_every = 2\n"
                             "pitches = 0, 45\nweights = w.crwn\n";
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string cfg() const { return "--config \"" + config.string() + "\" "; }
  std::string at(const std::string& name) const { return "\"" + (dir / name).string() + "\""; }
};

}  // namespace

TEST_CASE("cli: usage and configuration errors exit with 2") {
  Workspace w;
  CHECK(cli("--help").code == 0);
  CHECK(cli("").code == 2);
  CHECK(cli("no-such-command").code == 2);
  CHECK(cli("--config /nonexistent/run.cfg train").code == 2);
  std::ofstream(w.dir / "bad.cfg") << "level = 4\nlevle = 5\n";
  const Run bad = cli("--config " + w.at("bad.cfg") + " train");
  CHECK(bad.code == 2);
  CHECK(bad.out.find("line 2") != std::string::npos);
  std::ofstream(w.dir / "low.cfg") << "level = 2\n";
  CHECK(cli("--config " + w.at("low.cfg") + " train").code == 2);
  CHECK(cli(w.cfg() + "export-erp " + w.at("missing.crwn") + " --png " + w.at("x.png")).code != 0);
}

TEST_CASE("cli: render then project") {
  Workspace w;
  const Run r = cli(w.cfg() + "render --scene-seed 7 --out " + w.at("scene"));
  REQUIRE(r.code == 0);
  for (int k = 0; k < 4; ++k) CHECK(fs::exists(w.dir / "scene" / ("cam" + std::to_string(k) + ".png")));
  CHECK(fs::exists(w.dir / "scene" / "rig.txt"));
  CHECK(fs::exists(w.dir / "scene" / "gt_index.crwn"));
  CHECK(read_depth_index((w.dir / "scene" / "gt_index.crwn").string()).level == 1);

  std::string images;
  for (int k = 0; k < 4; ++k) images += w.at("scene/cam" + std::to_string(k) + ".png") + " ";
  const Run p = cli(w.cfg() + "project --rig " + w.at("scene/rig.txt") + " --out " + w.at("ico") + " " + images);
  REQUIRE(p.code == 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(w.dir / "ico")) {
    ++files;
    CHECK(read_ico_image(e.path().string()).level == 3);
  }
  CHECK(files == 4);

  const Run mismatch = cli(w.cfg() + "project --out " + w.at("ico2") + " " + w.at("scene/cam0.png"));
  CHECK(mismatch.code == 2);
  CHECK(cli(w.cfg() + "project --out " + w.at("ico2") + " a.png b.png c.png d.png").code == 2);
}

TEST_CASE("cli: project --verify on constant images") {
  Workspace w;
  std::string images;
  for (int k = 0; k < 4; ++k) {
    Image img(32, 32, 3);
    for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = float(k + 1) / 5.0f;
    const fs::path p = w.dir / ("const" + std::to_string(k) + ".png");
    write_png(p.string(), img);
    images += "\"" + p.string() + "\" ";
  }
  const Run r = cli(w.cfg() + "project --verify --out " + w.at("ico") + " " + images);
  CHECK(r.code == 0);
  std::size_t oks = 0;
  for (std::size_t pos = r.out.find(" OK"); pos != std::string::npos; pos = r.out.find(" OK", pos + 1)) ++oks;
  CHECK(oks == 4);
}

TEST_CASE("cli: zero iterations save the initial weights") {
  Workspace w;
  const Run r = cli(w.cfg() + "--seed 5 train --iterations 0 --weights " + w.at("w0.crwn"));
  REQUIRE(r.code == 0);
  RunConfig cfg = load_config(w.config.string());
  cfg.seed = 5;
  const Context ctx(cfg);
  nn::IcoSweepNet<float> net(ctx.net_config(4), 5);
  save_weights((w.dir / "init.crwn").string(), net.parameters());
  CHECK(slurp(w.dir / "w0.crwn") == slurp(w.dir / "init.crwn"));
}

TEST_CASE("cli: serial training is reproducible and eval matches it") {
  Workspace w;
  const Run a = cli(w.cfg() + "--serial train --weights " + w.at("a.crwn"));
  const Run b = cli(w.cfg() + "--serial train --weights " + w.at("b.crwn"));
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(slurp(w.dir / "a.crwn.log") == slurp(w.dir / "b.crwn.log"));
  CHECK(slurp(w.dir / "a.crwn") == slurp(w.dir / "b.crwn"));
  CHECK(slurp(w.dir / "a.crwn.log").find("iter 3 loss") != std::string::npos);
  CHECK(a.out.find("render") != std::string::npos);  // timing report

  const Run e = cli(w.cfg() + "--serial eval --split train --pitches 0 --weights " + w.at("a.crwn"));
  REQUIRE(e.code == 0);
  const auto rows = csv_rows(e.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "angle,model,gt1,gt3,gt5,mae,rms");
  const double mae = std::stod(rows[1].substr(rows[1].rfind(',', rows[1].rfind(',') - 1) + 1));
  CHECK(std::abs(mae - value_of(a.out, "train_mae")) < 1e-6);

  const Run ev = cli(w.cfg() + "--serial eval --weights " + w.at("a.crwn"));
  REQUIRE(ev.code == 0);
  const auto val_rows = csv_rows(ev.out);
  REQUIRE(val_rows.size() == 3);  // header plus the configured pitches 0 and 45
  const double val_mae = std::stod(val_rows[1].substr(val_rows[1].rfind(',', val_rows[1].rfind(',') - 1) + 1));
  CHECK(std::abs(val_mae - value_of(a.out, "val_mae")) < 1e-6);

  const Run four = cli(w.cfg() + "eval --pitches 0 15 30 45 --csv " + w.at("m.csv") + " --weights " + w.at("a.crwn"));
  REQUIRE(four.code == 0);
  const auto file_rows = csv_rows(slurp(w.dir / "m.csv"));
  REQUIRE(file_rows.size() == 5);
  CHECK(file_rows[4].rfind("45,icosweepnet,", 0) == 0);

  const Run oracle = cli(w.cfg() + "eval --oracle --pitches 0 30");
  REQUIRE(oracle.code == 0);
  const auto orows = csv_rows(oracle.out);
  REQUIRE(orows.size() == 3);
  CHECK(orows[1] == "0,oracle,0.0000,0.0000,0.0000,0.000000,0.000000");
  CHECK(orows[2] == "30,oracle,0.0000,0.0000,0.0000,0.000000,0.000000");
  CHECK(cli(w.cfg() + "eval --pitches 120 --weights " + w.at("a.crwn")).code == 2);
  CHECK(cli(w.cfg() + "eval --weights " + w.at("missing.crwn")).code != 0);

  SUBCASE("infer and export-erp") {
    const Run inf = cli(w.cfg() + "infer --scene-seed 201 --weights " + w.at("a.crwn") + " --out " + w.at("d.crwn"));
    REQUIRE(inf.code == 0);
    const DepthIndexMap d = read_depth_index((w.dir / "d.crwn").string());
    CHECK(d.level == 1);
    CHECK(d.indices.size() == 42);
    CHECK(std::abs(value_of(inf.out, "scene_mae") - val_mae) < 1e-6);
    const Run x = cli(w.cfg() + "export-erp " + w.at("d.crwn") + " --width 64 --height 32 --png " + w.at("d.png") +
                      " --pfm " + w.at("d.pfm"));
    REQUIRE(x.code == 0);
    const Image png = read_png((w.dir / "d.png").string());
    CHECK(png.width == 64);
    CHECK(png.height == 32);
    const Image pfm = read_pfm((w.dir / "d.pfm").string());
    CHECK(pfm.width == 64);
    for (float v : pfm.data) CHECK(v >= 0.55f * 0.999f);
    CHECK(cli(w.cfg() + "export-erp " + w.at("d.crwn")).code == 2);
    CHECK(cli(w.cfg() + "infer --weights " + w.at("a.crwn")).code == 2);
  }
}

TEST_CASE("cli: sweep cache persists under the cache directory") {
  Workspace w;
  const std::string env = "ICOSWEEP_CACHE_DIR=\"" + (w.dir / "cache").string() + "\"";
  const Run first = cli(w.cfg() + "sweep-cache", env);
  REQUIRE(first.code == 0);
  CHECK(first.out.find("source=built") != std::string::npos);
  CHECK(value_of(first.out, "entries") == 4 * 42 * 4);
  const Run second = cli(w.cfg() + "sweep-cache --pitch 30 --out " + w.at("c.swpc"), env);
  REQUIRE(second.code == 0);
  CHECK(second.out.find("source=loaded") != std::string::npos);
  CHECK(fs::exists(w.dir / "c.swpc"));
  const Run none = cli(w.cfg() + "sweep-cache");
  CHECK(none.out.find("source=built") != std::string::npos);
}
