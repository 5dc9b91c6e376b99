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

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "icosweep/config.hpp"
#include "icosweep/error.hpp"
#include "test_util.hpp"

using namespace icosweep;

namespace {

void expect_parse_error_at(const std::string& text, int line) {
  try {
    parse_config(text);
    FAIL("expected ParseError for: " << text);
  } catch (const ParseError& e) {
    CHECK(e.line() == line);
  }
}

}  // namespace

TEST_CASE("config: defaults describe the overfit experiment") {
  const RunConfig c;
  CHECK(c.level == 4);
  CHECK(c.N == 8);
  CHECK(c.d_min == 0.55);
  CHECK(c.iterations == 500);
  CHECK(c.lr == 1e-3);
  CHECK(c.train_scenes.size() == 4);
  CHECK(c.val_scenes.size() == 2);
  CHECK(c.pitches == std::vector<double>{0, 15, 30, 45});
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config: learning-rate schedule") {
  RunConfig c;
  CHECK(c.lr_at(0) == 1e-3);
  CHECK(c.lr_at(349) == 1e-3);
  CHECK(c.lr_at(350) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(c.lr_at(499) == doctest::Approx(1e-4).epsilon(1e-12));
  c.lr_boundaries = {10, 20};
  c.lr_decay = 0.5;
  CHECK(c.lr_at(15) == doctest::Approx(5e-4));
  CHECK(c.lr_at(20) == doctest::Approx(2.5e-4));
  c.lr_boundaries.clear();
  CHECK(c.lr_at(1000) == 1e-3);
}

TEST_CASE("config: parsing values, lists and comments") {
  const RunConfig c = parse_config(
      "# run\n"
      "level = 5\n"
      "N = 16   # spheres\n"
      "\n"
      "d_min=0.4\n"
      "lr_boundaries = 100, 200\n"
      "train_scenes = 1 2 3\n"
      "val_scenes =\n"
      "pitches = 0, 45\n"
      "seed = 18446744073709551615\n"
      "validity_channel = 1\n"
      "color_jitter = 0.1\n"
      "weights = out/w.crwn\n",
      "/base");
  CHECK(c.level == 5);
  CHECK(c.N == 16);
  CHECK(c.d_min == 0.4);
  CHECK(c.lr_boundaries == std::vector<int>{100, 200});
  CHECK(c.train_scenes == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(c.val_scenes.empty());
  CHECK(c.pitches == std::vector<double>{0, 45});
  CHECK(c.seed == 18446744073709551615ull);
  CHECK(c.validity_channel);
  CHECK(c.color_jitter == 0.1);
  CHECK(c.weights == "out/w.crwn");
  CHECK(c.resolve(c.weights) == (std::filesystem::path("/base") / "out/w.crwn").string());
  CHECK(c.resolve("/abs/x") == "/abs/x");
  CHECK(c.resolve("") == "");
  CHECK(c.iterations == 500);  // untouched keys keep defaults
}

TEST_CASE("config: parse errors carry the line") {
  expect_parse_error_at("level = 4\nlevle = 5\n", 2);
  expect_parse_error_at("level = four\n", 1);
  expect_parse_error_at("\n\nN = 8 9\n", 3);
  expect_parse_error_at("pitches = 0, x\n", 1);
  expect_parse_error_at("# c\nlevel 4\n", 2);
}

TEST_CASE("config: validation") {
  auto invalid = [](auto mutate) {
    RunConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), ValidationError);
  };
  invalid([](RunConfig& c) { c.level = 2; });
  invalid([](RunConfig& c) { c.N = 1; });
  invalid([](RunConfig& c) { c.d_min = 0; });
  invalid([](RunConfig& c) { c.eps = -1; });
  invalid([](RunConfig& c) { c.lr = 0; });
  invalid([](RunConfig& c) { c.iterations = -1; });
  invalid([](RunConfig& c) { c.fov = 400; });
  invalid([](RunConfig& c) { c.image_size = 8; });
  invalid([](RunConfig& c) { c.supersample = 0; });
  invalid([](RunConfig& c) { c.train_scenes.clear(); });
  invalid([](RunConfig& c) { c.pitches = {0, 120}; });
  invalid([](RunConfig& c) { c.rig = "/nonexistent/rig.txt"; });
  invalid([](RunConfig& c) { c.color_jitter = -0.1; });
  invalid([](RunConfig& c) { c.color_jitter = 1.0; });
  RunConfig ok;
  ok.level = 3;
  ok.N = 2;
  ok.iterations = 0;
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("config: format round trip and file loading") {
  RunConfig c;
  c.level = 6;
  c.N = 32;
  c.d_min = 0.55;
  c.lr = 3e-4;
  c.lr_boundaries = {7, 9};
  c.train_scenes = {5, 6};
  c.val_scenes = {};
  c.pitches = {0, 22.5};
  c.rig = "rig.txt";
  c.validity_channel = true;
  c.color_jitter = 0.05;
  const std::string text = format_config(c);
  const RunConfig r = parse_config(text);
  CHECK(format_config(r) == text);
  CHECK(r.lr == c.lr);
  CHECK(r.pitches == c.pitches);
  CHECK(r.val_scenes.empty());
  CHECK(r.rig == "rig.txt");

  const auto dir = testutil::temp_dir("config");
  std::ofstream((dir / "run.cfg").string()) << "N = 12\nweights = w.crwn\n";
  const RunConfig f = load_config((dir / "run.cfg").string());
  CHECK(f.N == 12);
  CHECK(f.base_dir == dir.string());
  CHECK(f.resolve(f.weights) == (dir / "w.crwn").string());
  CHECK_THROWS(load_config((dir / "missing.cfg").string()));
  std::filesystem::remove_all(dir);
}
