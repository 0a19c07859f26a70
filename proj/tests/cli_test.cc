// Copyright 2026 The SPC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "gtest/gtest.h"

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = -1;
  std::string out;
};

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "spc_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(dir_ / "train.cfg")
        << "C=16\nN=4\nlambda=0.001\nlr=0.001\nepochs=2\nseed=3\n"
        << "dataset=" << (dir_ / "data").string() << "\n"
        << "ablation_samples=20\nablation_test_samples=10\n"
        << "ablation_classes=4\nablation_steps=20\n";
    ASSERT_EQ(Run("synth-data --out " + Path("data") +
                  " --count 3 --size 32 --classes 4 --seed 5")
                  .code,
              0);
    ASSERT_EQ(Run("train --config " + Path("train.cfg") + " --out " +
                  Path("m.spm"))
                  .code,
              0);
  }

  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static std::string Path(const std::string& name) {
    return (dir_ / name).string();
  }

  static RunResult Run(const std::string& args) {
    const fs::path log = dir_ / "stdout.txt";
    const std::string cmd =
        std::string(SPC_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = ReadFile(log);
    return r;
  }

  static std::string EncodeArgs(const std::string& scene,
                                const std::string& out) {
    return "encode --model " + Path("m.spm") + " --image " +
           Path("data/" + scene + ".ppm") + " --map " +
           Path("data/" + scene + ".pgm") + " --out " + Path(out);
  }

  static fs::path dir_;
};

fs::path CliTest::dir_;

TEST_F(CliTest, SynthDataWritesPairsDeterministically) {
  EXPECT_TRUE(fs::exists(dir_ / "data/scene_0000.ppm"));
  EXPECT_TRUE(fs::exists(dir_ / "data/scene_0002.pgm"));
  ASSERT_EQ(Run("synth-data --out " + Path("data2") +
                " --count 3 --size 32 --classes 4 --seed 5")
                .code,
            0);
  for (const char* f : {"scene_0000.ppm", "scene_0001.pgm", "scene_0002.ppm"}) {
    EXPECT_EQ(ReadFile(dir_ / "data" / f), ReadFile(dir_ / "data2" / f)) << f;
  }
}

TEST_F(CliTest, TrainIsDeterministic) {
  const RunResult r =
      Run("train --config " + Path("train.cfg") + " --out " + Path("m2.spm"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("epoch 2 loss"), std::string::npos) << r.out;
  EXPECT_EQ(ReadFile(dir_ / "m.spm"), ReadFile(dir_ / "m2.spm"));
}

TEST_F(CliTest, EncodeDecodeInspect) {
  RunResult r = Run(EncodeArgs("scene_0000", "a.spc"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("bpp"), std::string::npos) << r.out;
  ASSERT_EQ(Run(EncodeArgs("scene_0000", "a2.spc")).code, 0);
  EXPECT_EQ(ReadFile(dir_ / "a.spc"), ReadFile(dir_ / "a2.spc"));

  r = Run("decode --model " + Path("m.spm") + " --in " + Path("a.spc") +
          " --out " + Path("a.ppm"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(ReadFile(dir_ / "a.ppm").substr(0, 2), "P6");

  r = Run("inspect --in " + Path("a.spc"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("bpp"), std::string::npos) << r.out;
  r = Run("inspect --in " + Path("a.spc") + " --csv");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find(','), std::string::npos) << r.out;
}

TEST_F(CliTest, DecodeWithSwappedRegion) {
  ASSERT_EQ(Run(EncodeArgs("scene_0000", "s0.spc")).code, 0);
  ASSERT_EQ(Run(EncodeArgs("scene_0001", "s1.spc")).code, 0);
  const std::string base = "decode --model " + Path("m.spm") + " --in " +
                           Path("s0.spc") + " --out ";
  ASSERT_EQ(Run(base + Path("plain.ppm")).code, 0);
  const RunResult r = Run(base + Path("swapped.ppm") +
                          " --swap-region 1 --ref " + Path("s1.spc"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir_ / "swapped.ppm"));
  EXPECT_EQ(Run(base + Path("x.ppm") + " --swap-region 1").code, 1);
}

TEST_F(CliTest, AnalyzeCorrelation) {
  RunResult r = Run("analyze-corr --generator correlated --samples 100 "
                    "--channels 16 --seed 2 --csv " + Path("corr.csv") +
                    " --pgm " + Path("corr.pgm"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("mean_abs_offdiag"), std::string::npos) << r.out;
  EXPECT_EQ(ReadFile(dir_ / "corr.pgm").substr(0, 2), "P5");
  const std::string csv = ReadFile(dir_ / "corr.csv");
  ASSERT_EQ(Run("analyze-corr --generator correlated --samples 100 "
                "--channels 16 --seed 2 --csv " + Path("corr2.csv"))
                .code,
            0);
  EXPECT_EQ(csv, ReadFile(dir_ / "corr2.csv"));

  r = Run("analyze-corr --model " + Path("m.spm") + " --data " + Path("data") +
          " --class 0");
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST_F(CliTest, AblateReportsBothVariants) {
  const RunResult r = Run("ablate --config " + Path("train.cfg"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("hyperprior"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("factorized"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("saving"), std::string::npos) << r.out;
  EXPECT_EQ(Run("ablate --config " + Path("train.cfg")).out, r.out);
}

TEST_F(CliTest, GradcheckPasses) {
  const RunResult r = Run("gradcheck --seed 4");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS"), std::string::npos) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(Run("").code, 1);
  EXPECT_EQ(Run("no-such-command").code, 1);
  EXPECT_EQ(Run("encode --model " + Path("m.spm")).code, 1);
  EXPECT_EQ(Run("synth-data --out " + Path("bad") + " --count x").code, 1);
}

TEST_F(CliTest, DataErrorsExitTwo) {
  std::ofstream(dir_ / "junk.spc") << "not a container";
  EXPECT_EQ(Run("inspect --in " + Path("junk.spc")).code, 2);
  EXPECT_EQ(Run("decode --model " + Path("m.spm") + " --in " +
                Path("junk.spc") + " --out " + Path("j.ppm"))
                .code,
            2);
  EXPECT_EQ(Run("inspect --in " + Path("missing.spc")).code, 2);
  std::ofstream(dir_ / "bad.cfg") << "epochs=zero\n";
  EXPECT_EQ(Run("train --config " + Path("bad.cfg") + " --out " +
                Path("b.spm"))
                .code,
            2);
  EXPECT_EQ(Run("encode --model " + Path("junk.spc") + " --image " +
                Path("data/scene_0000.ppm") + " --map " +
                Path("data/scene_0000.pgm") + " --out " + Path("j.spc"))
                .code,
            2);
}

}  // namespace
