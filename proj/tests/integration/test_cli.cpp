#include "pcreg/cli.hpp"
#include "pcreg/records.hpp"

#include <pcreg/io.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pcreg::cli {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out, err;
};

Run pcreg(std::vector<std::string> args) {
  args.insert(args.begin(), "pcreg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) { return read_file_text(p); }

std::size_t count_lines(const std::string& s) { return std::size_t(std::count(s.begin(), s.end(), '\n')); }

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pcreg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string p(const std::string& rel) const { return (dir_ / rel).string(); }

  fs::path dir_;
};

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(pcreg({}).code, kUsage);
  EXPECT_EQ(pcreg({"register", "--sampler", "bogus"}).code, kUsage);
  EXPECT_EQ(pcreg({"frobnicate"}).code, kUsage);
  EXPECT_EQ(pcreg({"--help"}).code, kOk);
}

TEST_F(Cli, IdentityPairRegistersExactly) {
  ASSERT_EQ(pcreg({"synth", "scene", "--out-dir", p("s"), "--identity", "--points", "400", "--seed", "1"}).code, kOk);
  const auto r = pcreg({"register", "--src-cloud", p("s/clouds/scene0000/000000.bin"), "--dst-cloud",
                        p("s/clouds/scene0000/000001.bin"), "--src-desc", p("s/desc/scene0000/000000.fdsc"),
                        "--dst-desc", p("s/desc/scene0000/000001.fdsc"), "--filter", "none", "--sampler",
                        "uniform", "--gt", p("gt.txt")});
  // Ground truth file does not exist yet: a data error naming it.
  EXPECT_EQ(r.code, kDataError);
  EXPECT_NE(r.err.find("gt.txt"), std::string::npos) << r.err;

  write_file(p("gt.txt"), "1 0 0 0 0 1 0 0 0 0 1 0\n");
  const auto ok = pcreg({"register", "--src-cloud", p("s/clouds/scene0000/000000.bin"), "--dst-cloud",
                         p("s/clouds/scene0000/000001.bin"), "--src-desc", p("s/desc/scene0000/000000.fdsc"),
                         "--dst-desc", p("s/desc/scene0000/000001.fdsc"), "--filter", "none", "--sampler",
                         "uniform", "--gt", p("gt.txt")});
  ASSERT_EQ(ok.code, kOk) << ok.err;
  const auto rec = parse_record(ok.out.substr(0, ok.out.find('\n')), "out", 1);
  ASSERT_TRUE(rec.coarse.success);
  EXPECT_TRUE(*rec.coarse.success);
  EXPECT_LT(*rec.coarse.re_deg, 0.5);
  EXPECT_LT(*rec.coarse.te_m, 0.1);
  EXPECT_TRUE(rec.coarse.wall_time.has_value());
}

TEST_F(Cli, MissingDescriptorNamesPath) {
  ASSERT_EQ(pcreg({"synth", "scene", "--out-dir", p("s"), "--count", "2", "--points", "200"}).code, kOk);
  fs::remove(p("s/desc/scene0001/000001.fdsc"));
  const auto r = pcreg({"register", "--pairs", p("s/pairs.csv"), "--cloud-dir", p("s/clouds"), "--desc-dir",
                        p("s/desc"), "--out", p("r.jsonl")});
  EXPECT_EQ(r.code, kDataError);
  EXPECT_NE(r.err.find("scene0001/000001.fdsc"), std::string::npos) << r.err;
  // The other pair still has its record.
  const auto recs = parse_records(slurp(p("r.jsonl")), "r");
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].sequence_id, "scene0000");
}

TEST_F(Cli, PairListRunIsByteDeterministicWithTimingOff) {
  ASSERT_EQ(pcreg({"synth", "scene", "--out-dir", p("s"), "--count", "3", "--points", "300",
                   "--inlier-fraction", "0.4", "--seed", "9"}).code, kOk);
  const std::vector<std::string> base{"register", "--pairs", p("s/pairs.csv"), "--cloud-dir", p("s/clouds"),
                                      "--desc-dir", p("s/desc"), "--timing", "off", "--refine", "icp"};
  auto a = base, b = base, c = base;
  a.insert(a.end(), {"--out", p("a.jsonl")});
  b.insert(b.end(), {"--out", p("b.jsonl"), "--threads", "3"});
  ASSERT_EQ(pcreg(a).code, kOk);
  ASSERT_EQ(pcreg(b).code, kOk);
  EXPECT_EQ(slurp(p("a.jsonl")), slurp(p("b.jsonl")));
  const auto recs = parse_records(slurp(p("a.jsonl")), "a");
  ASSERT_EQ(recs.size(), 3u);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "scene%04zu", i);
    EXPECT_EQ(recs[i].sequence_id, id);
    EXPECT_FALSE(recs[i].coarse.wall_time.has_value());
    ASSERT_TRUE(recs[i].refined.has_value());
    EXPECT_TRUE(*recs[i].refined->success);
  }
  // The executable produces the same bytes.
  const std::string cmd = std::string(PCREG_EXE) + " register --pairs " + p("s/pairs.csv") + " --cloud-dir " +
                          p("s/clouds") + " --desc-dir " + p("s/desc") + " --timing off --refine icp > " +
                          p("exe.jsonl");
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_EQ(slurp(p("exe.jsonl")), slurp(p("a.jsonl")));
}

TEST_F(Cli, ConfigFilePrecedence) {
  ASSERT_EQ(pcreg({"synth", "scene", "--out-dir", p("s"), "--points", "500", "--inlier-fraction", "0.3"}).code, kOk);
  write_file(p("run.ini"), "max-iters=1\nsampler=uniform\ntiming=off\n");
  const std::vector<std::string> base{"register", "--config", p("run.ini"), "--pairs", p("s/pairs.csv"),
                                      "--cloud-dir", p("s/clouds"), "--desc-dir", p("s/desc")};
  auto r = pcreg(base);
  ASSERT_EQ(r.code, kOk) << r.err;
  auto rec = parse_record(r.out.substr(0, r.out.find('\n')), "o", 1);
  EXPECT_EQ(rec.coarse.iterations, 1u);
  EXPECT_FALSE(rec.coarse.wall_time.has_value());

  auto with_flag = base;
  with_flag.insert(with_flag.end(), {"--max-iters", "3"});
  r = pcreg(with_flag);
  ASSERT_EQ(r.code, kOk) << r.err;
  rec = parse_record(r.out.substr(0, r.out.find('\n')), "o", 1);
  EXPECT_EQ(rec.coarse.iterations, 3u);
  EXPECT_EQ(rec.coarse.status, "iteration_cap");
}

TEST_F(Cli, MalformedPoseFileNamesLine) {
  fs::create_directories(p("poses"));
  write_file(p("poses/00.txt"), "1 0 0 0 0 1 0 0 0 0 1 0\n1 0 0 0 0 1 0 0 0 0 1\n");
  const auto r = pcreg({"benchgen", "--poses-dir", p("poses"), "--clouds-dir", p("clouds")});
  EXPECT_EQ(r.code, kDataError);
  EXPECT_NE(r.err.find("00.txt:2"), std::string::npos) << r.err;
}

class Bench : public Cli {
protected:
  void make_trajectories() {
    const auto r = pcreg({"synth", "trajectory", "--out-dir", p("t"), "--sequences", "4", "--frames", "50",
                          "--density", "0.05", "--seed", "4"});
    ASSERT_EQ(r.code, kOk) << r.err;
  }
  std::vector<std::string> bench(std::vector<std::string> extra) {
    std::vector<std::string> a{"benchgen", "--poses-dir", p("t/poses"), "--times-dir", p("t/times"),
                               "--clouds-dir", p("t/clouds"), "--k", "1", "--radius", "0.5"};
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  }
};

TEST_F(Bench, SelectsRequestedPairsDeterministically) {
  make_trajectories();
  auto r = pcreg(bench({"--count", "100", "--out", p("a.csv"), "--dist-dir", p("dist"), "--seed", "2"}));
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto pairs = read_pair_list(p("a.csv"));
  ASSERT_EQ(pairs.size(), 100u);
  for (const auto& pr : pairs) EXPECT_GT(pr.overlap, 0.2);
  ASSERT_EQ(pcreg(bench({"--count", "100", "--out", p("b.csv"), "--seed", "2", "--threads", "2"})).code, kOk);
  EXPECT_EQ(slurp(p("a.csv")), slurp(p("b.csv")));

  for (const char* name : {"distance", "dt", "overlap", "roll", "pitch", "yaw"}) {
    const std::string csv = slurp(dir_ / "dist" / ("dist_" + std::string(name) + ".csv"));
    ASSERT_EQ(csv.substr(0, csv.find('\n')), "bin_lo,bin_hi,count");
    std::istringstream in(csv.substr(csv.find('\n') + 1));
    std::string line;
    std::size_t total = 0;
    while (std::getline(in, line)) total += std::stoul(line.substr(line.rfind(',') + 1));
    EXPECT_EQ(total, 100u) << name;
  }
}

TEST_F(Bench, SplitWritesDisjointFiles) {
  make_trajectories();
  auto r = pcreg(bench({"--count", "60", "--out", p("set.csv"), "--split", "0.5,0.25,0.25"}));
  ASSERT_EQ(r.code, kOk) << r.err;
  std::set<std::string> seen;
  std::size_t total = 0;
  for (const char* part : {"train", "val", "test"}) {
    const auto pairs = read_pair_list(p(std::string("set_") + part + ".csv"));
    std::set<std::string> mine;
    for (const auto& pr : pairs) mine.insert(pr.sequence_id);
    for (const auto& s : mine) EXPECT_TRUE(seen.insert(s).second) << s << " in two splits";
    total += pairs.size();
  }
  EXPECT_EQ(total, 60u);
}

TEST_F(Bench, EmptyPoolFails) {
  const auto r0 = pcreg({"synth", "trajectory", "--out-dir", p("t"), "--frames", "10", "--spacing", "40",
                         "--density", "0.02"});
  ASSERT_EQ(r0.code, kOk);
  const auto r = pcreg({"benchgen", "--poses-dir", p("t/poses"), "--clouds-dir", p("t/clouds"), "--min-overlap",
                        "0.99", "--k", "1"});
  EXPECT_NE(r.code, kOk);
  EXPECT_EQ(r.code, kNoResult);
  EXPECT_NE(r.err.find("pool empty"), std::string::npos) << r.err;
}

ResultRecord record(bool success, bool with_overlap, double value) {
  ResultRecord r;
  r.sequence_id = "s";
  if (with_overlap) r.overlap = value;
  r.dt = 1.0;
  r.distance = 10.0 * value;
  r.roll = r.pitch = 0.0;
  r.yaw = 5.0;
  r.coarse.re_deg = success ? 1.0 : 20.0;
  r.coarse.te_m = 0.1;
  r.coarse.success = success;
  r.coarse.wall_time = 0.5;
  r.coarse.status = "early_stop";
  return r;
}

TEST_F(Cli, EvalRecallAndHistograms) {
  std::string jsonl;
  for (int i = 0; i < 100; ++i) jsonl += to_json_line(record(i < 89, true, 0.2 + 0.008 * i)) + "\n";
  write_file(p("r.jsonl"), jsonl);
  const auto r = pcreg({"eval", "--in", p("r.jsonl"), "--out-dir", p("h")});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("recall=0.8900"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("pairs=100"), std::string::npos);
  EXPECT_NE(r.out.find("mean_wall_time=0.500000"), std::string::npos);

  const std::string csv = slurp(dir_ / "h" / "failure_overlap.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "bin_lo,bin_hi,success,failure,failure_ratio");
  EXPECT_EQ(count_lines(csv), 17u);
  std::istringstream in(csv.substr(csv.find('\n') + 1));
  std::string line;
  std::size_t s = 0, f = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cols.push_back(c);
    s += std::stoul(cols[2]);
    f += std::stoul(cols[3]);
  }
  EXPECT_EQ(s, 89u);
  EXPECT_EQ(f, 11u);
}

TEST_F(Cli, EvalWarnsOnMissingField) {
  std::string jsonl;
  for (int i = 0; i < 10; ++i) jsonl += to_json_line(record(true, i % 2 == 0, 0.5)) + "\n";
  write_file(p("r.jsonl"), jsonl);
  const auto r = pcreg({"eval", "--in", p("r.jsonl"), "--out-dir", p("h")});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.err.find("overlap histogram omitted"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "h" / "failure_overlap.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "h" / "failure_distance.csv"));
}

TEST_F(Cli, EvalEmptyInput) {
  write_file(p("r.jsonl"), "");
  EXPECT_EQ(pcreg({"eval", "--in", p("r.jsonl")}).code, kDataError);
  write_file(p("bad.jsonl"), "{\"sequence_id\": 3\n");
  const auto r = pcreg({"eval", "--in", p("bad.jsonl")});
  EXPECT_EQ(r.code, kDataError);
  EXPECT_NE(r.err.find("bad.jsonl"), std::string::npos) << r.err;
}

TEST_F(Cli, FullPipelineThroughExecutable) {
  const std::string exe = PCREG_EXE;
  ASSERT_EQ(std::system((exe + " synth scene --out-dir " + p("s") + " --count 3 --points 300 --seed 5").c_str()), 0);
  ASSERT_EQ(std::system((exe + " register --pairs " + p("s/pairs.csv") + " --cloud-dir " + p("s/clouds") +
                         " --desc-dir " + p("s/desc") + " --filter gpf --gpf 2.0 --sampler prosac --reject elc" +
                         " --lo on --out " + p("r.jsonl"))
                            .c_str()),
            0);
  ASSERT_EQ(std::system((exe + " eval --in " + p("r.jsonl") + " > " + p("e.txt")).c_str()), 0);
  EXPECT_NE(slurp(p("e.txt")).find("recall=1.0000"), std::string::npos);
}

}  // namespace
}  // namespace pcreg::cli
