#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "bnvc/cli.h"
#include "bnvc/codec.h"
#include "bnvc/frame_io.h"
#include "bnvc/synth.h"

using namespace bnvc;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(const std::vector<std::string> &args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("bnvc_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string &name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
  static inline int counter_ = 0;
};

std::string slurp(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

void put(const std::string &path, const std::string &text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("loss-model prints totals and threshold") {
  Result r = run({"loss-model", "--alpha", "0.5", "--beta", "0.5"});
  CHECK(r.code == 0);
  CHECK(r.out.find("near_total 3.255859") != std::string::npos);
  CHECK(r.out.find("further_total 3.786132") != std::string::npos);
  CHECK(r.out.find("threshold 2.6303") != std::string::npos);
  CHECK(r.out.find("critical_alpha none") != std::string::npos);

  Result bad = run({"loss-model", "--alpha", "0.5", "--beta", "1.5"});
  CHECK(bad.code == 1);
}

TEST_CASE("loss-model grid csv is reproducible and carries provenance") {
  TempDir d;
  Result a = run({"loss-model", "--grid", "5", "-o", d / "a.csv"});
  REQUIRE(a.code == 0);
  std::string text = slurp(d / "a.csv");
  Result b = run({"loss-model", "--grid", "5", "-o", d / "a.csv"});
  REQUIRE(b.code == 0);
  CHECK(text == slurp(d / "a.csv"));
  CHECK(text.rfind("# bnvc loss-model {", 0) == 0);
  CHECK(text.find("\nalpha,beta,total_near,total_further,g,threshold,agrees\n") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2 + 25);
  CHECK(a.err.find("agreement") != std::string::npos);
  CHECK(a.out.empty());
}

TEST_CASE("usage errors exit with 1 and print usage") {
  Result r = run({"loss-model", "--bogus"});
  CHECK(r.code == 1);
  CHECK(r.err.find("Usage:") != std::string::npos);
  CHECK(run({}).code == 1);
  CHECK(run({"nonsense"}).code == 1);
  CHECK(run({"--policy", "sideways", "loss-model"}).code == 1);
  CHECK(run({"--lambda-index", "4", "loss-model"}).code == 1);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("bdrate of a curve against itself is zero") {
  TempDir d;
  put(d / "a.csv", "# anchor\nbpp,psnr\n0.1,30\n0.2,32\n0.4,34\n0.8,35.5\n");
  Result r = run({"bdrate", "--anchor", d / "a.csv", "--test", d / "a.csv"});
  CHECK(r.code == 0);
  CHECK(r.out == "0.000000\n");
  put(d / "b.csv", "bpp,psnr\n0.2,30\n0.4,32\n0.8,34\n1.6,35.5\n");
  Result dbl = run({"bdrate", "--anchor", d / "a.csv", "--test", d / "b.csv"});
  CHECK(dbl.out == "100.000000\n");
  CHECK(run({"bdrate", "--anchor", d / "missing.csv", "--test", d / "a.csv"}).code == 2);
  put(d / "short.csv", "0.1,30\n0.2,31\n");
  CHECK(run({"bdrate", "--anchor", d / "short.csv", "--test", d / "a.csv"}).code == 1);
}

TEST_CASE("gen-synth and roundtrip-check") {
  TempDir d;
  REQUIRE(run({"--seed", "4", "gen-synth", "-o", d / "seq", "--width", "16", "--height", "16", "--frames", "6",
               "--occlusion"})
              .code == 0);
  std::vector<Image> seq = read_sequence(d / "seq");
  CHECK(seq.size() == 6);
  SynthConfig sc;
  sc.width = sc.height = 16;
  sc.frames = 6;
  sc.occlusion = true;
  CHECK(seq == generate_sequence(sc, 4));

  Result r = run({"roundtrip-check", "-i", d / "seq", "--model", "toy", "--intra-period", "4"});
  CHECK(r.code == 0);
  CHECK(r.out == "OK, drift-free, 6 frames\n");
  Result far = run({"roundtrip-check", "-i", d / "seq", "--model", "toy", "--policy", "further", "--nref", "2"});
  CHECK(far.out == "OK, drift-free, 6 frames\n");

  REQUIRE(run({"gen-synth", "-o", d / "many", "--width", "16", "--height", "16", "--frames", "2", "--count", "3"})
              .code == 0);
  CHECK(fs::is_directory(d / "many/seq_002"));
  CHECK(run({"roundtrip-check", "-i", d / "nothing"}).code == 2);
}

TEST_CASE("encode then decode reproduces the encoder reconstruction") {
  TempDir d;
  REQUIRE(run({"gen-synth", "-o", d / "s.rgb", "--width", "16", "--height", "16", "--frames", "4"}).code == 0);
  std::vector<std::string> common = {"--model", "toy", "--seed", "9", "--policy", "further"};
  auto with = [&](std::vector<std::string> v) {
    v.insert(v.begin(), common.begin(), common.end());
    return run(v);
  };
  Result e = with({"encode", "-i", d / "s.rgb", "-o", d / "a.bnvc", "--recon", d / "rec.rgb"});
  REQUIRE(e.code == 0);
  CHECK(e.err.find("bpp") != std::string::npos);
  REQUIRE(with({"encode", "-i", d / "s.rgb", "-o", d / "b.bnvc"}).code == 0);
  CHECK(slurp(d / "a.bnvc") == slurp(d / "b.bnvc"));

  REQUIRE(with({"decode", "-i", d / "a.bnvc", "-o", d / "dec.rgb"}).code == 0);
  CHECK(read_sequence(d / "dec.rgb") == read_sequence(d / "rec.rgb"));

  // Different seed means different weights: refused as a data error.
  CHECK(run({"--model", "toy", "--seed", "10", "decode", "-i", d / "a.bnvc", "-o", d / "x.rgb"}).code == 2);
  // Policy named on the command line must match the stream.
  CHECK(run({"--model", "toy", "--seed", "9", "--policy", "near", "decode", "-i", d / "a.bnvc", "-o", d / "x.rgb"})
            .code == 2);

  std::string bytes = slurp(d / "a.bnvc");
  bytes[bytes.size() / 2] ^= 0x10;
  put(d / "bad.bnvc", bytes);
  Result c = with({"decode", "-i", d / "bad.bnvc", "-o", d / "y.rgb"});
  CHECK(c.code == 2);
  CHECK(c.err.find("error:") == 0);
}

TEST_CASE("config file with flags taking precedence") {
  TempDir d;
  put(d / "c.json", R"({"loss-model.alpha": 0.1, "loss-model": {"beta": 0.1}, "nref": 4})");
  Result r = run({"--config", d / "c.json", "loss-model"});
  CHECK(r.code == 0);
  CHECK(r.out.find("near_total 4.0402") != std::string::npos);
  Result o = run({"--config", d / "c.json", "loss-model", "--alpha", "0.5", "--beta", "0.5"});
  CHECK(o.out.find("near_total 3.255859") != std::string::npos);

  put(d / "bad.json", R"({"loss-model.gamma": 1})");
  CHECK(run({"--config", d / "bad.json", "loss-model"}).code == 1);
  put(d / "broken.json", "{not json");
  CHECK(run({"--config", d / "broken.json", "loss-model"}).code == 1);
}

TEST_CASE("train-toy writes loadable weights and a log") {
  TempDir d;
  Result r = run({"--nref", "2", "--seed", "3", "train-toy", "-o", d / "w.bin", "--steps", "2", "--size", "16",
                  "--frames", "6", "--sequences", "2", "--rollout", "2", "--log", d / "log.csv"});
  REQUIRE(r.code == 0);
  Model m = Model::load(d / "w.bin");
  CHECK(m.config.n_ref == 2);
  CHECK(m.lambda_index == 2);
  std::string log = slurp(d / "log.csv");
  CHECK(log.rfind("# bnvc train-toy", 0) == 0);
  CHECK(log.find("\nstep,loss,bpp,mse\n0,") != std::string::npos);

  REQUIRE(run({"gen-synth", "-o", d / "seq", "--width", "16", "--height", "16", "--frames", "3"}).code == 0);
  CHECK(run({"roundtrip-check", "-i", d / "seq", "-w", d / "w.bin"}).out == "OK, drift-free, 3 frames\n");
  CHECK(run({"--nref", "3", "roundtrip-check", "-i", d / "seq", "-w", d / "w.bin"}).code == 1);
}

TEST_CASE("report tabulates every rate point") {
  TempDir d;
  REQUIRE(run({"gen-synth", "-o", d / "seq", "--width", "16", "--height", "16", "--frames", "3"}).code == 0);
  Result r = run({"--model", "toy", "report", "-i", d / "seq", "-o", d / "rd.csv", "--baseline-policy", "near"});
  REQUIRE(r.code == 0);
  std::string csv = slurp(d / "rd.csv");
  CHECK(csv.rfind("# bnvc report", 0) == 0);
  CHECK(csv.find("\nlambda_index,lambda,bpp,psnr,bd_rate\n") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  CHECK(r.out.find("PSNR") != std::string::npos);
}

TEST_CASE("grad-check op suite") {
  Result r = run({"grad-check", "--seeds", "1", "--ops-only"});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("warp_bilinear") != std::string::npos);
}
