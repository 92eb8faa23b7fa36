#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"

#include "bnvc/error.h"
#include "bnvc/metrics.h"
#include "bdrate_oracle.h"

using namespace bnvc;
using bnvc::testing::oracle_bd_rate;
using bnvc::testing::random_curve;

namespace {

Image filled(int w, int h, std::uint8_t v) {
  Image img(w, h);
  std::fill(img.planes.begin(), img.planes.end(), v);
  return img;
}

Image gradient(int w, int h) {
  Image img(w, h);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) img.at(c, y, x) = static_cast<std::uint8_t>(40 + 3 * x + 5 * y + 20 * c);
  return img;
}

const std::vector<RdPoint> kAnchor = {{0.05, 30.1}, {0.09, 32.4}, {0.16, 34.2}, {0.30, 36.5}, {0.55, 38.0}};

}  // namespace

TEST_CASE("psnr") {
  Image a = gradient(8, 6);
  CHECK(std::isinf(psnr(a, a)));
  CHECK(psnr(a, a) > 0);
  Image b = a;
  for (auto &v : b.planes) v = static_cast<std::uint8_t>(v + 1);
  CHECK(mse_u8(a, b) == 1.0);
  CHECK(psnr(a, b) == doctest::Approx(48.1308).epsilon(1e-6));
  CHECK(psnr(a, b) == doctest::Approx(20 * std::log10(255.0)).epsilon(1e-14));
  CHECK(psnr(filled(4, 4, 0), filled(4, 4, 255)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(psnr(filled(4, 4, 0), filled(4, 8, 0)), UsageError);

  std::mt19937_64 rng(5);
  std::vector<int> noise(a.planes.size());
  for (int &n : noise) n = (rng() & 1) ? 1 : -1;
  double prev = 1e300;
  for (int amp = 1; amp <= 30; ++amp) {
    Image c = a;
    for (std::size_t i = 0; i < c.planes.size(); ++i) c.planes[i] = static_cast<std::uint8_t>(a.planes[i] + amp * noise[i]);
    double p = psnr(a, c);
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("bd-rate closed cases") {
  CHECK(std::abs(bd_rate(kAnchor, kAnchor)) < 1e-9);
  std::vector<RdPoint> doubled = kAnchor;
  for (RdPoint &p : doubled) p.bpp *= 2;
  CHECK(std::abs(bd_rate(kAnchor, doubled) - 100.0) < 1e-6);
  CHECK(std::abs(bd_rate(doubled, kAnchor) + 50.0) < 1e-6);

  std::vector<RdPoint> shuffled = {kAnchor[3], kAnchor[0], kAnchor[4], kAnchor[2], kAnchor[1]};
  CHECK(std::abs(bd_rate(kAnchor, shuffled)) < 1e-9);
}

TEST_CASE("bd-rate against the quadrature oracle") {
  std::mt19937_64 rng(2024);
  int done = 0;
  double worst = 0;
  while (done < 100) {
    int na = 4 + static_cast<int>(rng() % 3), nt = 4 + static_cast<int>(rng() % 3);
    std::vector<RdPoint> a = random_curve(rng, na), t = random_curve(rng, nt);
    double lo = std::max(a.front().psnr, t.front().psnr), hi = std::min(a.back().psnr, t.back().psnr);
    if (!(hi > lo + 0.5)) continue;
    double got = bd_rate(a, t), want = oracle_bd_rate(a, t);
    worst = std::max(worst, std::abs(got - want));
    CHECK(std::abs(got - want) < 1e-6);
    ++done;
  }
  MESSAGE("max |bd_rate - oracle| = " << worst);
}

TEST_CASE("log-rate fit") {
  // Exact cubic data is reproduced.
  std::vector<RdPoint> pts;
  auto f = [](double p) { return -1.5 + 0.1 * (p - 33) + 0.004 * (p - 33) * (p - 33) + 0.0003 * std::pow(p - 33, 3); };
  for (double p : {28.0, 31.0, 33.5, 36.0, 39.0}) pts.push_back({std::pow(10.0, f(p)), p});
  LogRateFit fit = fit_log_rate(pts);
  for (double p = 28; p <= 39; p += 0.5) CHECK(fit(p) == doctest::Approx(f(p)).epsilon(1e-10));
  CHECK(fit.min_psnr == 28.0);
  CHECK(fit.max_psnr == 39.0);
  // Integral against a Simpson rule that is exact for cubics.
  double lo = 29, hi = 37.5;
  double simpson = (hi - lo) / 6 * (fit(lo) + 4 * fit(0.5 * (lo + hi)) + fit(hi));
  CHECK(fit.integral(lo, hi) == doctest::Approx(simpson).epsilon(1e-12));
}

TEST_CASE("bd-rate errors") {
  std::vector<RdPoint> three(kAnchor.begin(), kAnchor.begin() + 3);
  CHECK_THROWS_AS(bd_rate(kAnchor, three), UsageError);
  std::vector<RdPoint> far = kAnchor;
  for (RdPoint &p : far) p.psnr += 20;
  CHECK_THROWS_AS(bd_rate(kAnchor, far), UsageError);
  std::vector<RdPoint> bad = kAnchor;
  bad[1].bpp = 0;
  CHECK_THROWS_AS(bd_rate(kAnchor, bad), UsageError);
  bad = kAnchor;
  bad[2].psnr = NAN;
  CHECK_THROWS_AS(bd_rate(kAnchor, bad), UsageError);
  bad = kAnchor;
  bad[2].bpp = bad[1].bpp;
  CHECK_THROWS_AS(bd_rate(kAnchor, bad), UsageError);
}

TEST_CASE("rd report") {
  SequenceRun s{"a", 1234, 5, 32, 16, {INFINITY, 30.0, 31.0, 32.0, 33.0}};
  LambdaRun one{2, 1024.0, {s}};
  RdReport r = rd_report({one});
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].bpp == doctest::Approx(8.0 * 1234 / (5 * 32 * 16)).epsilon(1e-12));
  CHECK(r.rows[0].psnr == doctest::Approx(31.5));
  CHECK(r.rows[0].lambda == 1024.0);
  CHECK_FALSE(r.bd_rate.has_value());

  std::vector<LambdaRun> runs;
  for (int i = 3; i >= 0; --i) {
    SequenceRun a{"a", static_cast<std::size_t>(500 * (i + 1)), 4, 16, 16, {28.0 + 2 * i, 29.0 + 2 * i}};
    SequenceRun b{"b", static_cast<std::size_t>(700 * (i + 1)), 4, 16, 16, {27.0 + 2 * i, 28.0 + 2 * i}};
    runs.push_back({i, 256.0 * (1 << i), {a, b}});
  }
  RdReport four = rd_report(runs, &runs);
  REQUIRE(four.rows.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(four.rows[i].lambda_index == i);
  CHECK(four.monotone);
  REQUIRE(four.bd_rate.has_value());
  CHECK(std::abs(*four.bd_rate) < 1e-9);
  CHECK(four.rows[1].bpp == doctest::Approx(8.0 * (1000 + 1400) / (8.0 * 256)).epsilon(1e-12));

  std::vector<LambdaRun> bent = runs;
  bent[0].sequences[0].frame_psnr = {20.0, 20.0};
  CHECK_FALSE(rd_report(bent).monotone);

  std::vector<LambdaRun> other = runs;
  other[1].sequences[1].sequence = "c";
  CHECK_THROWS_AS(rd_report(other), UsageError);
  std::vector<LambdaRun> base = runs;
  for (LambdaRun &l : base) l.sequences.pop_back();
  CHECK_THROWS_AS(rd_report(runs, &base), UsageError);

  std::ostringstream csv;
  write_rd_csv(csv, four);
  std::istringstream in(csv.str());
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "lambda_index,lambda,bpp,psnr,bd_rate");
  int rows = 0;
  while (std::getline(in, row)) {
    ++rows;
    CHECK(row.substr(row.rfind(',') + 1) == "0");
  }
  CHECK(rows == 4);

  std::ostringstream table;
  write_rd_table(table, four, "toy");
  CHECK(table.str().find("toy") == 0);
  CHECK(table.str().find("BD-rate") != std::string::npos);
}

TEST_CASE("rd csv reader") {
  std::istringstream in("# produced by a test\nbpp,psnr\n0.1,30\n0.2,32.5\r\n\n0.4,35\n");
  std::vector<RdPoint> pts = read_rd_csv(in);
  REQUIRE(pts.size() == 3);
  CHECK(pts[1].bpp == 0.2);
  CHECK(pts[1].psnr == 32.5);
  std::istringstream bad("0.1,30\nfoo,bar\n");
  CHECK_THROWS_AS(read_rd_csv(bad), UsageError);
  std::istringstream short_row("0.1\n");
  CHECK_THROWS_AS(read_rd_csv(short_row), UsageError);
}
