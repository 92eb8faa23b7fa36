// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bnvc/bitstream.h"
#include "bnvc/butterfly.h"
#include "bnvc/codec.h"
#include "bnvc/entropy.h"
#include "bnvc/error.h"
#include "bnvc/grad_suite.h"
#include "bnvc/loss_model.h"
#include "bnvc/metrics.h"
#include "bnvc/synth.h"
#include "bnvc/train.h"
#include "bdrate_oracle.h"
#include "test_util.h"

using namespace bnvc;
using bnvc::testing::oracle_bd_rate;
using bnvc::testing::random_curve;
using bnvc::testing::random_tensor;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char *f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char *f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

std::vector<double> steps(double lo, double step, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo + step * i);
  return v;
}

// ---- 1: recurrence against the four-frame formulas, transcribed directly.

struct Verbatim {
  double L[4];
  double total_sum;
  double total_expanded;
};

Verbatim verbatim_further(double a, double b, double L1) {
  Verbatim v;
  double L1f = L1;
  double L2f = 4 * L1f * (1 - b) / 4 * (1 + a);
  double L3f = (3 * L1f * (1 - std::pow(b, 2)) + L2f * (1 - b)) / 4 * (1 + a);
  double L4f = (2 * L1f * (1 - std::pow(b, 3)) + L2f * (1 - std::pow(b, 2)) + L3f * (1 - b)) / 4 * (1 + a);
  v.L[0] = L1f, v.L[1] = L2f, v.L[2] = L3f, v.L[3] = L4f;
  v.total_sum = L1f + L2f + L3f + L4f;
  v.total_expanded =
      L1 * (1 + (1 - b) * (1 + a) + 3 * (1 - std::pow(b, 2)) * (1 + a) / 4 +
            std::pow(1 - b, 2) * std::pow(1 + a, 2) / 4 + 2 * (1 - std::pow(b, 3)) * (1 + a) / 4 +
            (1 - b) * (1 - std::pow(b, 2)) * std::pow(1 + a, 2) / 4 +
            3 * (1 - b) * (1 - std::pow(b, 2)) * std::pow(1 + a, 2) / 16 +
            std::pow(1 - b, 3) * std::pow(1 + a, 3) / 16);
  return v;
}

Verbatim verbatim_near(double a, double b, double L1) {
  Verbatim v;
  double L1n = L1;
  double L2n = 4 * L1n * (1 - b) / 4 * (1 + a);
  double L3n = (L1n * (1 - std::pow(b, 2)) + 3 * L2n * (1 - b)) / 4 * (1 + a);
  double L4n = (L1n * (1 - std::pow(b, 3)) + L2n * (1 - std::pow(b, 2)) + 2 * L3n * (1 - b)) / 4 * (1 + a);
  v.L[0] = L1n, v.L[1] = L2n, v.L[2] = L3n, v.L[3] = L4n;
  v.total_sum = L1n + L2n + L3n + L4n;
  v.total_expanded =
      L1 * (1 + (1 - b) * (1 + a) + (1 - std::pow(b, 2)) * (1 + a) / 4 +
            3 * std::pow(1 - b, 2) * std::pow(1 + a, 2) / 4 + (1 - std::pow(b, 3)) * (1 + a) / 4 +
            (1 - b) * (1 - std::pow(b, 2)) * std::pow(1 + a, 2) / 4 +
            (1 - b) * (1 - std::pow(b, 2)) * std::pow(1 + a, 2) / 8 +
            3 * std::pow(1 - b, 3) * std::pow(1 + a, 3) / 8);
  return v;
}

TotalLoss recurrence(double a, double b, DuplicationPolicy policy) {
  LossModelParams p;
  p.alpha = a;
  p.beta = b;
  p.policy = policy;
  return total_loss(p);
}

Outcome criterion1() {
  auto t0 = Clock::now();
  double worst = 0;
  int values = 0;
  for (double b : steps(0.05, 0.05, 19)) {
    for (double a : steps(0.05, 0.05, 19)) {
      for (DuplicationPolicy pol : {DuplicationPolicy::kNear, DuplicationPolicy::kFurther}) {
        TotalLoss r = recurrence(a, b, pol);
        Verbatim v = pol == DuplicationPolicy::kNear ? verbatim_near(a, b, 1.0) : verbatim_further(a, b, 1.0);
        auto rel = [](double x, double y) { return std::abs(x - y) / std::max(1e-300, std::abs(y)); };
        for (int k = 0; k < 4; ++k, ++values) worst = std::max(worst, rel(r.per_frame[k], v.L[k]));
        worst = std::max(worst, rel(r.total, v.total_sum));
        worst = std::max(worst, rel(r.total, v.total_expanded));
        values += 2;
      }
    }
  }
  double dt = seconds_since(t0);
  return {worst <= 1e-12 && dt < 1.0,
          fmt("19x19 grid, %d values, max rel err %.2e (tol 1e-12), %.3f s", values, worst, dt)};
}

// ---- 2: NEAR versus FURTHER on the 99x99 grid.

Outcome criterion2() {
  std::vector<double> g = steps(0.01, 0.01, 99);
  std::vector<PolicyCell> cells = policy_compare_grid(g, g);
  int near_ok = 0, strict_ok = 0, n = 0;
  double worst_gap = 0, worst_a = 0, worst_b = 0;
  for (const PolicyCell &c : cells) {
    ++n;
    if (c.total_near <= c.total_further) ++near_ok;
    if (c.total_near < c.total_further) ++strict_ok;
    if (c.total_further - c.total_near < worst_gap) {
      worst_gap = c.total_further - c.total_near;
      worst_a = c.alpha;
      worst_b = c.beta;
    }
  }
  const double spot_near = recurrence(0.5, 0.5, DuplicationPolicy::kNear).total;
  const double spot_further = recurrence(0.5, 0.5, DuplicationPolicy::kFurther).total;
  const bool spots = std::abs(spot_near - 3.255859) <= 1e-6 && std::abs(spot_further - 3.786133) <= 1e-6;

  int disagree = 0;
  for (const PolicyCell &c : cells) {
    if (c.agrees) continue;
    if (disagree++ < 5) {
      std::printf("  threshold disagreement: alpha=%.2f beta=%.2f gap=%.6f threshold=%.6f\n", c.alpha, c.beta,
                  c.gap, c.threshold);
    }
  }
  if (disagree > 5) std::printf("  ... %d threshold disagreements in total\n", disagree);
  return {near_ok == n && strict_ok == n && spots,
          fmt("near<=further at %d/%d points (strict %d), largest violation %.6f at alpha=%.2f beta=%.2f; "
              "spot %.6f vs %.6f (%s); threshold agreement %.4f",
              near_ok, n, strict_ok, -worst_gap, worst_a, worst_b, spot_near, spot_further,
              spots ? "match" : "MISMATCH", agreement_fraction(cells))};
}

// ---- 3: entropy coder round trips.

Outcome criterion3() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mean(-6.0, 6.0), logs(-4.0, 4.0);
  std::vector<QuantizedCdf> pool;
  for (int i = 0; i < 512; ++i) {
    if (i % 2) {
      pool.push_back(build_gaussian_cdf({mean(rng), std::exp(logs(rng))}));
    } else {
      pool.push_back(build_logistic_cdf({mean(rng), std::exp(logs(rng))}));
    }
  }
  std::vector<std::vector<std::uint32_t>> cums;
  for (const QuantizedCdf &c : pool) {
    cums.emplace_back();
    for (int i = 1; i <= c.symbol_count(); ++i) cums.back().push_back(c.cum(i));
  }
  int exact = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  std::size_t total_symbols = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t n = trial == 0 ? 100000 : std::uniform_int_distribution<std::size_t>(0, 100000)(rng);
    std::vector<int> symbols(n);
    std::vector<std::uint32_t> which(n);
    long double ideal = 0;
    RangeEncoder enc;
    for (std::size_t i = 0; i < n; ++i) {
      which[i] = static_cast<std::uint32_t>(rng() % pool.size());
      const QuantizedCdf &c = pool[which[i]];
      std::uint32_t r = static_cast<std::uint32_t>(rng() % kCdfTotal);
      const auto &cum = cums[which[i]];
      symbols[i] = c.s_min() + static_cast<int>(std::upper_bound(cum.begin(), cum.end(), r) - cum.begin());
      ideal -= std::log2(static_cast<long double>(c.freq(symbols[i])) / kCdfTotal);
      enc.encode(symbols[i], c);
    }
    std::vector<std::uint8_t> bytes = enc.finish();
    RangeDecoder dec(bytes);
    bool same = true;
    for (std::size_t i = 0; i < n && same; ++i) same = dec.decode(pool[which[i]]) == symbols[i];
    if (same) {
      dec.finish();
      ++exact;
    }
    worst_excess = std::max(worst_excess, 8.0 * bytes.size() - static_cast<double>(ideal));
    total_symbols += n;
  }
  double dt = seconds_since(t0);
  return {exact == 1000 && worst_excess <= 64.0 && dt < 30.0,
          fmt("%d/1000 bit-exact, %zu symbols, worst payload - ideal = %.1f bits (limit 64), %.1f s", exact,
              total_symbols, worst_excess, dt)};
}

// ---- 4: drift-free coding and corruption detection.

bool bit_equal(const Tensor &a, const Tensor &b) {
  return a.shape() == b.shape() && std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(double)) == 0;
}

bool same_frame(const Frame &a, const Frame &b) {
  if (a.index != b.index || !(a.pixels == b.pixels)) return false;
  if (a.feature.has_value() != b.feature.has_value()) return false;
  if (a.feature && !bit_equal(*a.feature, *b.feature)) return false;
  if (a.flow.has_value() != b.flow.has_value()) return false;
  return !a.flow || bit_equal(*a.flow, *b.flow);
}

Outcome criterion4() {
  auto t0 = Clock::now();
  SynthConfig sc;
  sc.width = sc.height = 32;
  sc.frames = 16;
  int streams = 0, identical = 0;
  std::size_t flips = 0, detected = 0, crashes = 0;
  for (int li = 0; li < 4; ++li) {
    Model model = Model::seeded(ModelConfig::toy(), 40 + li, li);
    for (int s = 0; s < 10; ++s) {
      std::vector<Image> seq = generate_sequence(sc, 400 + 10 * li + s);
      CodingSettings cs;
      cs.policy = (s % 2) ? DuplicationPolicy::kFurther : DuplicationPolicy::kNear;
      EncodeResult enc = encode_sequence(seq, model, cs);
      std::vector<Frame> dec = decode_sequence(enc.bytes, model);
      ++streams;
      bool same = dec.size() == enc.recon.size();
      for (std::size_t t = 0; same && t < dec.size(); ++t) same = same_frame(dec[t], enc.recon[t]);
      if (same) ++identical;
      std::vector<std::uint8_t> bad = enc.bytes;
      for (std::size_t i = 0; i < bad.size(); ++i) {
        const std::uint8_t mask = std::array<std::uint8_t, 3>{0x01, 0x80, 0xFF}[i % 3];
        bad[i] ^= mask;
        ++flips;
        try {
          decode_sequence(bad, model);
        } catch (const CorruptionError &) {
          ++detected;
        } catch (...) {
          ++crashes;
        }
        bad[i] ^= mask;
      }
    }
  }
  double dt = seconds_since(t0);
  return {identical == streams && detected == flips && dt < 120.0,
          fmt("%d/%d streams bit-identical; %zu/%zu single-byte corruptions detected, %zu other failures; %.1f s",
              identical, streams, detected, flips, crashes, dt)};
}

// ---- 5: gradient suite.

Outcome criterion5() {
  auto t0 = Clock::now();
  std::vector<GradSuiteEntry> entries = run_grad_suite({});
  int passed = 0;
  double worst = 0;
  for (const GradSuiteEntry &e : entries) {
    if (e.report.pass) {
      ++passed;
    } else {
      std::printf("  grad check failed: %s: %s\n", e.name.c_str(), e.report.failure.c_str());
    }
    worst = std::max(worst, e.report.max_rel_err);
  }
  double dt = seconds_since(t0);
  return {passed == static_cast<int>(entries.size()) && dt < 120.0,
          fmt("%d/%zu checks pass (ops 1e-4, pipeline 1e-3), max rel err %.2e, %.1f s", passed, entries.size(),
              worst, dt)};
}

// ---- 6: non-obliteration and downsampling independence.

Outcome criterion6() {
  const Widths w;
  double min_sens = std::numeric_limits<double>::infinity();
  int sensitive = 0, probes = 0, indep_ok = 0, indep_total = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ParamStore store(600 + seed);
    std::vector<Tensor> refs;
    for (int j = 0; j < 4; ++j) refs.push_back(random_tensor({w.at(0), 16, 16}, 700 + 10 * seed + j));
    for (int j = 0; j < 4; ++j) {
      double s = occlusion_sensitivity(store, refs, j, FusionMode::kButterfly, w);
      min_sens = std::min(min_sens, s);
      ++probes;
      if (s > 1e-8) ++sensitive;
    }
    auto pyramids = [&](const std::vector<Tensor> &in) {
      Graph g(Graph::Mode::kInference);
      Binder b(g, store, false);
      std::vector<std::array<Tensor, 3>> out;
      for (int j = 0; j < 4; ++j) {
        FeaturePyramid p = downsample_stage(b, g.input(in[j]), j, w);
        out.push_back({p.levels[0].value(), p.levels[1].value(), p.levels[2].value()});
      }
      return out;
    };
    auto base = pyramids(refs);
    for (int i = 0; i < 4; ++i) {
      std::vector<Tensor> moved = refs;
      for (int c = 0; c < w.at(0); ++c)
        for (int y = 6; y < 10; ++y)
          for (int x = 6; x < 10; ++x) moved[i].at(c, y, x) += 1.0;
      auto pert = pyramids(moved);
      for (int j = 0; j < 4; ++j) {
        if (j == i) continue;
        ++indep_total;
        if (bit_equal(base[j][0], pert[j][0]) && bit_equal(base[j][1], pert[j][1]) &&
            bit_equal(base[j][2], pert[j][2])) {
          ++indep_ok;
        }
      }
    }
  }
  return {sensitive == probes && indep_ok == indep_total,
          fmt("5 seeds x 4 references: %d/%d sensitivities > 1e-8 (min %.3e); %d/%d other-frame pyramids "
              "bit-unchanged",
              sensitive, probes, min_sens, indep_ok, indep_total)};
}

// ---- 7: toy training direction checks.

constexpr int kToySteps = 2000;
constexpr double kEvalLambda = 1024.0;

SynthConfig occlusion_suite() {
  SynthConfig sc;
  sc.width = sc.height = 16;
  sc.frames = 20;
  sc.occlusion = true;
  return sc;
}

struct HeldOut {
  double objective = 0;
  double mse[4] = {0, 0, 0, 0};
  double bpp[4] = {0, 0, 0, 0};
};

// Mean over I + 4P windows starting at every fourth frame.
HeldOut evaluate_held_out(const Model &m, const std::vector<std::vector<Image>> &seqs, DuplicationPolicy pol) {
  HeldOut h;
  int n = 0;
  for (const auto &q : seqs) {
    for (std::size_t s = 0; s + 4 < q.size(); s += 4) {
      std::vector<Image> win(q.begin() + s, q.begin() + s + 5);
      RolloutEval e = evaluate_rollout(m, win, pol, kEvalLambda);
      for (int k = 0; k < 4; ++k) {
        h.mse[k] += e.mse[k];
        h.bpp[k] += e.bpp[k];
      }
      h.objective += e.objective;
      ++n;
    }
  }
  for (int k = 0; k < 4; ++k) {
    h.mse[k] /= n;
    h.bpp[k] /= n;
  }
  h.objective /= n;
  return h;
}

std::vector<Outcome> criterion7() {
  auto t0 = Clock::now();
  const auto train = generate_dataset(occlusion_suite(), 16, 1);
  const auto held = generate_dataset(occlusion_suite(), 8, 99);

  TrainConfig tc;
  tc.steps = kToySteps;
  tc.lambda_index = 2;
  tc.model.n_ref = 4;
  TrainResult four = train_toy(tc, train);
  tc.model.n_ref = 1;
  TrainResult one = train_toy(tc, train);

  const double first = smoothed_loss(four.log, false), last = smoothed_loss(four.log, true);
  const double drop = 1.0 - last / first;

  HeldOut h4 = evaluate_held_out(four.model, held, DuplicationPolicy::kNear);
  HeldOut h1 = evaluate_held_out(one.model, held, DuplicationPolicy::kNear);
  HeldOut hf = evaluate_held_out(four.model, held, DuplicationPolicy::kFurther);
  const double d_near = (h4.mse[0] + h4.mse[1] + h4.mse[2]) / 3;
  const double d_further = (hf.mse[0] + hf.mse[1] + hf.mse[2]) / 3;
  const double dt = seconds_since(t0);

  std::printf("  n_ref=4 near   :");
  for (int k = 0; k < 4; ++k) std::printf(" P%d mse %.5f bpp %.3f", k + 1, h4.mse[k], h4.bpp[k]);
  std::printf("\n  n_ref=4 further:");
  for (int k = 0; k < 4; ++k) std::printf(" P%d mse %.5f bpp %.3f", k + 1, hf.mse[k], hf.bpp[k]);
  std::printf("\n  n_ref=1        :");
  for (int k = 0; k < 4; ++k) std::printf(" P%d mse %.5f bpp %.3f", k + 1, h1.mse[k], h1.bpp[k]);
  std::printf("\n");

  const bool budget = dt < 1800.0;
  return {
      {drop >= 0.30 && budget, fmt("(a) lambda=1024, %d steps: smoothed loss %.3f -> %.3f (%.1f%% reduction)",
                                   kToySteps, first, last, 100 * drop)},
      {h4.objective < h1.objective && budget,
       fmt("(b) held-out lambda*D+R: n_ref=4 butterfly %.3f vs n_ref=1 %.3f", h4.objective, h1.objective)},
      {d_near <= d_further && budget,
       fmt("(c) mean P1-P3 mse near %.6f vs further %.6f; training and evaluation %.0f s", d_near, d_further,
           dt)},
  };
}

// ---- 8: BD-rate arithmetic.

Outcome criterion8() {
  const std::vector<RdPoint> anchor = {{0.05, 30.1}, {0.09, 32.4}, {0.16, 34.2}, {0.30, 36.5}, {0.55, 38.0}};
  std::vector<RdPoint> doubled = anchor;
  for (RdPoint &p : doubled) p.bpp *= 2;
  const double same = bd_rate(anchor, anchor), twice = bd_rate(anchor, doubled);

  std::mt19937_64 rng(88);
  int done = 0;
  double worst = 0;
  while (done < 100) {
    int na = 4 + static_cast<int>(rng() % 3), nt = 4 + static_cast<int>(rng() % 3);
    std::vector<RdPoint> a = random_curve(rng, na), t = random_curve(rng, nt);
    double lo = std::max(a.front().psnr, t.front().psnr), hi = std::min(a.back().psnr, t.back().psnr);
    if (!(hi > lo + 0.5)) continue;
    worst = std::max(worst, std::abs(bd_rate(a, t) - oracle_bd_rate(a, t)));
    ++done;
  }
  return {std::abs(same) < 1e-9 && std::abs(twice - 100.0) <= 1e-6 && worst <= 1e-6,
          fmt("identical %.2e, doubled %.9f%%, 100 pairs max |diff| vs quadrature %.2e", same, twice, worst)};
}

// ---- 9: fusion-mode ablation at toy scale.

constexpr int kAblationSteps = 150;

struct Suite {
  const char *name;
  SynthConfig config;
};

Outcome criterion9(const std::string &csv_path) {
  auto t0 = Clock::now();
  std::vector<Suite> suites;
  SynthConfig base;
  base.width = base.height = 16;
  base.frames = 10;
  suites.push_back({"moving", base});
  base.occlusion = true;
  suites.push_back({"occlusion", base});
  base.occlusion = false;
  base.objects = 4;
  suites.push_back({"busy", base});

  SynthConfig train_cfg = occlusion_suite();
  train_cfg.frames = 12;
  const auto train = generate_dataset(train_cfg, 8, 5);
  const FusionMode modes[3] = {FusionMode::kButterfly, FusionMode::kTogether, FusionMode::kIndependent};

  // curves[mode][suite] over the four rate points
  std::vector<std::vector<std::vector<RdPoint>>> curves(3, std::vector<std::vector<RdPoint>>(suites.size()));
  int coded = 0, drift_free = 0;
  std::string error;
  try {
    for (int m = 0; m < 3; ++m) {
      for (int li = 0; li < 4; ++li) {
        TrainConfig tc;
        tc.steps = kAblationSteps;
        tc.lambda_index = li;
        tc.model.fusion = modes[m];
        Model model = train_toy(tc, train).model;
        for (std::size_t s = 0; s < suites.size(); ++s) {
          double bits = 0, mse_sum = 0;
          std::size_t pframes = 0;
          for (const auto &seq : generate_dataset(suites[s].config, 4, 900 + s)) {
            CodingSettings cs;
            cs.intra_period = 5;
            EncodeResult enc = encode_sequence(seq, model, cs);
            std::vector<Frame> dec = decode_sequence(enc.bytes, model);
            ++coded;
            bool same = dec.size() == enc.recon.size();
            for (std::size_t t = 0; same && t < dec.size(); ++t) same = same_frame(dec[t], enc.recon[t]);
            if (same) ++drift_free;
            for (std::size_t t = 0; t < seq.size(); ++t) {
              if (enc.stream.records[t].type != FrameRecord::Type::kInter) continue;
              bits += 8.0 * record_size(enc.stream.records[t]);
              mse_sum += mse_u8(dec[t].pixels, seq[t]);
              ++pframes;
            }
          }
          curves[m][s].push_back({bits / (pframes * 256.0), 10 * std::log10(255.0 * 255.0 * pframes / mse_sum)});
        }
      }
    }
  } catch (const std::exception &e) {
    error = e.what();
  }

  std::ostringstream csv;
  csv << "fusion";
  for (const Suite &s : suites) csv << "," << s.name;
  csv << ",average\n";
  if (error.empty()) {
    for (int m = 0; m < 3; ++m) {
      csv << to_string(modes[m]);
      double sum = 0;
      int n = 0;
      for (std::size_t s = 0; s < suites.size(); ++s) {
        double v = std::numeric_limits<double>::quiet_NaN();
        try {
          v = bd_rate(curves[0][s], curves[m][s]);
          sum += v;
          ++n;
        } catch (const UsageError &) {
        }
        csv << "," << fmt("%.2f", v);
      }
      csv << "," << fmt("%.2f", n ? sum / n : std::numeric_limits<double>::quiet_NaN()) << "\n";
    }
  }
  std::ofstream(csv_path) << csv.str();
  std::istringstream lines(csv.str());
  for (std::string line; std::getline(lines, line);) std::printf("  %s\n", line.c_str());
  const double dt = seconds_since(t0);
  return {error.empty() && drift_free == coded && coded == 3 * 4 * 3 * 4,
          error.empty() ? fmt("3 modes x 4 lambdas trained %d steps, %d/%d streams drift-free, BD-rate vs butterfly "
                              "in %s, %.0f s",
                              kAblationSteps, drift_free, coded, csv_path.c_str(), dt)
                        : "error: " + error};
}

}  // namespace

int main(int argc, char **argv) {
  const std::string csv_path = argc > 1 ? argv[1] : "fusion_ablation.csv";
  int failed = 0;
  auto report = [&](const std::string &label, const Outcome &o) {
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", label.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  };
  auto guarded = [&](const std::string &label, const std::function<Outcome()> &fn) {
    try {
      report(label, fn());
    } catch (const std::exception &e) {
      report(label, {false, std::string("exception: ") + e.what()});
    }
  };
  guarded("1", criterion1);
  guarded("2", criterion2);
  guarded("3", criterion3);
  guarded("4", criterion4);
  guarded("5", criterion5);
  guarded("6", criterion6);
  try {
    std::vector<Outcome> seven = criterion7();
    report("7a", seven[0]);
    report("7b", seven[1]);
    report("7c", seven[2]);
  } catch (const std::exception &e) {
    report("7", {false, std::string("exception: ") + e.what()});
  }
  guarded("8", criterion8);
  guarded("9", [&] { return criterion9(csv_path); });
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
