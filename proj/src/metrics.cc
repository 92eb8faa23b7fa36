#include "bnvc/metrics.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "bnvc/error.h"

namespace bnvc {

double mse_u8(const Image &a, const Image &b) {
  if (a.width != b.width || a.height != b.height) throw UsageError("psnr: image sizes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.planes.size(); ++i) {
    double d = static_cast<double>(a.planes[i]) - b.planes[i];
    s += d * d;
  }
  return s / static_cast<double>(a.planes.size());
}

double psnr(const Image &a, const Image &b) {
  const double m = mse_u8(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / m);
}

double LogRateFit::operator()(double psnr) const {
  const double u = (psnr - center) / spread;
  return coef[0] + u * (coef[1] + u * (coef[2] + u * coef[3]));
}

double LogRateFit::integral(double lo, double hi) const {
  auto anti = [&](double x) {
    const double u = (x - center) / spread;
    return u * (coef[0] + u * (coef[1] / 2 + u * (coef[2] / 3 + u * coef[3] / 4)));
  };
  return spread * (anti(hi) - anti(lo));
}

LogRateFit fit_log_rate(const std::vector<RdPoint> &curve) {
  if (curve.size() < 4) throw UsageError("BD-rate needs at least 4 points per curve");
  std::vector<RdPoint> pts = curve;
  for (const RdPoint &p : pts) {
    if (!std::isfinite(p.bpp) || !std::isfinite(p.psnr) || p.bpp <= 0.0) {
      throw UsageError("RD points need finite PSNR and positive bpp");
    }
  }
  std::sort(pts.begin(), pts.end(), [](const RdPoint &a, const RdPoint &b) { return a.bpp < b.bpp; });
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (!(pts[i].bpp > pts[i - 1].bpp)) throw UsageError("RD curve has repeated bpp values");
  }
  LogRateFit fit;
  double mean = 0.0;
  fit.min_psnr = fit.max_psnr = pts[0].psnr;
  for (const RdPoint &p : pts) {
    mean += p.psnr;
    fit.min_psnr = std::min(fit.min_psnr, p.psnr);
    fit.max_psnr = std::max(fit.max_psnr, p.psnr);
  }
  mean /= pts.size();
  fit.center = mean;
  fit.spread = std::max(0.5 * (fit.max_psnr - fit.min_psnr), 1e-12);
  Eigen::MatrixXd A(pts.size(), 4);
  Eigen::VectorXd y(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double u = (pts[i].psnr - fit.center) / fit.spread;
    A(i, 0) = 1.0;
    A(i, 1) = u;
    A(i, 2) = u * u;
    A(i, 3) = u * u * u;
    y(i) = std::log10(pts[i].bpp);
  }
  Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
  for (int k = 0; k < 4; ++k) fit.coef[k] = c(k);
  return fit;
}

double bd_rate(const std::vector<RdPoint> &anchor, const std::vector<RdPoint> &test) {
  LogRateFit fa = fit_log_rate(anchor), ft = fit_log_rate(test);
  const double lo = std::max(fa.min_psnr, ft.min_psnr);
  const double hi = std::min(fa.max_psnr, ft.max_psnr);
  if (!(hi > lo)) throw UsageError("BD-rate: PSNR ranges do not overlap");
  const double delta = (ft.integral(lo, hi) - fa.integral(lo, hi)) / (hi - lo);
  return (std::pow(10.0, delta) - 1.0) * 100.0;
}

namespace {

std::set<std::string> sequence_set(const LambdaRun &run) {
  std::set<std::string> s;
  for (const SequenceRun &q : run.sequences) s.insert(q.sequence);
  return s;
}

std::vector<RdRow> aggregate(const std::vector<LambdaRun> &runs, const std::set<std::string> &names) {
  std::vector<RdRow> rows;
  for (const LambdaRun &run : runs) {
    if (sequence_set(run) != names || run.sequences.size() != names.size()) {
      throw UsageError("rd_report: runs cover different sequence sets");
    }
    double bits = 0.0, pixels = 0.0, psnr_sum = 0.0;
    std::size_t psnr_n = 0;
    for (const SequenceRun &q : run.sequences) {
      bits += 8.0 * q.bytes;
      pixels += static_cast<double>(q.frames) * q.width * q.height;
      for (double p : q.frame_psnr) {
        if (std::isfinite(p)) {
          psnr_sum += p;
          ++psnr_n;
        }
      }
    }
    if (pixels <= 0.0) throw UsageError("rd_report: run without pixels");
    const double mean =
        psnr_n ? psnr_sum / psnr_n : std::numeric_limits<double>::infinity();
    rows.push_back({run.lambda_index, run.lambda, bits / pixels, mean});
  }
  std::sort(rows.begin(), rows.end(), [](const RdRow &a, const RdRow &b) { return a.bpp < b.bpp; });
  return rows;
}

std::vector<RdPoint> points(const std::vector<RdRow> &rows) {
  std::vector<RdPoint> p;
  for (const RdRow &r : rows) p.push_back({r.bpp, r.psnr});
  return p;
}

}  // namespace

RdReport rd_report(const std::vector<LambdaRun> &runs, const std::vector<LambdaRun> *baseline) {
  RdReport rep;
  if (runs.empty()) return rep;
  const std::set<std::string> names = sequence_set(runs[0]);
  rep.rows = aggregate(runs, names);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    if (rep.rows[i].psnr < rep.rows[i - 1].psnr) rep.monotone = false;
  }
  if (baseline != nullptr) {
    if (baseline->empty()) throw UsageError("rd_report: empty baseline");
    std::vector<RdRow> base = aggregate(*baseline, names);
    if (rep.rows.size() >= 4 && base.size() >= 4) rep.bd_rate = bd_rate(points(base), points(rep.rows));
  }
  return rep;
}

void write_rd_csv(std::ostream &out, const RdReport &report) {
  std::ostringstream s;
  s << std::setprecision(17);
  s << "lambda_index,lambda,bpp,psnr,bd_rate\n";
  for (const RdRow &r : report.rows) {
    s << r.lambda_index << ',' << r.lambda << ',' << r.bpp << ',' << r.psnr << ',';
    if (report.bd_rate) s << *report.bd_rate;
    s << '\n';
  }
  out << s.str();
}

void write_rd_table(std::ostream &out, const RdReport &report, const std::string &label) {
  std::ostringstream s;
  s << std::fixed;
  s << label << '\n';
  s << std::setw(8) << "lambda" << std::setw(12) << "bpp" << std::setw(12) << "PSNR(dB)" << '\n';
  for (const RdRow &r : report.rows) {
    s << std::setw(8) << std::setprecision(0) << r.lambda << std::setw(12) << std::setprecision(4)
      << r.bpp << std::setw(12) << std::setprecision(3) << r.psnr << '\n';
  }
  if (report.bd_rate) s << "BD-rate vs baseline: " << std::setprecision(3) << *report.bd_rate << " %\n";
  if (!report.monotone) s << "warning: PSNR is not monotone in bpp\n";
  out << s.str();
}

std::vector<RdPoint> read_rd_csv(std::istream &in) {
  std::vector<RdPoint> pts;
  std::string line;
  bool header_seen = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string a, b;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',')) {
      throw UsageError("RD csv line " + std::to_string(lineno) + ": expected bpp,psnr");
    }
    char *end = nullptr;
    double bpp = std::strtod(a.c_str(), &end);
    bool ok = end != a.c_str() && *end == '\0';
    double ps = std::strtod(b.c_str(), &end);
    ok = ok && end != b.c_str() && *end == '\0';
    if (!ok) {
      if (!header_seen && pts.empty()) {
        header_seen = true;
        continue;
      }
      throw UsageError("RD csv line " + std::to_string(lineno) + ": not numeric");
    }
    pts.push_back({bpp, ps});
  }
  return pts;
}

}  // namespace bnvc
