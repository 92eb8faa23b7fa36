#ifndef BNVC_METRICS_H_
#define BNVC_METRICS_H_

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bnvc/frame.h"

namespace bnvc {

// 10 log10(255^2 / MSE) over all RGB samples; +infinity for identical images.
double psnr(const Image &a, const Image &b);
double mse_u8(const Image &a, const Image &b);

struct RdPoint {
  double bpp;
  double psnr;
};

// Cubic least-squares fit of log10(bpp) against PSNR. Coefficients are for
// the normalized variable u = (psnr - center) / spread, lowest order first.
struct LogRateFit {
  double center = 0.0;
  double spread = 1.0;
  double coef[4] = {0, 0, 0, 0};
  double min_psnr = 0.0;
  double max_psnr = 0.0;

  double operator()(double psnr) const;
  // Exact integral of the polynomial over [lo, hi] in PSNR units.
  double integral(double lo, double hi) const;
};

// Throws UsageError for fewer than 4 points, non-finite values, bpp <= 0 or
// repeated bpp.
LogRateFit fit_log_rate(const std::vector<RdPoint> &curve);

// Average rate difference of `test` against `anchor` at equal PSNR over the
// common PSNR interval, in percent; negative means `test` saves rate.
// Throws UsageError when the PSNR ranges do not overlap.
double bd_rate(const std::vector<RdPoint> &anchor, const std::vector<RdPoint> &test);

struct SequenceRun {
  std::string sequence;
  std::size_t bytes = 0;   // whole bitstream including header and intra frames
  std::size_t frames = 0;
  int width = 0;
  int height = 0;
  std::vector<double> frame_psnr;
};

struct LambdaRun {
  int lambda_index = 0;
  double lambda = 0.0;
  std::vector<SequenceRun> sequences;
};

struct RdRow {
  int lambda_index;
  double lambda;
  double bpp;   // total bits / total pixels over all sequences
  double psnr;  // mean of finite per-frame PSNR values
};

struct RdReport {
  std::vector<RdRow> rows;  // sorted by bpp
  bool monotone = true;     // PSNR non-decreasing along the sorted rows
  std::optional<double> bd_rate;
};

// Throws UsageError when runs (or the baseline) cover different sequences.
RdReport rd_report(const std::vector<LambdaRun> &runs,
                   const std::vector<LambdaRun> *baseline = nullptr);

void write_rd_csv(std::ostream &out, const RdReport &report);
void write_rd_table(std::ostream &out, const RdReport &report, const std::string &label);

// Reads "bpp,psnr" rows; lines starting with '#' and a header row are
// skipped. Throws UsageError on malformed rows.
std::vector<RdPoint> read_rd_csv(std::istream &in);

}  // namespace bnvc

#endif  // BNVC_METRICS_H_
