#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nttnn/tensor.hpp"

namespace nttnn::metrics {

struct BandValue {
  double value = 0.0;
  bool valid = true;  // false for bands excluded from the average
};

struct MetricSummary {
  double mean = 0.0;
  bool infinite = false;       // PSNR only: every band was identical
  std::size_t excluded = 0;    // bands left out of the mean
  std::vector<BandValue> per_band;
};

/// Band-averaged PSNR in dB. Per band: 10 log10(MAX^2 / MSE) where MAX is the
/// largest pixel of both bands. Identical bands are excluded.
MetricSummary psnr(const Tensor3& x, const Tensor3& x_star);

/// Band-averaged global (unwindowed) SSIM with L = 1.
MetricSummary ssim(const Tensor3& x, const Tensor3& x_star);

/// Band-averaged spectral angle in radians. Each band is treated as one
/// n1*n2 vector; bands with zero norm are excluded.
MetricSummary sam(const Tensor3& x, const Tensor3& x_star);

struct QualityReport {
  MetricSummary psnr;
  MetricSummary ssim;
  MetricSummary sam;
};

QualityReport evaluate(const Tensor3& x, const Tensor3& x_star);

/// "PSNR=<v> SSIM=<v> SAM=<v>" with four decimals; PSNR prints "inf" when
/// every band was identical.
std::string format_line(const QualityReport& report);

}  // namespace nttnn::metrics
