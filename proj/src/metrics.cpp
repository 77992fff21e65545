#include "nttnn/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace nttnn::metrics {

namespace {

constexpr double kC1 = 0.01 * 0.01;  // (0.01 L)^2 with L = 1
constexpr double kC2 = 0.03 * 0.03;  // (0.03 L)^2

void require_same_dims(const Tensor3& a, const Tensor3& b) {
  if (!(a.dims() == b.dims())) throw std::invalid_argument("metrics: dimension mismatch");
}

template <typename BandFn>
MetricSummary per_band(const Tensor3& x, const Tensor3& x_star, BandFn&& band) {
  require_same_dims(x, x_star);
  MetricSummary out;
  out.per_band.reserve(x.dims().n3);
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < x.dims().n3; ++k) {
    BandValue v = band(x.slice(k), x_star.slice(k));
    if (v.valid) {
      sum += v.value;
      ++used;
    } else {
      ++out.excluded;
    }
    out.per_band.push_back(v);
  }
  out.mean = used > 0 ? sum / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

std::string fixed4(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 4);
  return std::string(buf, res.ptr);
}

}  // namespace

MetricSummary psnr(const Tensor3& x, const Tensor3& x_star) {
  MetricSummary out = per_band(x, x_star, [](const auto& a, const auto& b) {
    const double mse = (a - b).squaredNorm() / static_cast<double>(a.size());
    if (mse == 0.0) return BandValue{std::numeric_limits<double>::infinity(), false};
    const double peak = std::max(a.maxCoeff(), b.maxCoeff());
    return BandValue{10.0 * std::log10(peak * peak / mse), true};
  });
  if (out.excluded == out.per_band.size()) {
    out.infinite = true;
    out.mean = std::numeric_limits<double>::infinity();
  }
  return out;
}

MetricSummary ssim(const Tensor3& x, const Tensor3& x_star) {
  return per_band(x, x_star, [](const auto& a, const auto& b) {
    const double n = static_cast<double>(a.size());
    const double mu_a = a.mean();
    const double mu_b = b.mean();
    const auto da = (a.array() - mu_a);
    const auto db = (b.array() - mu_b);
    const double var_a = da.square().sum() / n;
    const double var_b = db.square().sum() / n;
    const double cov = (da * db).sum() / n;
    const double num = (2.0 * mu_a * mu_b + kC1) * (2.0 * cov + kC2);
    const double den = (mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2);
    return BandValue{num / den, true};
  });
}

MetricSummary sam(const Tensor3& x, const Tensor3& x_star) {
  return per_band(x, x_star, [](const auto& a, const auto& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return BandValue{0.0, false};
    // arccos of the normalized inner product, evaluated as
    // 2 atan2(|u - v|, |u + v|) on the unit vectors to stay accurate near 0.
    const Matrix u = a / na;
    const Matrix v = b / nb;
    return BandValue{2.0 * std::atan2((u - v).norm(), (u + v).norm()), true};
  });
}

QualityReport evaluate(const Tensor3& x, const Tensor3& x_star) {
  return {psnr(x, x_star), ssim(x, x_star), sam(x, x_star)};
}

std::string format_line(const QualityReport& report) {
  const std::string p = report.psnr.infinite ? "inf" : fixed4(report.psnr.mean);
  return "PSNR=" + p + " SSIM=" + fixed4(report.ssim.mean) + " SAM=" + fixed4(report.sam.mean);
}

}  // namespace nttnn::metrics
