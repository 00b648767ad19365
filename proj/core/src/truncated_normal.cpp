#include "smm/truncated_normal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace smm {
namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kSqrtPi = 1.7724538509055160273;

// phi(x) / Q(x), the standard normal hazard, for x >= 0.
double hazard(double x) { return std::sqrt(2.0 / std::numbers::pi) / erfcx(x / kSqrt2); }

UnitIntervalMoments reflect(const UnitIntervalMoments& m) {
  return {m.log_integral, 1.0 - m.mean, 1.0 - 2.0 * m.mean + m.second_moment};
}

UnitIntervalMoments finish(double log_integral, double mean, double variance) {
  mean = std::clamp(mean, 0.0, 1.0);
  variance = std::max(variance, 0.0);
  const double second = std::clamp(variance + mean * mean, mean * mean, mean);
  return {log_integral, mean, second};
}

constexpr int kCurvatureTerms = 24;
constexpr int kRawMoments = 2 * kCurvatureTerms + 1;
using RawMoments = std::array<double, kRawMoments>;

// E[t^k] under the density proportional to exp(slope t) on [0, 1], slope <= 2.
RawMoments exponential_raw_moments(double slope) {
  RawMoments m{};
  if (slope >= -2.0) {
    RawMoments sums{};
    double term = 1.0;
    for (int j = 0; j < 60; ++j) {
      for (int k = 0; k < kRawMoments; ++k) sums[static_cast<std::size_t>(k)] += term / (j + k + 1);
      term *= slope / (j + 1);
    }
    for (int k = 0; k < kRawMoments; ++k) m[static_cast<std::size_t>(k)] = sums[static_cast<std::size_t>(k)] / sums[0];
    return m;
  }
  const double b = -slope;
  RawMoments j{};
  if (b > 80.0) {
    // int_0^1 t^k e^{-b t} dt = (k J_{k-1} - e^{-b}) / b
    const double tail = std::exp(-b);
    j[0] = -std::expm1(-b) / b;
    for (int k = 1; k < kRawMoments; ++k)
      j[static_cast<std::size_t>(k)] = (k * j[static_cast<std::size_t>(k - 1)] - tail) / b;
  } else {
    // e^b J_k = sum_i b^i k! / (k + i + 1)!
    for (int k = 0; k < kRawMoments; ++k) {
      double term = 1.0 / (k + 1), sum = 0.0;
      for (int i = 0; i < 400 && (i < b || term > 1e-18 * sum); ++i) {
        sum += term;
        term *= b / (k + i + 2);
      }
      j[static_cast<std::size_t>(k)] = sum;
    }
  }
  for (int k = 0; k < kRawMoments; ++k) m[static_cast<std::size_t>(k)] = j[static_cast<std::size_t>(k)] / j[0];
  return m;
}

}  // namespace

double erfcx(double x) {
  if (x < 25.0) return std::exp(x * x) * std::erfc(x);
  const double inv2 = 1.0 / (x * x);
  const double series = 1.0 - 0.5 * inv2 * (1.0 - 1.5 * inv2 * (1.0 - 2.5 * inv2 * (1.0 - 3.5 * inv2)));
  return series / (x * kSqrtPi);
}

UnitIntervalMoments exponential_on_unit_interval(double slope) {
  if (slope < 0.0) {
    auto m = reflect(exponential_on_unit_interval(-slope));
    m.log_integral += slope;
    return m;
  }
  if (slope <= 2.0) {
    // int_0^1 t^k e^{a t} dt = sum_j a^j / (j! (k + j + 1))
    double term = 1.0;
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (int j = 0; j < 40; ++j) {
      m0 += term / (j + 1);
      m1 += term / (j + 2);
      m2 += term / (j + 3);
      term *= slope / (j + 1);
    }
    return {std::log(m0), m1 / m0, m2 / m0};
  }
  const double tail = -std::expm1(-slope);  // 1 - e^{-a}
  const double mean = 1.0 / tail - 1.0 / slope;
  const double second = (slope * slope - 2.0 * slope + 2.0 - 2.0 * std::exp(-slope)) / (slope * slope * tail);
  return {slope + std::log(tail) - std::log(slope), mean, second};
}

UnitIntervalMoments weakly_curved_on_unit_interval(double slope, double precision) {
  const double h = 0.5 * precision;
  if (slope > h) {
    // t -> 1 - t keeps the curvature and maps the slope to precision - slope.
    auto m = reflect(weakly_curved_on_unit_interval(precision - slope, precision));
    m.log_integral += slope - h;
    return m;
  }
  const auto base = exponential_on_unit_interval(slope);
  const auto raw = exponential_raw_moments(slope);
  // exp(-h t^2) = sum_j (-h)^j t^{2j} / j!
  double c = 1.0, m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (int j = 0; j < kCurvatureTerms; ++j) {
    m0 += c * raw[static_cast<std::size_t>(2 * j)];
    m1 += c * raw[static_cast<std::size_t>(2 * j + 1)];
    if (2 * j + 2 < kRawMoments) m2 += c * raw[static_cast<std::size_t>(2 * j + 2)];
    c *= -h / (j + 1);
  }
  return {base.log_integral + std::log(m0), m1 / m0, m2 / m0};
}

UnitIntervalMoments gaussian_on_unit_interval(double center, double precision) {
  if (center > 0.5) {
    return reflect(gaussian_on_unit_interval(1.0 - center, precision));
  }
  const double root = std::sqrt(precision);
  const double tau = 1.0 / root;
  const double alpha = -center * root;       // standardized lower bound
  const double beta = (1.0 - center) * root;  // standardized upper bound, > 0
  const double log_scale = std::log(tau) + 0.5 * std::log(2.0 * std::numbers::pi);

  double log_z = 0.0;
  double lambda1 = 0.0;  // (phi(alpha) - phi(beta)) / Z
  double lambda2 = 0.0;  // (alpha phi(alpha) - beta phi(beta)) / Z
  if (alpha >= 0.0) {
    // Both bounds in the upper tail: work relative to Q(alpha).
    const double gap = root * (alpha + beta);  // beta^2 - alpha^2
    const double phi_ratio = std::exp(-0.5 * gap);
    const double q_ratio = phi_ratio * erfcx(beta / kSqrt2) / erfcx(alpha / kSqrt2);
    const double h = hazard(alpha);
    const double log_q_alpha = std::log(0.5 * erfcx(alpha / kSqrt2)) - 0.5 * alpha * alpha;
    log_z = log_q_alpha + std::log1p(-q_ratio);
    lambda1 = h * (1.0 - phi_ratio) / (1.0 - q_ratio);
    lambda2 = h * (alpha - beta * phi_ratio) / (1.0 - q_ratio);
  } else {
    const double z = 0.5 * (std::erf(beta / kSqrt2) - std::erf(alpha / kSqrt2));
    const double phi_a = std::exp(-0.5 * alpha * alpha) / std::sqrt(2.0 * std::numbers::pi);
    const double phi_b = std::exp(-0.5 * beta * beta) / std::sqrt(2.0 * std::numbers::pi);
    log_z = std::log(z);
    lambda1 = (phi_a - phi_b) / z;
    lambda2 = (alpha * phi_a - beta * phi_b) / z;
  }
  const double mean = center + tau * lambda1;
  const double variance = tau * tau * (1.0 + lambda2 - lambda1 * lambda1);
  return finish(log_scale + log_z, mean, variance);
}

}  // namespace smm
