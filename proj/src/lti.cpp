#include "qft/lti.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "qft/error.hpp"

namespace qft {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
  case ErrorKind::PoleOnAxis: return "PoleOnAxis";
  case ErrorKind::ZeroMagnitude: return "ZeroMagnitude";
  case ErrorKind::CriticalPoint: return "CriticalPoint";
  case ErrorKind::InvalidM: return "InvalidM";
  case ErrorKind::InvalidTransferFunction: return "InvalidTransferFunction";
  case ErrorKind::SyntaxError: return "SyntaxError";
  case ErrorKind::UnknownParameter: return "UnknownParameter";
  case ErrorKind::NonFiniteValue: return "NonFiniteValue";
  case ErrorKind::OutOfBox: return "OutOfBox";
  case ErrorKind::TemplateTooWide: return "TemplateTooWide";
  case ErrorKind::DegenerateSpread: return "DegenerateSpread";
  case ErrorKind::GridMismatch: return "GridMismatch";
  case ErrorKind::BoundBelowUContour: return "BoundBelowUContour";
  case ErrorKind::UnstableModel: return "UnstableModel";
  case ErrorKind::ZeroController: return "ZeroController";
  case ErrorKind::EmptyWindow: return "EmptyWindow";
  case ErrorKind::RankDeficient: return "RankDeficient";
  case ErrorKind::NegativeMappedGain: return "NegativeMappedGain";
  case ErrorKind::NoFeasiblePoint: return "NoFeasiblePoint";
  case ErrorKind::InvalidArgument: return "InvalidArgument";
  case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Polynomial poly_multiply(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  Polynomial out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Complex poly_eval(std::span<const double> coeffs, Complex s) {
  Complex acc{0.0, 0.0};
  for (double c : coeffs) acc = acc * s + c;
  return acc;
}

int poly_degree(std::span<const double> coeffs) {
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    if (coeffs[i] != 0.0) return static_cast<int>(coeffs.size() - i - 1);
  return -1;
}

bool is_hurwitz(std::span<const double> coeffs) {
  const int degree = poly_degree(coeffs);
  if (degree < 0) return false;
  std::vector<double> p(coeffs.end() - degree - 1, coeffs.end());
  if (p.front() < 0)
    for (double& c : p) c = -c;
  for (double c : p)
    if (c <= 0.0) return false;
  if (degree <= 1) return true;

  // Routh array, two rows at a time.
  std::vector<double> upper, lower;
  for (std::size_t i = 0; i < p.size(); i += 2) upper.push_back(p[i]);
  for (std::size_t i = 1; i < p.size(); i += 2) lower.push_back(p[i]);
  for (int row = 0; row < degree; ++row) {
    if (lower.empty() || lower.front() <= 0.0) return false;
    std::vector<double> next;
    for (std::size_t i = 0; i + 1 < upper.size(); ++i) {
      const double b = i + 1 < lower.size() ? lower[i + 1] : 0.0;
      next.push_back((lower.front() * upper[i + 1] - upper.front() * b) / lower.front());
    }
    upper = std::move(lower);
    lower = std::move(next);
    if (lower.empty()) break;
  }
  return true;
}

RationalTransferFunction::RationalTransferFunction(Polynomial numerator, Polynomial denominator)
    : numerator_(std::move(numerator)), denominator_(std::move(denominator)) {
  if (denominator_.empty() || denominator_.front() == 0.0)
    throw Error(ErrorKind::InvalidTransferFunction,
                "denominator must be non-empty with a nonzero leading coefficient");
  if (numerator_.empty()) numerator_ = {0.0};
  for (double c : numerator_)
    if (!std::isfinite(c)) throw Error(ErrorKind::NonFiniteValue, "non-finite numerator coefficient");
  for (double c : denominator_)
    if (!std::isfinite(c)) throw Error(ErrorKind::NonFiniteValue, "non-finite denominator coefficient");
}

Complex RationalTransferFunction::at(double omega) const {
  const Complex s{0.0, omega};
  const Complex den = poly_eval(denominator_, s);
  if (den == Complex{0.0, 0.0})
    throw Error(ErrorKind::PoleOnAxis, fmt::format("pole on the imaginary axis at omega = {}", omega));
  return poly_eval(numerator_, s) / den;
}

RationalTransferFunction RationalTransferFunction::operator*(const RationalTransferFunction& rhs) const {
  return {poly_multiply(numerator_, rhs.numerator_), poly_multiply(denominator_, rhs.denominator_)};
}

double wrap_phase(double phase_deg) {
  double r = std::fmod(phase_deg, 360.0);
  if (r > 0.0) r -= 360.0;
  if (r <= -360.0) r += 360.0;
  if (r == 0.0) r = 0.0; // drop the sign of -0
  return r;
}

double nichols_phase(Complex value) { return wrap_phase(rad_to_deg(std::arg(value))); }

NicholsPoint to_nichols(Complex value) {
  if (value == Complex{0.0, 0.0}) throw Error(ErrorKind::ZeroMagnitude, "zero has no Nichols coordinates");
  return {nichols_phase(value), to_db(std::abs(value))};
}

double closed_loop_gain(Complex loop) {
  const Complex den = 1.0 + loop;
  if (den == Complex{0.0, 0.0}) throw Error(ErrorKind::CriticalPoint, "open loop at the critical point -1");
  if (!std::isfinite(std::abs(loop))) return 1.0;
  return std::abs(loop / den);
}

double sensitivity_gain(Complex loop) {
  const Complex den = 1.0 + loop;
  if (den == Complex{0.0, 0.0}) throw Error(ErrorKind::CriticalPoint, "open loop at the critical point -1");
  return 1.0 / std::abs(den);
}

std::optional<MCircleSection> m_circle_gains(double m_value, double phase_deg) {
  if (!(m_value > 1.0)) throw Error(ErrorKind::InvalidM, fmt::format("M must exceed 1, got {}", m_value));
  // r^2 (1 - M^2) - 2 M^2 cos(phi) r - M^2 = 0
  const double m2 = m_value * m_value;
  const double c = std::cos(deg_to_rad(phase_deg));
  const double a = 1.0 - m2;
  const double b = -2.0 * m2 * c;
  double disc = b * b + 4.0 * a * m2;
  if (c >= 0.0) return std::nullopt;
  if (disc < 0.0) {
    // Tangent phase: keep the double root despite rounding.
    if (disc < -1e-12 * b * b) return std::nullopt;
    disc = 0.0;
  }
  const double sq = std::sqrt(disc);
  // a < 0, so (-b - sq)/(2a) is the larger root.
  const double r_hi = (-b - sq) / (2.0 * a);
  const double r_lo = (-b + sq) / (2.0 * a);
  if (!(r_lo > 0.0)) return std::nullopt;
  return MCircleSection{m_value, phase_deg, to_db(r_hi), to_db(r_lo)};
}

std::pair<double, double> m_circle_phase_range(double m_value) {
  if (!(m_value > 1.0)) throw Error(ErrorKind::InvalidM, fmt::format("M must exceed 1, got {}", m_value));
  const double edge = rad_to_deg(std::acos(-std::sqrt((m_value * m_value - 1.0) / (m_value * m_value))));
  return {-360.0 + edge, -edge};
}

PoleZeroExcess pole_zero_excess(const RationalTransferFunction& tf) {
  const int num_degree = poly_degree(tf.numerator());
  const int den_degree = poly_degree(tf.denominator());
  if (num_degree < 0) return {0, 0.0};
  const double num_lead = tf.numerator()[tf.numerator().size() - num_degree - 1];
  const double den_lead = tf.denominator()[tf.denominator().size() - den_degree - 1];
  return {den_degree - num_degree, std::abs(num_lead / den_lead)};
}

} // namespace qft
