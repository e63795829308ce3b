#pragma once

// Frequency-response arithmetic on rational transfer functions and the
// Nichols plane.

#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <vector>

namespace qft {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

inline double to_db(double magnitude) { return 20.0 * std::log10(magnitude); }
inline double from_db(double db) { return std::pow(10.0, db / 20.0); }

/// Real-coefficient polynomial, coefficients in descending powers of s.
using Polynomial = std::vector<double>;

Polynomial poly_multiply(std::span<const double> a, std::span<const double> b);

/// Evaluates a descending-power polynomial at a complex point (Horner).
Complex poly_eval(std::span<const double> coeffs, Complex s);

/// Degree after stripping leading zero coefficients; -1 for the zero polynomial.
int poly_degree(std::span<const double> coeffs);

/// True when every root of the polynomial lies in the open left half-plane
/// (Routh-Hurwitz; a zero in the first column counts as not stable).
bool is_hurwitz(std::span<const double> coeffs);

class RationalTransferFunction {
public:
  RationalTransferFunction() : numerator_{0.0}, denominator_{1.0} {}
  RationalTransferFunction(Polynomial numerator, Polynomial denominator);

  static RationalTransferFunction constant(double gain) { return {{gain}, {1.0}}; }

  const Polynomial& numerator() const noexcept { return numerator_; }
  const Polynomial& denominator() const noexcept { return denominator_; }

  /// num(jw)/den(jw). Throws PoleOnAxis when the denominator vanishes.
  Complex at(double omega) const;

  RationalTransferFunction operator*(const RationalTransferFunction& rhs) const;

  bool operator==(const RationalTransferFunction&) const = default;

private:
  Polynomial numerator_;
  Polynomial denominator_;
};

inline Complex eval_tf(const RationalTransferFunction& tf, double omega) { return tf.at(omega); }

/// Maps any finite phase onto the single Nichols sheet (-360, 0].
double wrap_phase(double phase_deg);

struct NicholsPoint {
  double phase_deg = 0.0;
  double gain_db = 0.0;

  NicholsPoint() = default;
  NicholsPoint(double phase, double gain) : phase_deg(wrap_phase(phase)), gain_db(gain) {}

  Complex to_complex() const { return std::polar(from_db(gain_db), deg_to_rad(phase_deg)); }
};

NicholsPoint to_nichols(Complex value);

/// Phase of a complex number in degrees on (-360, 0].
double nichols_phase(Complex value);

/// |L / (1 + L)|
double closed_loop_gain(Complex loop);

/// |1 / (1 + L)|
double sensitivity_gain(Complex loop);

struct MCircleSection {
  double m_value = 0.0;
  double phase_deg = 0.0;
  double upper_db = 0.0;
  double lower_db = 0.0;
};

/// Both open-loop gains on the M-circle at a fixed phase, or nullopt where the
/// phase line misses the circle.
std::optional<MCircleSection> m_circle_gains(double m_value, double phase_deg);

/// Phases (on the (-360, 0] sheet) bounding the M-circle: {left, right} with
/// left < -180 < right.
std::pair<double, double> m_circle_phase_range(double m_value);

struct PoleZeroExcess {
  int excess = 0;
  double leading_ratio = 0.0;
};

PoleZeroExcess pole_zero_excess(const RationalTransferFunction& tf);

} // namespace qft
