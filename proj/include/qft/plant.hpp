#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "qft/expression.hpp"
#include "qft/hull.hpp"
#include "qft/lti.hpp"

namespace qft {

struct ParameterSpec {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  int grid_points = 1;

  /// Uniform samples over [min, max]; a single-point grid samples `nominal`.
  std::vector<double> grid(double nominal) const;

  bool operator==(const ParameterSpec&) const = default;
};

using ParameterPoint = std::map<std::string, double>;

/// A rational transfer function whose coefficients are expressions over a box
/// of uncertain parameters, with one designated nominal point in the box.
class UncertainPlant {
public:
  UncertainPlant(std::vector<std::string> numerator, std::vector<std::string> denominator,
                 std::vector<ParameterSpec> parameters, ParameterPoint nominal);

  const std::vector<ParameterSpec>& parameters() const noexcept { return parameters_; }
  const std::vector<std::string>& numerator_text() const noexcept { return numerator_text_; }
  const std::vector<std::string>& denominator_text() const noexcept { return denominator_text_; }
  const ParameterPoint& nominal() const noexcept { return nominal_; }
  std::vector<double> nominal_values() const;

  /// Coefficient values at a point given in parameter order. Throws OutOfBox.
  RationalTransferFunction instantiate(std::span<const double> values) const;
  RationalTransferFunction instantiate(const ParameterPoint& point) const;
  RationalTransferFunction nominal_tf() const { return instantiate(nominal_values()); }

  /// Cartesian product of every parameter grid, first parameter varying slowest.
  std::vector<std::vector<double>> parameter_grid() const;

  /// Same plant with the denominator multiplied by (tau*s + 1).
  UncertainPlant with_denominator_lag(double tau) const;

  bool operator==(const UncertainPlant& rhs) const;

private:
  std::vector<double> point_values(const ParameterPoint& point) const;
  void check_in_box(std::span<const double> values) const;

  std::vector<std::string> numerator_text_;
  std::vector<std::string> denominator_text_;
  std::vector<CoefficientExpression> numerator_;
  std::vector<CoefficientExpression> denominator_;
  std::vector<ParameterSpec> parameters_;
  std::vector<std::string> names_;
  ParameterPoint nominal_;
};

Complex evaluate_plant(const UncertainPlant& plant, const ParameterPoint& point, double omega);

NicholsPoint nominal_point(const UncertainPlant& plant, double omega);

struct TemplatePoint {
  std::vector<double> parameters;
  Complex ratio; // G(p, jw) / G_o(jw)
};

/// Plant responses at one frequency as ratios to the nominal. `hull` holds the
/// convex hull of the points in relative Nichols coordinates (x = phase in
/// degrees on the branch around the nominal's 0 deg, y = gain dB), and
/// `hull_indices` the corresponding entries of `points`.
struct Template {
  double omega = 0.0;
  std::vector<TemplatePoint> points;
  std::vector<PlanePoint> hull;
  std::vector<std::size_t> hull_indices;

  std::vector<Complex> hull_ratios() const;
  std::vector<Complex> all_ratios() const;
  double gain_span_db() const;
};

/// Relative Nichols coordinates of a template ratio: principal-branch phase,
/// so the nominal (ratio 1) sits at 0 deg.
PlanePoint relative_nichols(Complex ratio);

Template generate_template(const UncertainPlant& plant, double omega);

} // namespace qft
