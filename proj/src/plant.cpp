#include "qft/plant.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "qft/error.hpp"

namespace qft {

std::vector<double> ParameterSpec::grid(double nominal) const {
  if (min == max) return {min};
  if (grid_points <= 1) return {nominal};
  std::vector<double> out(static_cast<std::size_t>(grid_points));
  const double step = (max - min) / (grid_points - 1);
  for (int i = 0; i < grid_points; ++i) out[static_cast<std::size_t>(i)] = min + step * i;
  out.back() = max;
  return out;
}

UncertainPlant::UncertainPlant(std::vector<std::string> numerator, std::vector<std::string> denominator,
                               std::vector<ParameterSpec> parameters, ParameterPoint nominal)
    : numerator_text_(std::move(numerator)),
      denominator_text_(std::move(denominator)),
      parameters_(std::move(parameters)),
      nominal_(std::move(nominal)) {
  for (const auto& p : parameters_) {
    if (!(p.min <= p.max))
      throw Error(ErrorKind::InvalidArgument, fmt::format("parameter '{}': min exceeds max", p.name));
    if (p.grid_points < 1)
      throw Error(ErrorKind::InvalidArgument, fmt::format("parameter '{}': grid_points must be >= 1", p.name));
    if (p.min == p.max && p.grid_points != 1)
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("parameter '{}': a fixed parameter needs grid_points = 1", p.name));
    if (std::find(names_.begin(), names_.end(), p.name) != names_.end())
      throw Error(ErrorKind::InvalidArgument, fmt::format("duplicate parameter '{}'", p.name));
    names_.push_back(p.name);
    auto it = nominal_.find(p.name);
    if (it == nominal_.end())
      throw Error(ErrorKind::InvalidArgument, fmt::format("no nominal value for parameter '{}'", p.name));
    if (it->second < p.min || it->second > p.max)
      throw Error(ErrorKind::OutOfBox, fmt::format("nominal value of '{}' lies outside [{}, {}]", p.name,
                                                   p.min, p.max));
  }
  for (const auto& [name, value] : nominal_)
    if (std::find(names_.begin(), names_.end(), name) == names_.end())
      throw Error(ErrorKind::UnknownParameter, fmt::format("nominal value given for unknown parameter '{}'", name));

  if (denominator_text_.empty())
    throw Error(ErrorKind::InvalidTransferFunction, "plant denominator is empty");
  for (const auto& text : numerator_text_) numerator_.push_back(CoefficientExpression::parse(text, names_));
  for (const auto& text : denominator_text_) denominator_.push_back(CoefficientExpression::parse(text, names_));
  (void)nominal_tf();
}

std::vector<double> UncertainPlant::nominal_values() const { return point_values(nominal_); }

std::vector<double> UncertainPlant::point_values(const ParameterPoint& point) const {
  std::vector<double> values;
  values.reserve(names_.size());
  for (const auto& name : names_) {
    auto it = point.find(name);
    if (it == point.end())
      throw Error(ErrorKind::InvalidArgument, fmt::format("missing value for parameter '{}'", name));
    values.push_back(it->second);
  }
  return values;
}

void UncertainPlant::check_in_box(std::span<const double> values) const {
  if (values.size() != parameters_.size())
    throw Error(ErrorKind::InvalidArgument, "parameter vector has the wrong length");
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] < parameters_[i].min || values[i] > parameters_[i].max)
      throw Error(ErrorKind::OutOfBox, fmt::format("parameter '{}' = {} outside [{}, {}]", parameters_[i].name,
                                                   values[i], parameters_[i].min, parameters_[i].max));
}

RationalTransferFunction UncertainPlant::instantiate(std::span<const double> values) const {
  check_in_box(values);
  Polynomial num, den;
  for (const auto& e : numerator_) num.push_back(e.evaluate(values));
  for (const auto& e : denominator_) den.push_back(e.evaluate(values));
  return {std::move(num), std::move(den)};
}

RationalTransferFunction UncertainPlant::instantiate(const ParameterPoint& point) const {
  return instantiate(point_values(point));
}

std::vector<std::vector<double>> UncertainPlant::parameter_grid() const {
  std::vector<std::vector<double>> out{{}};
  const auto nominal = nominal_values();
  for (std::size_t i = 0; i < parameters_.size(); ++i) {
    std::vector<std::vector<double>> next;
    for (const auto& prefix : out)
      for (double v : parameters_[i].grid(nominal[i])) {
        auto row = prefix;
        row.push_back(v);
        next.push_back(std::move(row));
      }
    out = std::move(next);
  }
  return out;
}

UncertainPlant UncertainPlant::with_denominator_lag(double tau) const {
  // (d0 s^n + ... + dn)(tau s + 1): e0 = tau d0, ei = tau di + d(i-1), e(n+1) = dn
  const std::string t = fmt::format("{}", tau);
  std::vector<std::string> den;
  const auto& d = denominator_text_;
  den.push_back(fmt::format("{}*({})", t, d.front()));
  for (std::size_t i = 1; i < d.size(); ++i) den.push_back(fmt::format("{}*({})+({})", t, d[i], d[i - 1]));
  den.push_back(fmt::format("({})", d.back()));
  return {numerator_text_, std::move(den), parameters_, nominal_};
}

bool UncertainPlant::operator==(const UncertainPlant& rhs) const {
  return numerator_text_ == rhs.numerator_text_ && denominator_text_ == rhs.denominator_text_ &&
         parameters_ == rhs.parameters_ && nominal_ == rhs.nominal_;
}

Complex evaluate_plant(const UncertainPlant& plant, const ParameterPoint& point, double omega) {
  if (!(omega > 0.0)) throw Error(ErrorKind::InvalidArgument, "omega must be positive");
  return plant.instantiate(point).at(omega);
}

NicholsPoint nominal_point(const UncertainPlant& plant, double omega) {
  if (!(omega > 0.0)) throw Error(ErrorKind::InvalidArgument, "omega must be positive");
  return to_nichols(plant.nominal_tf().at(omega));
}

PlanePoint relative_nichols(Complex ratio) {
  if (ratio == Complex{0.0, 0.0}) throw Error(ErrorKind::ZeroMagnitude, "template ratio is zero");
  return {rad_to_deg(std::arg(ratio)), to_db(std::abs(ratio))};
}

std::vector<Complex> Template::hull_ratios() const {
  std::vector<Complex> out;
  out.reserve(hull_indices.size());
  for (std::size_t i : hull_indices) out.push_back(points[i].ratio);
  return out;
}

std::vector<Complex> Template::all_ratios() const {
  std::vector<Complex> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.ratio);
  return out;
}

double Template::gain_span_db() const {
  if (hull.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(hull.begin(), hull.end(),
                                      [](const PlanePoint& a, const PlanePoint& b) { return a.y < b.y; });
  return hi->y - lo->y;
}

Template generate_template(const UncertainPlant& plant, double omega) {
  if (!(omega > 0.0)) throw Error(ErrorKind::InvalidArgument, "omega must be positive");
  const auto nominal = plant.nominal_values();
  const Complex nominal_response = plant.instantiate(nominal).at(omega);
  if (nominal_response == Complex{0.0, 0.0})
    throw Error(ErrorKind::ZeroMagnitude, fmt::format("nominal response vanishes at omega = {}", omega));

  Template tpl;
  tpl.omega = omega;
  for (auto& values : plant.parameter_grid()) {
    const Complex ratio =
        values == nominal ? Complex{1.0, 0.0} : plant.instantiate(values).at(omega) / nominal_response;
    tpl.points.push_back({std::move(values), ratio});
  }
  if (std::none_of(tpl.points.begin(), tpl.points.end(), [&](const TemplatePoint& p) { return p.parameters == nominal; }))
    tpl.points.push_back({nominal, Complex{1.0, 0.0}});

  std::vector<PlanePoint> plane;
  plane.reserve(tpl.points.size());
  double lo = 0.0, hi = 0.0;
  for (const auto& p : tpl.points) {
    plane.push_back(relative_nichols(p.ratio));
    lo = std::min(lo, plane.back().x);
    hi = std::max(hi, plane.back().x);
  }
  if (hi - lo > 180.0)
    throw Error(ErrorKind::TemplateTooWide,
                fmt::format("template at omega = {} spans {} deg of phase", omega, hi - lo));
  tpl.hull_indices = convex_hull_indices(plane);
  for (std::size_t i : tpl.hull_indices) tpl.hull.push_back(plane[i]);
  return tpl;
}

} // namespace qft
