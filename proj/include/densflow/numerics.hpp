#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace densflow::numerics {

/// Adaptive composite Simpson on [a, b].
/// Refines until |S2 - S1| <= 15 * max(abs_floor, rel * |S2|).
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel = 1e-10, double abs_floor = 1e-14, int max_depth = 48);

/// Points lo, ..., hi evenly spaced in log10, `per_decade` per factor of ten.
std::vector<double> log_grid(double lo, double hi, int per_decade);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 1.0;
    double rms_residual = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
/// r_squared is reported as 1 when y has zero variance and the residual vanishes.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Piecewise cubic Hermite interpolant through monotone data.
///
/// Node slopes come from the three-point parabola (exact on quadratics) and
/// are limited only where they would break monotonicity of an interval.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    double derivative(double x) const;
    /// Exact integral of the interpolant over [x_front, x].
    double integral_from_start(double x) const;

    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }
    std::span<const double> xs() const { return x_; }
    std::span<const double> ys() const { return y_; }
    bool empty() const { return x_.empty(); }

private:
    std::size_t interval(double x) const;

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> d_;
    std::vector<double> cumulative_;
};

/// Two-column CSV with a fixed header, e.g. `r,sigma`.
/// Throws ParseError with the offending line number.
std::pair<std::vector<double>, std::vector<double>>
read_two_column_csv(const std::string& path, const std::string& expected_header);

/// Parses a full-precision double; throws ParseError(line) on garbage.
double parse_double(const std::string& text, std::size_t line);

} // namespace densflow::numerics
