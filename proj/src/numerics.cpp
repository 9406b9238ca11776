#include "densflow/numerics.hpp"

#include "densflow/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace densflow::numerics {

namespace {

double simpson_recurse(const std::function<double(double)>& f, double a, double b, double fa,
                       double fm, double fb, double whole, double rel, double abs_floor,
                       int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double both = left + right;
    const double tol = std::max(abs_floor, rel * std::abs(both));
    if (depth <= 0 || std::abs(both - whole) <= 15.0 * tol) {
        return both + (both - whole) / 15.0;
    }
    return simpson_recurse(f, a, m, fa, flm, fm, left, rel, 0.5 * abs_floor, depth - 1) +
           simpson_recurse(f, m, b, fm, frm, fb, right, rel, 0.5 * abs_floor, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double rel,
                        double abs_floor, int max_depth) {
    if (a == b) {
        return 0.0;
    }
    // Split into a few panels first so narrow features are not missed by the
    // initial 3-point estimate.
    constexpr int panels = 8;
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double lo = a + k * h;
        const double hi = (k + 1 == panels) ? b : a + (k + 1) * h;
        const double fa = f(lo);
        const double fb = f(hi);
        const double fm = f(0.5 * (lo + hi));
        const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson_recurse(f, lo, hi, fa, fm, fb, whole, rel, abs_floor / panels, max_depth);
    }
    return total;
}

std::vector<double> log_grid(double lo, double hi, int per_decade) {
    if (!(lo > 0.0) || !(hi > lo) || per_decade < 1) {
        throw DomainError("log_grid requires 0 < lo < hi and per_decade >= 1");
    }
    const double decades = std::log10(hi / lo);
    const auto n = static_cast<std::size_t>(std::ceil(decades * per_decade));
    std::vector<double> out(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        out[i] = lo * std::pow(10.0, decades * static_cast<double>(i) / static_cast<double>(n));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw InsufficientDataError("line fit needs at least two paired points");
    }
    const auto n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) {
        throw InsufficientDataError("line fit needs distinct abscissae");
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.slope * x[i] + fit.intercept);
        ss_res += r * r;
    }
    fit.rms_residual = std::sqrt(ss_res / n);
    const double scale = std::max(1.0, std::abs(my));
    if (syy <= 1e-28 * scale * scale * n) {
        fit.r_squared = 1.0;
    } else {
        fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return fit;
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 3 || y_.size() != n) {
        throw DomainError("monotone cubic needs at least three paired nodes");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(x_[i] > x_[i - 1])) {
            throw DomainError("monotone cubic nodes must be strictly increasing");
        }
    }
    std::vector<double> h(n - 1);
    std::vector<double> delta(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        h[k] = x_[k + 1] - x_[k];
        delta[k] = (y_[k + 1] - y_[k]) / h[k];
    }
    d_.assign(n, 0.0);
    d_[0] = ((2.0 * h[0] + h[1]) * delta[0] - h[0] * delta[1]) / (h[0] + h[1]);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        d_[i] = (h[i] * delta[i - 1] + h[i - 1] * delta[i]) / (h[i - 1] + h[i]);
    }
    d_[n - 1] = ((2.0 * h[n - 2] + h[n - 3]) * delta[n - 2] - h[n - 2] * delta[n - 3]) /
                (h[n - 2] + h[n - 3]);

    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (delta[k] == 0.0) {
            d_[k] = 0.0;
            d_[k + 1] = 0.0;
            continue;
        }
        if (d_[k] * delta[k] < 0.0) {
            d_[k] = 0.0;
        }
        if (d_[k + 1] * delta[k] < 0.0) {
            d_[k + 1] = 0.0;
        }
        const double a = d_[k] / delta[k];
        const double b = d_[k + 1] / delta[k];
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            d_[k] = tau * a * delta[k];
            d_[k + 1] = tau * b * delta[k];
        }
    }

    cumulative_.assign(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        // Hermite cubic integrates to h (y0 + y1)/2 + h^2 (d0 - d1)/12.
        cumulative_[k + 1] = cumulative_[k] + h[k] * 0.5 * (y_[k] + y_[k + 1]) +
                             h[k] * h[k] * (d_[k] - d_[k + 1]) / 12.0;
    }
}

std::size_t MonotoneCubic::interval(double x) const {
    const double span = x_.back() - x_.front();
    if (x < x_.front() - 1e-12 * span || x > x_.back() + 1e-12 * span) {
        throw RangeError("interpolation outside tabulated range");
    }
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t k = (it == x_.begin()) ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(k, x_.size() - 2);
}

double MonotoneCubic::operator()(double x) const {
    const std::size_t k = interval(x);
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * y_[k] + (t3 - 2.0 * t2 + t) * h * d_[k] +
           (-2.0 * t3 + 3.0 * t2) * y_[k + 1] + (t3 - t2) * h * d_[k + 1];
}

double MonotoneCubic::derivative(double x) const {
    const std::size_t k = interval(x);
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t;
    return ((6.0 * t2 - 6.0 * t) * y_[k] + (-6.0 * t2 + 6.0 * t) * y_[k + 1]) / h +
           (3.0 * t2 - 4.0 * t + 1.0) * d_[k] + (3.0 * t2 - 2.0 * t) * d_[k + 1];
}

double MonotoneCubic::integral_from_start(double x) const {
    const std::size_t k = interval(x);
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double t4 = t3 * t;
    const double part = (t4 / 2.0 - t3 + t) * y_[k] + (t4 / 4.0 - 2.0 * t3 / 3.0 + t2 / 2.0) * h * d_[k] +
                        (-t4 / 2.0 + t3) * y_[k + 1] + (t4 / 4.0 - t3 / 3.0) * h * d_[k + 1];
    return cumulative_[k] + h * part;
}

double parse_double(const std::string& text, std::size_t line) {
    std::size_t begin = text.find_first_not_of(" \t\r");
    std::size_t end = text.find_last_not_of(" \t\r");
    if (begin == std::string::npos) {
        throw ParseError(line, "empty numeric field");
    }
    const std::string trimmed = text.substr(begin, end - begin + 1);
    double v = 0.0;
    const char* first = trimmed.data();
    const char* last = first + trimmed.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec == std::errc::invalid_argument) {
        throw ParseError(line, "not a number: '" + trimmed + "'");
    }
    if (res.ec == std::errc::result_out_of_range) {
        throw ParseError(line, "number out of range: '" + trimmed + "'");
    }
    if (res.ptr != last) {
        throw ParseError(line, "trailing characters in '" + trimmed + "'");
    }
    return v;
}

std::pair<std::vector<double>, std::vector<double>>
read_two_column_csv(const std::string& path, const std::string& expected_header) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(0, "cannot open " + path);
    }
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> a;
    std::vector<double> b;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line_no == 1) {
            if (line != expected_header) {
                throw ParseError(1, "expected header '" + expected_header + "'");
            }
            continue;
        }
        if (line.empty()) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw ParseError(line_no, "expected two comma-separated fields");
        }
        a.push_back(parse_double(line.substr(0, comma), line_no));
        b.push_back(parse_double(line.substr(comma + 1), line_no));
    }
    if (line_no == 0) {
        throw ParseError(1, "missing header '" + expected_header + "'");
    }
    return {std::move(a), std::move(b)};
}

} // namespace densflow::numerics
