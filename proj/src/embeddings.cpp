#include "densflow/embeddings.hpp"

#include "densflow/errors.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace densflow {

// ---------------------------------------------------------------------------
// Test functions

RadialTestFunction::RadialTestFunction(GridHandle grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) {
        throw ConfigError("test function needs a grid");
    }
    if (values_.size() != grid_->n_cells()) {
        throw ConfigError("test function size does not match the grid");
    }
    for (double v : values_) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw DomainError("test function values must be finite and nonnegative");
        }
        if (v > 0.0) {
            ++support_cells_;
        }
    }
    if (values_.back() != 0.0) {
        throw DomainError("test function support must end inside the grid");
    }
}

RadialTestFunction RadialTestFunction::sample(GridHandle grid,
                                              const std::function<double(double)>& f) {
    std::vector<double> v;
    v.reserve(grid->n_cells());
    for (double r : grid->centers()) {
        v.push_back(f(r));
    }
    return {std::move(grid), std::move(v)};
}

RadialTestFunction RadialTestFunction::piecewise_linear(GridHandle grid,
                                                        const std::vector<double>& knots,
                                                        const std::vector<double>& values) {
    if (knots.size() != values.size() || knots.size() < 2) {
        throw ConfigError("piecewise-linear profile needs matching knots and values");
    }
    if (!std::is_sorted(knots.begin(), knots.end())) {
        throw ConfigError("knots must be increasing");
    }
    return sample(std::move(grid), [&](double r) {
        if (r >= knots.back()) {
            return 0.0;
        }
        if (r <= knots.front()) {
            return values.front();
        }
        const auto it = std::upper_bound(knots.begin(), knots.end(), r);
        const std::size_t j = static_cast<std::size_t>(it - knots.begin());
        const double t = (r - knots[j - 1]) / (knots[j] - knots[j - 1]);
        return values[j - 1] + t * (values[j] - values[j - 1]);
    });
}

double RadialTestFunction::moment(double q) const {
    const auto w = grid_->cell_weights();
    double sum = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i] > 0.0) {
            sum += w[i] * std::pow(values_[i], q);
        }
    }
    return sum;
}

double RadialTestFunction::weighted_moment(double q, const DensityProfile& dens) const {
    const auto w = grid_->cell_weights();
    const auto c = grid_->centers();
    double sum = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i] > 0.0) {
            sum += dens.rho(c[i]) * w[i] * std::pow(values_[i], q);
        }
    }
    return sum;
}

double RadialTestFunction::gradient_energy(double p) const {
    const auto area = grid_->face_areas();
    const auto h = grid_->face_spacing();
    double sum = 0.0;
    for (std::size_t f = 1; f < values_.size(); ++f) {
        const double d = values_[f] - values_[f - 1];
        if (d != 0.0) {
            sum += area[f] * h[f] * std::pow(std::abs(d) / h[f], p);
        }
    }
    return sum;
}

double RadialTestFunction::support_measure() const {
    const auto w = grid_->cell_weights();
    double sum = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i] > 0.0) {
            sum += w[i];
        }
    }
    return sum;
}

double RadialTestFunction::weighted_support_beyond(const DensityProfile& dens, double r) const {
    const auto w = grid_->cell_weights();
    const auto c = grid_->centers();
    double sum = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i] > 0.0 && c[i] >= r) {
            sum += dens.rho(c[i]) * w[i];
        }
    }
    return sum;
}

RadialTestFunction RadialTestFunction::scaled(double lambda) const {
    std::vector<double> v = values_;
    for (double& x : v) {
        x *= lambda;
    }
    return {grid_, std::move(v)};
}

// ---------------------------------------------------------------------------
// Rearrangement

Rearrangement::Rearrangement(std::vector<double> cumulative_measure, std::vector<double> values)
    : measure_(std::move(cumulative_measure)), values_(std::move(values)) {}

double Rearrangement::operator()(double s) const {
    if (s < 0.0) {
        throw DomainError("rearrangement is defined for s >= 0");
    }
    // u*(s) = v_k on (S_{k-1}, S_k]; u*(0) = sup.
    const auto it = std::lower_bound(measure_.begin(), measure_.end(), s);
    if (it == measure_.end()) {
        return 0.0;
    }
    return values_[static_cast<std::size_t>(it - measure_.begin())];
}

double Rearrangement::moment(double q) const {
    double sum = 0.0;
    double prev = 0.0;
    for (std::size_t k = 0; k < values_.size(); ++k) {
        sum += (measure_[k] - prev) * std::pow(values_[k], q);
        prev = measure_[k];
    }
    return sum;
}

Rearrangement decreasing_rearrangement(const RadialTestFunction& f) {
    const auto& u = f.values();
    const auto w = f.grid().cell_weights();
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] > 0.0) {
            order.push_back(i);
        }
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return u[a] > u[b]; });
    std::vector<double> measure;
    std::vector<double> values;
    measure.reserve(order.size());
    values.reserve(order.size());
    double s = 0.0;
    for (std::size_t i : order) {
        s += w[i];
        measure.push_back(s);
        values.push_back(u[i]);
    }
    return {std::move(measure), std::move(values)};
}

// ---------------------------------------------------------------------------
// Hardy and the omega embeddings

double hardy_ratio(const RadialTestFunction& f, double p) {
    if (f.support_cells() == 0) {
        throw DegenerateInputError("Hardy ratio of the zero function");
    }
    const auto& u = f.values();
    const auto w = f.grid().cell_weights();
    const auto c = f.grid().centers();
    double lhs = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] > 0.0) {
            lhs += w[i] * std::pow(u[i] / c[i], p);
        }
    }
    const double rhs = f.gradient_energy(p);
    if (!(rhs > 0.0)) {
        throw DegenerateInputError("Hardy ratio needs a nonconstant function");
    }
    return lhs / rhs;
}

std::string kind_name(const EmbeddingKind& kind) {
    static constexpr const char* names[] = {"EmbOld", "EmbOldP", "EmbOldWg", "EucWg", "EucSup"};
    return names[kind.index()];
}

std::string kind_params(const EmbeddingKind& kind) {
    std::ostringstream out;
    out.precision(17);
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, embedding::Moments>) {
                out << "q=" << k.q << " r=" << k.r;
            } else if constexpr (std::is_same_v<K, embedding::MomentsAtP>) {
                out << "r=" << k.r;
            } else if constexpr (std::is_same_v<K, embedding::EuclideanDecay>) {
                out << "p1=" << k.p1;
            } else {
                out << "R=" << k.radius;
            }
        },
        kind);
    return out.str();
}

namespace {

void require_euclidean(const RadialTestFunction& f, const char* what) {
    if (f.grid().geometry().kind() != ManifoldKind::Euclidean) {
        throw HypothesisError(std::string(what) + " needs Euclidean geometry");
    }
}

double positive_energy(const RadialTestFunction& f, double p) {
    if (f.support_cells() == 0) {
        throw DegenerateInputError("embedding ratio of the zero function");
    }
    const double d = f.gradient_energy(p);
    if (!(d > 0.0)) {
        throw DegenerateInputError("embedding ratio needs a nonconstant function");
    }
    return d;
}

} // namespace

double embedding_ratio(const RadialTestFunction& f, const EmbeddingKind& kind,
                       const Exponents& exps, const DensityProfile& dens) {
    const double p = exps.p();
    const double n = exps.n_dim();
    const auto& geom = f.grid().geometry();

    return std::visit(
        [&](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, embedding::Moments>) {
                if (!(k.r > 0.0 && k.r < k.q && k.q <= exps.sobolev_exponent())) {
                    throw DomainError("EmbOld needs 0 < r < q <= Np/(N-p)");
                }
                const double energy = positive_energy(f, p);
                const double mq = f.moment(k.q);
                const double mr = f.moment(k.r);
                const double e = std::pow(mr, k.q / (k.q - k.r)) *
                                 std::pow(mq, -k.r / (k.q - k.r));
                const double rhs = std::pow(geom.omega(e), k.q) *
                                   std::pow(e, 1.0 + k.q / n - k.q / p) *
                                   std::pow(energy, k.q / p);
                return mq / rhs;
            } else if constexpr (std::is_same_v<K, embedding::MomentsAtP>) {
                if (!(k.r > 0.0 && k.r < p)) {
                    throw DomainError("EmbOldP needs 0 < r < p");
                }
                const double energy = positive_energy(f, p);
                const double h = p / (n * (p - k.r));
                const double den = 1.0 + k.r * h;
                const double rhs = std::pow(geom.omega(f.support_measure()), p / den) *
                                   std::pow(f.moment(k.r), p * h / den) *
                                   std::pow(energy, 1.0 / den);
                return f.moment(p) / rhs;
            } else if constexpr (std::is_same_v<K, embedding::WeightedOmega>) {
                if (!(k.radius > 0.0)) {
                    throw DomainError("EmbOldWg needs R > 0");
                }
                const double energy = positive_energy(f, p);
                const double v = f.support_measure();
                const double coeff = dens.psi(p, k.radius) +
                                     dens.rho(k.radius) * std::pow(geom.omega(v), p) *
                                         std::pow(v, p / n);
                return f.weighted_moment(p, dens) / (coeff * energy);
            } else if constexpr (std::is_same_v<K, embedding::EuclideanWeighted>) {
                if (!(k.radius > 0.0)) {
                    throw DomainError("EucWg needs R > 0");
                }
                require_euclidean(f, "EucWg");
                const double energy = positive_energy(f, p);
                const auto& u = f.values();
                const auto w = f.grid().cell_weights();
                const auto c = f.grid().centers();
                double inner = 0.0;
                double weighted_support = 0.0;
                for (std::size_t i = 0; i < u.size(); ++i) {
                    if (u[i] > 0.0) {
                        const double rho = dens.rho(c[i]);
                        weighted_support += rho * w[i];
                        if (c[i] < k.radius) {
                            inner += std::pow(rho, n / p) * w[i];
                        }
                    }
                }
                const double bracket =
                    std::pow(dens.rho(k.radius), n / p - 1.0) * weighted_support + inner;
                return f.weighted_moment(p, dens) / (std::pow(bracket, p / n) * energy);
            } else {
                require_euclidean(f, "EucSup");
                const double sobolev = exps.sobolev_exponent();
                if (!(k.p1 > 0.0 && k.p1 < sobolev)) {
                    throw DomainError("EucSup needs p1 < Np/(N-p)");
                }
                const double alpha = dens.alpha();
                if (alpha < p || alpha > n) {
                    throw HypothesisError("EucSup needs N >= alpha >= p");
                }
                if (!(alpha * sobolev / (sobolev - k.p1) > n)) {
                    throw HypothesisError(
                        "EucSup: rho^{p*/(p*-p1)} is not integrable (p1 <= p(N-alpha)/(N-p))");
                }
                const double energy = positive_energy(f, p);
                return f.weighted_moment(k.p1, dens) / std::pow(energy, k.p1 / p);
            }
        },
        kind);
}

// ---------------------------------------------------------------------------
// General embedding profile

ConvexFunction euclidean_isoperimetric_g_inverse(int n_dim) {
    if (n_dim < 2) {
        throw DomainError("isoperimetric G needs N >= 2");
    }
    const double n = n_dim;
    const double scale = n * std::pow(unit_ball_volume(n_dim), 1.0 / n);
    const double k = n / (n - 1.0);
    return {[=](double s) { return std::pow(s / scale, k); },
            [=](double v) { return scale * std::pow(v, 1.0 / k); }};
}

double GeneralEmbeddingProfile::g_inverse(double v) const {
    if (v <= 0.0) {
        return 0.0;
    }
    if (g_.inverse) {
        return g_.inverse(v);
    }
    double lo = 0.0;
    double hi = 1.0;
    while (g_.value(hi) < v) {
        hi *= 2.0;
        if (!std::isfinite(hi)) {
            throw RangeError("G does not reach the requested value");
        }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g_.value(mid) < v ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double GeneralEmbeddingProfile::a(double s) const {
    s = std::abs(s);
    if (s == 0.0) {
        return 0.0;
    }
    if (s < s_.front()) {
        return a_.front() * std::pow(s / s_.front(), head_exponent_);
    }
    if (s > s_.back()) {
        return a_.back() * std::pow(s / s_.back(), tail_exponent_);
    }
    return std::exp(log_a_(std::log(s)));
}

double GeneralEmbeddingProfile::a_prime(double s) const {
    return std::pow(g_.value(a(s)), (p_ - 1.0) / p_);
}

double GeneralEmbeddingProfile::a_inverse(double v) const {
    if (v <= 0.0) {
        return 0.0;
    }
    if (v < a_.front()) {
        return s_.front() * std::pow(v / a_.front(), 1.0 / head_exponent_);
    }
    if (v > a_.back()) {
        return s_.back() * std::pow(v / a_.back(), 1.0 / tail_exponent_);
    }
    return std::exp(log_s_of_a_(std::log(v)));
}

double GeneralEmbeddingProfile::b(double s) const {
    return g_.value(a(std::pow(std::abs(s), 1.0 / p_)));
}

double GeneralEmbeddingProfile::b_inverse(double v) const {
    return std::pow(a_inverse(g_inverse(v)), p_);
}

double GeneralEmbeddingProfile::s_fn(double v) const {
    if (v <= 0.0) {
        return 0.0;
    }
    return std::pow(g_inverse(v), p_) * std::pow(v, 1.0 - p_);
}

bool GeneralEmbeddingProfile::derivative_sandwich_holds() const {
    for (std::size_t j = 0; j < s_.size(); ++j) {
        const double ratio = s_[j] * a_prime(s_[j]) / a_[j];
        if (ratio < 1.0 - 1e-9 || ratio > c_ap_ * (1.0 + 1e-9)) {
            return false;
        }
    }
    return true;
}

bool GeneralEmbeddingProfile::composition_sandwich_holds() const {
    const double lower = std::pow(c_ap_, -p_);
    for (double t : s_) {
        const double s = std::pow(t, p_);
        const double v = s_fn(b(s));
        if (v < lower * s * (1.0 - 1e-9) || v > s * (1.0 + 1e-9)) {
            return false;
        }
    }
    return true;
}

std::size_t GeneralEmbeddingProfile::b_convexity_violations() const {
    std::size_t count = 0;
    double prev_slope = -std::numeric_limits<double>::infinity();
    double prev_s = 0.0;
    double prev_b = 0.0;
    for (double t : s_) {
        const double s = std::pow(t, p_);
        const double bv = b(s);
        if (s > prev_s) {
            const double slope = (bv - prev_b) / (s - prev_s);
            if (slope < prev_slope * (1.0 - 1e-9)) {
                ++count;
            }
            prev_slope = slope;
        }
        prev_s = s;
        prev_b = bv;
    }
    return count;
}

double GeneralEmbeddingProfile::fitted_a_exponent() const {
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t j = 0; j < s_.size(); ++j) {
        x.push_back(std::log(s_[j]));
        y.push_back(std::log(a_[j]));
    }
    return numerics::fit_line(x, y).slope;
}

double GeneralEmbeddingProfile::fitted_b_exponent() const {
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t j = 0; j < s_.size(); ++j) {
        x.push_back(p_ * std::log(s_[j]));
        y.push_back(std::log(g_.value(a_[j])));
    }
    return numerics::fit_line(x, y).slope;
}

GeneralEmbeddingProfile solve_profile_ode(ConvexFunction g, double p, double s_max) {
    constexpr double s0 = 1e-6;
    if (!g.value) {
        throw ConfigError("profile ODE needs G");
    }
    if (!(p > 1.0)) {
        throw DomainError("profile ODE needs p > 1");
    }
    if (!(s_max > 10.0 * s0)) {
        throw DomainError("profile ODE needs s_max well above s0 = 1e-6");
    }
    const double q = (p - 1.0) / p;

    // Power law c v^k matching G near the start value; refined until the
    // probe scale agrees with A(s0).
    double probe = 1e-12;
    double a0 = 0.0;
    double gamma = 0.0;
    for (int it = 0; it < 8; ++it) {
        const double g1 = g.value(probe);
        const double g2 = g.value(2.0 * probe);
        if (!(g1 > 0.0) || !(g2 > g1)) {
            throw BranchError("G vanishes near 0; only the trivial branch A = 0 exists");
        }
        const double k = std::log2(g2 / g1);
        gamma = k * q;
        if (!(gamma < 1.0)) {
            throw BranchError("G grows too fast at 0 (k(p-1)/p >= 1); A = 0 is the only solution");
        }
        const double c = g1 / std::pow(probe, k);
        const double next = std::pow((1.0 - gamma) * std::pow(c, q) * s0, 1.0 / (1.0 - gamma));
        if (!(next > 0.0) || !std::isfinite(next)) {
            throw BranchError("singular-start expansion collapsed to zero");
        }
        const bool settled = std::abs(next / probe - 1.0) < 1e-3;
        a0 = next;
        probe = next;
        if (settled) {
            break;
        }
    }

    using State = std::array<double, 1>;
    namespace ode = boost::numeric::odeint;
    auto rhs = [&](const State& y, State& dy, double x) {
        dy[0] = std::exp(x - y[0]) * std::pow(g.value(std::exp(y[0])), q);
    };

    GeneralEmbeddingProfile prof;
    prof.s_ = numerics::log_grid(s0, s_max, 64);
    std::vector<double> xs;
    xs.reserve(prof.s_.size());
    for (double s : prof.s_) {
        xs.push_back(std::log(s));
    }
    State y{std::log(a0)};
    std::vector<double> log_a;
    log_a.reserve(xs.size());
    auto stepper = ode::make_dense_output(1e-12, 1e-12, ode::runge_kutta_dopri5<State>());
    ode::integrate_times(stepper, rhs, y, xs.begin(), xs.end(), 1e-3,
                         [&](const State& state, double) { log_a.push_back(state[0]); });
    if (log_a.size() != xs.size()) {
        throw BranchError("profile integration stopped early");
    }

    prof.g_ = std::move(g);
    prof.p_ = p;
    prof.head_exponent_ = 1.0 / (1.0 - gamma);
    prof.a_.reserve(log_a.size());
    for (double la : log_a) {
        const double v = std::exp(la);
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw BranchError("profile left the positive branch");
        }
        prof.a_.push_back(v);
    }
    for (std::size_t j = 1; j < log_a.size(); ++j) {
        if (!(log_a[j] > log_a[j - 1])) {
            throw BranchError("profile is not strictly increasing");
        }
    }
    double c_ap = 0.0;
    for (std::size_t j = 0; j < prof.s_.size(); ++j) {
        const double slope = prof.s_[j] * std::pow(prof.g_.value(prof.a_[j]), q) / prof.a_[j];
        c_ap = std::max(c_ap, slope);
    }
    prof.c_ap_ = c_ap;
    prof.log_a_ = numerics::MonotoneCubic(xs, log_a);
    prof.log_s_of_a_ = numerics::MonotoneCubic(log_a, xs);
    prof.tail_exponent_ = prof.s_.back() * prof.a_prime(prof.s_.back()) / prof.a_.back();
    return prof;
}

GeneralEmbeddingRatios general_embedding_check(const RadialTestFunction& f,
                                               const GeneralEmbeddingProfile& prof,
                                               const DensityProfile& dens, double radius) {
    require_euclidean(f, "the general embedding");
    if (!(radius > 0.0)) {
        throw DomainError("weighted embedding needs R > 0");
    }
    const double p = prof.p();
    double prev = 0.0;
    for (double r : f.grid().centers()) {
        const double v = dens.psi(p, r);
        if (v < prev * (1.0 - 1e-12)) {
            throw HypothesisError("weighted embedding needs psi nondecreasing");
        }
        prev = v;
    }
    const double energy = positive_energy(f, p);
    const auto& u = f.values();
    const auto w = f.grid().cell_weights();
    double g_of_a = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] > 0.0) {
            g_of_a += w[i] * prof.g(prof.a(u[i]));
        }
    }
    const double boosted = prof.b(std::pow(prof.c_ap(), p) * energy);

    GeneralEmbeddingRatios out;
    out.energy = prof.s_fn(g_of_a) / energy;

    const double v = f.support_measure();
    out.faber_krahn = f.moment(p) / (v * prof.b_inverse(boosted / v));

    const double tail_mass = f.weighted_support_beyond(dens, radius);
    double tail_term = 0.0;
    if (tail_mass > 0.0) {
        tail_term = tail_mass * prof.b_inverse(dens.rho(radius) / tail_mass * boosted);
    }
    out.weighted = f.weighted_moment(p, dens) / (dens.psi(p, radius) * energy + tail_term);
    return out;
}

// ---------------------------------------------------------------------------
// Random family

double unit_uniform(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

RadialTestFunction random_test_function(GridHandle grid, std::uint64_t seed, std::size_t index) {
    std::mt19937_64 rng(seed + index);
    const double r_max = grid->r_max();
    const std::size_t knots_count = 3 + static_cast<std::size_t>(rng() % 8);
    const double support = r_max * (0.05 + 0.45 * unit_uniform(rng()));
    std::vector<double> knots{0.0};
    for (std::size_t k = 1; k + 1 < knots_count; ++k) {
        knots.push_back(support * unit_uniform(rng()));
    }
    knots.push_back(support);
    std::sort(knots.begin(), knots.end());
    std::vector<double> values;
    for (std::size_t k = 0; k + 1 < knots_count; ++k) {
        values.push_back(unit_uniform(rng()));
    }
    values.push_back(0.0);
    // Repeated knots would make a jump; nudge them apart.
    for (std::size_t k = 1; k < knots.size(); ++k) {
        knots[k] = std::max(knots[k], knots[k - 1] + 1e-9 * r_max);
    }
    return RadialTestFunction::piecewise_linear(std::move(grid), knots, values);
}

RandomSuiteResult random_hardy_suite(GridHandle grid, double p, std::uint64_t seed,
                                     std::size_t count) {
    RandomSuiteResult res;
    res.ratios.assign(count, 0.0);
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        res.ratios[idx] = hardy_ratio(random_test_function(grid, seed, idx), p);
    }
    for (std::size_t i = 0; i < count; ++i) {
        if (res.ratios[i] > res.max_ratio) {
            res.max_ratio = res.ratios[i];
            res.argmax = i;
        }
    }
    return res;
}

} // namespace densflow
