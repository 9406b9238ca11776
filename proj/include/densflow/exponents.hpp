#pragma once

namespace densflow {

/// The exponent triple (N, p, m) of the doubly nonlinear equation.
///
/// Construction enforces the degenerate range N > p > 1, p + m > 3 and
/// throws ConfigError naming the violated inequality.
class Exponents {
public:
    Exponents(int n_dim, double p_grad, double m_porous);

    int n_dim() const noexcept { return n_dim_; }
    double p() const noexcept { return p_; }
    double m() const noexcept { return m_; }

    /// N(p+m-3)+p.
    double beta() const noexcept { return n_dim_ * (p_ + m_ - 3.0) + p_; }

    /// p+m-3 > 0, the homogeneity degree of the flux minus one.
    double degeneracy() const noexcept { return p_ + m_ - 3.0; }

    /// Sobolev exponent Np/(N-p).
    double sobolev_exponent() const noexcept { return n_dim_ * p_ / (n_dim_ - p_); }

private:
    int n_dim_;
    double p_;
    double m_;
};

} // namespace densflow
