#include "densflow/exponents.hpp"

#include "densflow/errors.hpp"

#include <cmath>
#include <string>

namespace densflow {

Exponents::Exponents(int n_dim, double p_grad, double m_porous)
    : n_dim_(n_dim), p_(p_grad), m_(m_porous) {
    if (!std::isfinite(p_) || !std::isfinite(m_)) {
        throw ConfigError("exponents must be finite");
    }
    if (!(n_dim_ > p_ && p_ > 1.0)) {
        throw ConfigError("requires N>p>1 (got N=" + std::to_string(n_dim_) +
                          ", p=" + std::to_string(p_) + ")");
    }
    if (!(p_ + m_ > 3.0)) {
        throw ConfigError("requires p+m>3 (got p+m=" + std::to_string(p_ + m_) + ")");
    }
}

} // namespace densflow
