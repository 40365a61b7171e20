#pragma once

#include <optional>

#include "dbnot/linalg.hpp"

namespace dbnot {

/// Pluggable nonlinear objective: value, gradient, and a smoothness constant
/// bounding the gradient's Lipschitz modulus. Oracles that admit a closed-form
/// segment minimizer override line_search; the default reports "none".
class ObjectiveOracle {
public:
    virtual ~ObjectiveOracle() = default;

    virtual double value(const DenseMatrix& f) const = 0;
    virtual DenseMatrix gradient(const DenseMatrix& f) const = 0;
    virtual double smoothness() const = 0;

    /// Exact minimizer of value((1-mu)*f + mu*target) over mu in [0,1],
    /// when available analytically.
    virtual std::optional<double> line_search(const DenseMatrix& f,
                                              const DenseMatrix& target) const {
        (void)f;
        (void)target;
        return std::nullopt;
    }
};

}  // namespace dbnot
