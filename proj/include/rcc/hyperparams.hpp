// Model hyperparameters shared by the sampler, the joint density and the
// fitting routines. Construction validates the admissible region once so the
// rest of the code can assume it.
#pragma once

#include <stdexcept>
#include <string>

namespace rcc {

struct Hyperparams {
    double alpha = 1.0;  // overall clique-size intensity, > 0
    double sigma = 0.5;  // tail/stability index, in the open interval (0, 1)
    double c = 1.0;      // concentration offset, > -sigma
    double tau = 1.0;    // expected number of cliques, > 0

    Hyperparams() = default;
    Hyperparams(double alpha_, double sigma_, double c_, double tau_)
        : alpha(alpha_), sigma(sigma_), c(c_), tau(tau_) {
        validate();
    }

    void validate() const {
        if (!(alpha > 0.0))
            throw std::invalid_argument("Hyperparams: alpha must be > 0, got " + std::to_string(alpha));
        if (!(sigma > 0.0) || !(sigma < 1.0))
            throw std::invalid_argument("Hyperparams: sigma must lie in (0,1), got " + std::to_string(sigma));
        if (!(c > -sigma))
            throw std::invalid_argument("Hyperparams: need c > -sigma, got c=" + std::to_string(c) +
                                        " sigma=" + std::to_string(sigma));
        if (!(tau > 0.0))
            throw std::invalid_argument("Hyperparams: tau must be > 0, got " + std::to_string(tau));
    }
};

}  // namespace rcc
