#pragma once

#include "contractlab/model.hpp"

namespace fixture {

// Single loan: r = 0.02, B = 0.002, eps = 0.25, alpha_1 = 0.055, rho_g / rho_b = 2, mu = 0.1.
inline contractlab::ModelParams fig1()
{
    return contractlab::ModelParams{};
}

// Small pools with decreasing baseline rates (alpha[j-1] is the rate with j loans left).
inline contractlab::ModelParams pool2()
{
    contractlab::ModelParams p;
    p.I = 2;
    p.alpha = {0.06, 0.055};
    return p;
}

inline contractlab::ModelParams pool3()
{
    contractlab::ModelParams p;
    p.I = 3;
    p.alpha = {0.06, 0.055, 0.05};
    return p;
}

} // namespace fixture
