#pragma once

#include <vector>

#include "invasionlab/core.hpp"

namespace invasionlab {

/// Comoving front profile sampled on grid, interface near xi = 0.
struct FrontProfile {
    Grid grid;
    std::vector<double> u_ps;
    std::vector<double> w_ps;
    double c_ps = 0.0;
    double eta_ps = 0.0;
    double alignment_residual = 0.0;
};

}  // namespace invasionlab
