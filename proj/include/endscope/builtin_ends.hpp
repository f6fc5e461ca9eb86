#pragma once

#include <string>
#include <vector>

#include "endscope/model_end.hpp"

namespace endscope {

struct NamedEnd {
    std::string name;
    ModelEnd end;
};

/// Flat end {|x| >= 1} of R^m: a = 1, g = t on [1, inf), |H| = 0.
ModelEnd euclidean_end(int m);

/// Round cylinder S^{m-1} x [0, inf) in R^{m+1}: f = 1, |H| = (m-1)/m.
ModelEnd cylinder_end(int m);

/// R x_{e^t} P over (-inf, 0], written in u = -t so that it starts at
/// u = 0: a = 1, g = e^{-u}, vol(P) = 1.  Intrinsic.
ModelEnd exp_warp_end(int m);

/// Revolution end f(t) = t^{1/(m-1)} on [1, inf).
ModelEnd power_parabolic_end(int m);

/// Revolution end f(t) = exp(-t^2) on [0, inf); finite volume.
ModelEnd gaussian_neck_end(int m);

/// Revolution end f(t) = t^alpha on [1, inf).
ModelEnd power_family_end(int m, double alpha);

/// The five built-in ends for dimension m, in a fixed order.
std::vector<NamedEnd> builtin_ends(int m);

}  // namespace endscope
