#include "endscope/builtin_ends.hpp"

namespace endscope {

ModelEnd euclidean_end(int m) {
    return ModelEnd::warped(m, 1.0, ProfileFn::constant(1.0), ProfileFn::power(1.0),
                            unit_sphere_volume(m - 1), Extrinsic::Minimal);
}

ModelEnd cylinder_end(int m) { return make_revolution_end(ProfileFn::constant(1.0), m, 0.0); }

ModelEnd exp_warp_end(int m) {
    return ModelEnd::warped(m, 0.0, ProfileFn::constant(1.0), ProfileFn::exp_warp(-1.0), 1.0,
                            Extrinsic::Intrinsic);
}

ModelEnd power_parabolic_end(int m) {
    return make_revolution_end(ProfileFn::power(1.0 / (m - 1)), m, 1.0);
}

ModelEnd gaussian_neck_end(int m) {
    return make_revolution_end(ProfileFn::gaussian_neck(1.0), m, 0.0);
}

ModelEnd power_family_end(int m, double alpha) {
    return make_revolution_end(ProfileFn::power(alpha), m, 1.0);
}

std::vector<NamedEnd> builtin_ends(int m) {
    return {
        {"euclidean", euclidean_end(m)},
        {"cylinder", cylinder_end(m)},
        {"exp_warp", exp_warp_end(m)},
        {"power_parabolic", power_parabolic_end(m)},
        {"gaussian_neck", gaussian_neck_end(m)},
    };
}

}  // namespace endscope
