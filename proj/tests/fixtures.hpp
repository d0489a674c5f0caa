#pragma once

#include <cmath>

#include "invasionlab/front.hpp"
#include "invasionlab/stepper.hpp"
#include "invasionlab/wavetrain.hpp"

namespace fixtures {

using namespace invasionlab;

inline const Params kStd{0.1, 2.0, 0.01};
inline constexpr double kFrame = 0.72;

/// Comoving run at 0.72 from a smoothed step, t = 300 on [-200, 100].
inline const Trajectory& short_run() {
    static const Trajectory tr = [] {
        const Grid g = make_grid(-200.0, 100.0, 0.1);
        State s = State::zeros(g);
        for (int i = 0; i < g.n; ++i) s.u[i] = 0.45 * (1.0 - std::tanh(g.x(i) + 20.0));
        SchemeConfig cfg;
        cfg.frame_speed = kFrame;
        cfg.t_end = 300.0;
        cfg.record_every = 50;
        return run(s, kStd, cfg, {});
    }();
    return tr;
}

inline const FrontProfile& short_front() {
    static const FrontProfile fp = [] {
        ExtractOptions eo;
        eo.frame_speed = kFrame;
        return extract_front(short_run(), kStd, eo);
    }();
    return fp;
}

inline const WaveTrain& wave_train(int m = 128) {
    static const HomogeneousOrbit orb = homogeneous_oscillation(kStd);
    static const WaveTrain wt128 = solve_wavetrain(kStd, short_front().c_ps, wavetrain_from_orbit(orb, short_front().c_ps, 128));
    static const WaveTrain wt256 = solve_wavetrain(kStd, short_front().c_ps, resample_wavetrain(wt128, 256));
    return m == 256 ? wt256 : wt128;
}

}  // namespace fixtures
