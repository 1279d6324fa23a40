#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pclwater {

struct GradCheck {
    std::string name;
    double max_rel = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheck> checks;
    double max_rel = 0.0;

    bool pass(double tol) const { return max_rel <= tol; }
};

// Central finite differences against every analytic gradient path: the three
// loss kernels (every input map), the classifier parameters, the confidence
// resampler's adjoint, and the chain through resampling into the pairwise
// loss. Each round draws fresh maps in [0.1, 0.9] and cycles the focal
// exponent through 2, 0, 1, 3. Relative error per map is
// maxAbsDiff / max(1e-12, ||analytic||_inf, ||fd||_inf).
GradCheckReport run_gradcheck(std::uint64_t seed, int rounds, int size, double step);

} // namespace pclwater
