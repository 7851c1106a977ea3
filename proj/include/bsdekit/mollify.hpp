#pragma once

#include <functional>

namespace bsdekit {

// Lipschitz regularization of a monotone non-increasing driver h:
//   h_n = (bump kernel at scale 1/n) * (plateau cutoff . rescaled h),
// where the rescaling is h~(y) = n h(y) / max(n, |h(0)|) and the cutoff is 1
// on [-m, m], 0 outside [-m-1, m+1] (C^1 cubic ramp between), with
// m = radius(n + 1).
struct MollifierSpec {
    int n = 8;            // regularization level
    double l_q = 1.0;     // growth constant of the driver family
    double horizon = 1.0; // time horizon entering the default radius
    int quad_points = 129; // composite-Simpson nodes on the kernel support (odd)
    std::function<int(int)> radius_fn; // defaults to default_radius

    static int default_radius(int n, double l_q, double horizon);
    int radius(int level) const;
};

// Numerical convolution via composite Simpson on the kernel support; the
// kernel normalization uses the same quadrature rule, so constants are
// reproduced exactly and fixed sample offsets preserve monotonicity exactly.
std::function<double(double)>
build_mollified(const std::function<double(double)>& h, const MollifierSpec& spec);

// Max finite-difference slope magnitude of g over a uniform sample grid.
double lipschitz_estimate(const std::function<double(double)>& g, double lo,
                          double hi, int samples);

// Max of (y - y')(h(y) - h(y')) over sampled pairs in [-radius, radius];
// <= 0 certifies monotone non-increase on the ball.
double local_monotonicity_check(const std::function<double(double)>& h_n,
                                double radius, int samples);

} // namespace bsdekit
