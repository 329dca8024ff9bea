#include "qdeloc/replicatn.hpp"

#include <doctest.h>

#include <cmath>

using namespace qdeloc;

// Tightening the cutoff by a decade must leave the benchmark series unchanged.
TEST_CASE("result is stable when the cutoff is tightened") {
    tn::TnOptions loose, tight;
    loose.eps = 1e-15;
    tight.eps = 1e-16;
    const auto a = tn::averaged_ipr_series(2, 2, 64, 35, loose);
    const auto b = tn::averaged_ipr_series(2, 2, 64, 35, tight);
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::fabs(a[k].value / b[k].value - 1.0));
    MESSAGE("largest relative change " << worst);
    CHECK(worst < 1e-9);
}
