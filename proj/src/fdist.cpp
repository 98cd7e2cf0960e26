#include <boost/math/distributions/fisher_f.hpp>

#include "pcac/error.hpp"
#include "pcac/rls.hpp"

namespace pcac {

double f_inverse_cdf(double probability, double d1, double d2) {
    if (!(probability >= 0.0 && probability <= 1.0) || !(d1 > 0.0) || !(d2 > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "F quantile needs p in [0,1] and positive dof");
    }
    if (probability == 0.0) return 0.0;
    boost::math::fisher_f_distribution<double> dist(d1, d2);
    return boost::math::quantile(dist, probability);
}

}  // namespace pcac
