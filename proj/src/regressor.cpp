#include "rampc/mpc.hpp"

#include "rampc/errors.hpp"
#include "rampc/kernels.hpp"

namespace rampc {

const char* to_string(Variant v) { return v == Variant::Rampc ? "rampc" : "ampc"; }

void MpcConfig::validate() const {
    if (horizon < 1) throw ConfigError("prediction horizon must be at least 1");
    if (model_length < 1) throw ConfigError("model length must be at least 1");
    if (facet_count < 2 * model_length) {
        throw ConfigError("facet count must be at least 2m");
    }
    if (window_size < 1) throw ConfigError("window size must be at least 1");
    if (input_weight < 0.0 || input_rate_weight < 0.0) {
        throw ConfigError("input penalties must be nonnegative");
    }
}

Vector RegressorPlan::eval(std::size_t idx, const Vector& u) const {
    Vector phi = past[idx];
    const Matrix& c = coeff[idx];
    for (std::size_t l = 0; l < phi.size(); ++l) {
        phi[l] += kernels::dot(c.row(l), u.data(), u.size());
    }
    return phi;
}

RegressorPlan build_regressor_plan(const Vector& past_inputs, const MpcConfig& cfg) {
    const int n = cfg.horizon;
    const int m = cfg.model_length;
    RegressorPlan plan;
    plan.horizon = n;
    plan.model_length = m;
    const int count = n + m - 1;  // prediction offsets 0 .. N+m-2
    plan.past.assign(count, Vector(m, 0.0));
    plan.coeff.assign(count, Matrix(m, n));
    for (int idx = 0; idx < count; ++idx) {
        for (int l = 0; l < m; ++l) {
            const int k = idx - l;  // decision offset of lag l at prediction offset idx
            if (k >= n) {
                plan.coeff[idx](l, n - 1) += 1.0;  // held terminal input
            } else if (k >= 0) {
                plan.coeff[idx](l, k) += 1.0;
            } else {
                const std::size_t back = static_cast<std::size_t>(-k - 1);
                if (back < past_inputs.size()) plan.past[idx][l] = past_inputs[back];
            }
        }
    }
    return plan;
}

} // namespace rampc
