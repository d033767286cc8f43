#pragma once

// Finite-difference verification of analytic gradients. For every coordinate
// of every registered parameter the loss is evaluated at p+h and p-h and the
// central difference (f(p+h) - f(p-h)) / 2h is compared against the analytic
// value. Relative error uses |a-n| / max(1e-8, |a|+|n|); the floor keeps
// zero-gradient coordinates from dividing by zero.

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "apnet/params.hpp"

namespace apnet {

struct GradCheckEntry {
    std::string parameter;
    double max_relative_error = 0.0;
};

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::string worst_parameter;
    std::vector<GradCheckEntry> per_parameter_errors;
    bool failed = false;          // non-finite loss encountered
    std::string failure_detail;   // offending coordinate when failed

    bool ok(double tol) const { return !failed && max_relative_error <= tol; }
};

inline double fd_relative_error(double analytic, double numeric) {
    const double denom = std::max(1e-8, std::fabs(analytic) + std::fabs(numeric));
    return std::fabs(analytic - numeric) / denom;
}

// loss_fn evaluates the objective from the parameters' current values;
// analytic holds the precomputed gradient per parameter name. Parameters are
// perturbed in place and restored exactly.
inline GradCheckReport grad_check(const std::function<double()>& loss_fn,
                                  const std::vector<ParamView>& params,
                                  const Gradients& analytic, double step = 1e-5) {
    if (step <= 0.0) throw std::invalid_argument("grad_check: step must be positive");
    GradCheckReport report;
    for (const auto& view : params) {
        const auto it = analytic.find(view.name);
        GradCheckEntry entry{view.name, 0.0};
        Mat& p = *view.value;
        for (std::size_t idx = 0; idx < p.data.size(); ++idx) {
            const double saved = p.data[idx];
            p.data[idx] = saved + step;
            const double up = loss_fn();
            p.data[idx] = saved - step;
            const double down = loss_fn();
            p.data[idx] = saved;
            const std::string coord = view.name + "[" + std::to_string(idx) + "]";
            if (!std::isfinite(up) || !std::isfinite(down)) {
                report.failed = true;
                report.failure_detail = "non-finite loss at " + coord;
                report.per_parameter_errors.push_back(entry);
                return report;
            }
            const double numeric = (up - down) / (2.0 * step);
            const double a = it == analytic.end() ? 0.0 : it->second.data[idx];
            const double err = fd_relative_error(a, numeric);
            if (err > entry.max_relative_error) entry.max_relative_error = err;
            if (err > report.max_relative_error) {
                report.max_relative_error = err;
                report.worst_parameter = view.name;
            }
        }
        report.per_parameter_errors.push_back(entry);
    }
    return report;
}

}  // namespace apnet
