// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace hnoma {

/// Requested symbol factor has no fitted parameters in the registry.
class missing_parameter : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Target BLEU score is at or above the asymptote of the logistic curve.
class infeasible_target : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Regression input is degenerate (too few points or constant response).
class fit_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Closed-form beam solution is infeasible; the caller must fall back to
/// the numerical span solver.
class not_quasi_degraded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-cluster bandwidth floors cannot fit inside the total budget.
class infeasible_bandwidth : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No symbol factor in the registry passes the feasibility screens.
class no_feasible_k : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Grid verifier invoked with more clusters than it supports.
class unsupported_dimension : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Experiment configuration is malformed (unknown key, bad value, ...).
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hnoma
