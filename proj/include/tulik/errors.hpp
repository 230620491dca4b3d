#pragma once

#include <stdexcept>
#include <string>

namespace tulik {

// Base class for all library errors.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad call arguments: indices out of range, shape mismatches, invalid windows.
class argument_error : public error {
public:
    using error::error;
};

// Inputs outside a function's mathematical domain (e.g. nonpositive link argument).
class domain_error : public error {
public:
    using error::error;
};

// Non-finite values produced or encountered during numerics.
class numeric_error : public error {
public:
    using error::error;
};

// File-format or data-consistency failures.
class data_error : public error {
public:
    using error::error;
};

// Nonpositive conditional intensity where the model requires a positive one.
// Carries the offending time step (math index) and node (-1 for time-only or
// when the violation is in the summed intensity).
class infeasible_error : public error {
public:
    infeasible_error(const std::string& what, int t, int node = -1)
        : error(what), t_(t), node_(node) {}

    int t() const noexcept { return t_; }
    int node() const noexcept { return node_; }

private:
    int t_;
    int node_;
};

// Baseline stationarity equation has no root on the search bracket.
class no_root_error : public error {
public:
    using error::error;
};

// Baseline stationarity equation stays positive for arbitrarily large baselines.
class unbounded_error : public error {
public:
    using error::error;
};

} // namespace tulik
