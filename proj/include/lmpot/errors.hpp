#pragma once

#include <stdexcept>
#include <string>

namespace lmpot {

// Base class for every error thrown by this library. Selector code catches
// this type to mark a candidate indeterminate instead of aborting a run.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Sample too small for the requested statistic.
class insufficient_sample_error : public error {
public:
    using error::error;
};

// Sample has (numerically) zero L-scale, so ratio statistics are undefined.
class degenerate_sample_error : public error {
public:
    using error::error;
};

// Argument outside the mathematical domain of the operation.
class domain_error : public error {
public:
    using error::error;
};

// Parameters outside the region where the required L-moments exist.
class nonexistent_moment_error : public error {
public:
    using error::error;
};

// Shape outside the region where the asymptotic variances are finite.
class nonexistent_variance_error : public error {
public:
    using error::error;
};

// Target L-moment ratios outside the attainable region of the family.
class infeasible_fit_error : public error {
public:
    using error::error;
};

// Iterative fit failed to converge within its iteration budget.
class convergence_error : public error {
public:
    using error::error;
};

// Candidate threshold grid cannot be built from the given sample.
class grid_error : public error {
public:
    using error::error;
};

// File or stream failure; message carries path context.
class io_error : public error {
public:
    using error::error;
};

} // namespace lmpot
