#pragma once

#include <stdexcept>
#include <string>

namespace fakeres {

// Base class for every error thrown by this library. CLI layers map
// subclasses to process exit codes, so new error types should derive from
// one of the categories below rather than from toolkit_error directly.
class toolkit_error : public std::runtime_error {
public:
    explicit toolkit_error(const std::string& what) : std::runtime_error(what) {}
};

// An index is outside the valid 1-based range of a grid axis.
class range_error : public toolkit_error {
public:
    using toolkit_error::toolkit_error;
};

// A physical coordinate lies outside the grid domain.
class domain_error : public toolkit_error {
public:
    using toolkit_error::toolkit_error;
};

// A configuration value is invalid (non-positive spacing, bad kernel name, ...).
class parameter_error : public toolkit_error {
public:
    using toolkit_error::toolkit_error;
};

// Source and target of a resampling plan are inconsistent.
class plan_error : public toolkit_error {
public:
    using toolkit_error::toolkit_error;
};

// Input data violates a precondition (shape mismatch, bad label range, ...).
class input_error : public toolkit_error {
public:
    using toolkit_error::toolkit_error;
};

// A segment referenced by the mask contains no voxels.
class empty_segment_error : public input_error {
public:
    empty_segment_error(int label, const std::string& what)
        : input_error(what), label_(label) {}
    int label() const { return label_; }

private:
    int label_;
};

// A file's contents do not match the expected on-disk format.
class format_error : public toolkit_error {
public:
    using toolkit_error::toolkit_error;
};

// The operating system reported an I/O failure.
class io_error : public toolkit_error {
public:
    using toolkit_error::toolkit_error;
};

// A generated geometric construction is degenerate or self-intersecting.
class geometry_error : public toolkit_error {
public:
    using toolkit_error::toolkit_error;
};

// Clustering could not produce the requested number of classes.
class clustering_error : public toolkit_error {
public:
    using toolkit_error::toolkit_error;
};

// A computation produced non-finite values or an undefined quantity.
class numeric_error : public toolkit_error {
public:
    using toolkit_error::toolkit_error;
};

} // namespace fakeres
