#pragma once

#include <stdexcept>
#include <string>

namespace grh {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Geometry and point-location failures (CLI exit code 2).
class DomainError : public Error {
public:
    using Error::Error;
};

class PointOutside : public DomainError {
public:
    explicit PointOutside(const std::string& what) : DomainError("point outside domain: " + what) {}
};

class NotBoundary : public DomainError {
public:
    explicit NotBoundary(const std::string& what) : DomainError("not a boundary point: " + what) {}
};

class ProbeOutside : public DomainError {
public:
    explicit ProbeOutside(const std::string& what) : DomainError("probe outside body: " + what) {}
};

class EmptyClip : public DomainError {
public:
    explicit EmptyClip(const std::string& what) : DomainError("body misses clip ball: " + what) {}
};

class BallNotContained : public DomainError {
public:
    explicit BallNotContained(const std::string& what) : DomainError("ball not contained: " + what) {}
};

class ChartEscape : public DomainError {
public:
    explicit ChartEscape(const std::string& what) : DomainError("image leaves the affine chart: " + what) {}
};

// Numerical / algebraic preconditions.
class DegenerateConfiguration : public Error {
public:
    explicit DegenerateConfiguration(const std::string& what) : Error("degenerate configuration: " + what) {}
};

class NonDiagonalizableBeyondTolerance : public Error {
public:
    explicit NonDiagonalizableBeyondTolerance(const std::string& what)
        : Error("defective dominant eigenvalue cluster: " + what) {}
};

class NotOrthogonal : public Error {
public:
    explicit NotOrthogonal(const std::string& what) : Error("matrix is not orthogonal: " + what) {}
};

class ConvergenceNotReached : public Error {
public:
    explicit ConvergenceNotReached(const std::string& what) : Error("convergence not reached: " + what) {}
};

class WitnessNotFound : public Error {
public:
    explicit WitnessNotFound(const std::string& what) : Error("witness not found: " + what) {}
};

// Malformed descriptors and configs (CLI exit code 3).
class DescriptorError : public Error {
public:
    explicit DescriptorError(const std::string& what) : Error("descriptor error: " + what) {}
};

} // namespace grh
