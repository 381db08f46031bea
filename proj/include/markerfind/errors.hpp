#pragma once

#include <stdexcept>
#include <string>

namespace mf {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied argument is out of its documented range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Geometric input is degenerate (collinear, duplicate or collapsed points).
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// A linear system or matrix inversion has no stable solution.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A projective map sends a point to the line at infinity.
class InfinityError : public Error {
public:
    using Error::Error;
};

/// A 3D point lies on or behind the camera plane.
class BehindCameraError : public Error {
public:
    using Error::Error;
};

/// Correlation is undefined because one operand has zero variance.
class UndefinedCorrelationError : public Error {
public:
    using Error::Error;
};

/// Sub-pixel refinement window carries no 2D gradient structure.
class NoStructureError : public Error {
public:
    using Error::Error;
};

/// A requested object (e.g. a chessboard) is not present in the image.
class NotFoundError : public Error {
public:
    using Error::Error;
};

/// File-system level failure (missing or unwritable file).
class IoError : public Error {
public:
    using Error::Error;
};

enum class PnmErrorKind {
    MalformedHeader,
    TruncatedPayload,
    UnsupportedMaxval,
    UnsupportedMagic,
};

class PnmParseError : public Error {
public:
    PnmParseError(PnmErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}

    PnmErrorKind kind() const noexcept { return kind_; }

private:
    PnmErrorKind kind_;
};

} // namespace mf
