#ifndef JFTO_ERRORS_HPP
#define JFTO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace jfto {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rotation at or beyond the axis-angle chart boundary (angle >= pi - tol).
struct ChartSingularity : Error {
    using Error::Error;
};

struct ShapeMismatch : Error {
    using Error::Error;
};

struct JointLimit : Error {
    using Error::Error;
};

struct NoGraspsFound : Error {
    using Error::Error;
};

// Perturbation noise too small to ever produce an infeasible grasp.
struct DegenerateNoise : Error {
    using Error::Error;
};

struct EmptyDemoGrasps : Error {
    using Error::Error;
};

struct EmptyDemoSet : Error {
    using Error::Error;
};

struct EmptyCloud : Error {
    using Error::Error;
};

struct LengthMismatch : Error {
    using Error::Error;
};

struct SchemaVersionMismatch : Error {
    using Error::Error;
};

struct ValidationFailure : Error {
    ValidationFailure(const std::string& field, const std::string& what)
        : Error(field + ": " + what), field_path(field) {}
    std::string field_path;
};

// A pipeline stage input is missing; `producer` names the subcommand that
// creates it.
struct MissingArtifact : Error {
    MissingArtifact(const std::string& producer_cmd, const std::string& what)
        : Error(what + " (produced by `" + producer_cmd + "`)"),
          producer(producer_cmd) {}
    std::string producer;
};

} // namespace jfto

#endif
