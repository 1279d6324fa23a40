#pragma once

#include <stdexcept>
#include <string>

namespace pclwater {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// tiling / divisibility failures; message names the offending axis
struct AlignmentError : Error {
    using Error::Error;
};

// rectangles or footprints outside their source bounds
struct GeometryError : Error {
    using Error::Error;
};

// mismatched grid dimensions
struct ShapeError : Error {
    using Error::Error;
};

// invalid loss or configuration parameters
struct ParamError : Error {
    using Error::Error;
};

// malformed files; message carries a byte offset where known
struct FormatError : Error {
    using Error::Error;
};

// stitching input leaves output pixels uncovered
struct CoverageError : Error {
    using Error::Error;
};

struct ManifestError : Error {
    using Error::Error;
};

// diagnostics requested on inputs that cannot produce one
struct DiagnosticError : Error {
    using Error::Error;
};

} // namespace pclwater
