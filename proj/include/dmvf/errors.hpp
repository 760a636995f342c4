#pragma once

#include <stdexcept>
#include <string>

namespace dmvf {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid user-supplied configuration (bad requirement counts, period < 1, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Filesystem-level failure; message carries the offending path.
class IoError : public Error {
public:
    using Error::Error;
};

// Scene files that parse but contradict each other.
class FormatError : public Error {
public:
    using Error::Error;
};

class DimensionMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};

class TruncatedFileError : public FormatError {
public:
    using FormatError::FormatError;
};

class CountMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};

// Topology problems: disconnected graph, unreachable generator target.
class GraphError : public Error {
public:
    using Error::Error;
};

// A message was enqueued along a non-edge; indicates a protocol bug upstream.
class ProtocolError : public Error {
public:
    using Error::Error;
};

// Non-finite values showed up in an iterative solver or during training.
class DivergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace dmvf
