#pragma once

#include <stdexcept>
#include <string>

namespace polyexcess {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable or structurally broken input.
class IngestError : public Error {
public:
    using Error::Error;
};

/// Bad configuration: missing columns, empty ranges, invalid options.
class ConfigError : public Error {
public:
    using Error::Error;
};

class ClassificationError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

/// A statistic was requested on a sample without spread.
class DegenerateSampleError : public Error {
public:
    using Error::Error;
};

class TrendError : public Error {
public:
    using Error::Error;
};

class BiasFactorError : public Error {
public:
    using Error::Error;
};

/// Inputs that refer to different years or strata were combined.
class UsageError : public Error {
public:
    using Error::Error;
};

class PeriodError : public Error {
public:
    using Error::Error;
};

/// No population denominator for a requested (period, stratum).
class DenominatorError : public Error {
public:
    using Error::Error;
};

}  // namespace polyexcess
