#pragma once

#include <stdexcept>
#include <string>

namespace mks {

// Error taxonomy shared by the library and the CLI. The CLI maps each family
// to a process exit code: argument -> 2, format -> 3, numerical -> 4,
// dependency -> 5.

class ArgumentError : public std::invalid_argument {
public:
    explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

class StateError : public ArgumentError {
public:
    explicit StateError(const std::string& what) : ArgumentError(what) {}
};

class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Rejection sampling could not reach the configured acceptance rate.
class GenerationStallError : public NumericalError {
public:
    explicit GenerationStallError(const std::string& what) : NumericalError(what) {}
};

// An ensemble statistic needed as a scale factor came out exactly zero.
class DegenerateEnsembleError : public NumericalError {
public:
    explicit DegenerateEnsembleError(const std::string& what) : NumericalError(what) {}
};

// Metric is mathematically undefined for the given targets (constant y_true).
class UndefinedMetricError : public NumericalError {
public:
    explicit UndefinedMetricError(const std::string& what) : NumericalError(what) {}
};

class DependencyError : public std::runtime_error {
public:
    explicit DependencyError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mks
