#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace dv {

// Base class for every error this library throws.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A structured document (trajectory, task, taxonomy, config, ...) violated
// its schema. The message names the offending field.
class SchemaError : public Error {
public:
    using Error::Error;
};

// A value fell outside its documented domain (e.g. a rubric score outside 1-4).
class RangeError : public Error {
public:
    using Error::Error;
};

// Model output did not match the required line format. Stages catch this,
// retry once with a format reminder, and escalate to StageError.
class ParseError : public Error {
public:
    using Error::Error;
};

// A pipeline stage failed for good (after the one-shot format reminder).
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

class GatewayError : public Error {
public:
    enum class Kind { unscripted, cassette_miss, transport, timeout, http };

    GatewayError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

class StoreError : public Error {
public:
    using Error::Error;
};

class CurationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// The solving agent failed to produce an answer for a round.
class PolicyError : public Error {
public:
    using Error::Error;
};

}  // namespace dv
