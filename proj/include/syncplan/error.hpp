#pragma once

#include <stdexcept>
#include <string>

namespace syncplan {

// Base for every failure the toolkit reports. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& where, const std::string& what)
        : Error(where.empty() ? what : where + ": " + what) {}
};

class ModelError : public Error {
public:
    using Error::Error;
};

class UnsatisfiableError : public Error {
public:
    using Error::Error;
};

class NotRobustError : public Error {
public:
    using Error::Error;
};

class VerificationError : public Error {
public:
    using Error::Error;
};

class ResourceError : public Error {
public:
    using Error::Error;
};

}  // namespace syncplan
