#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace promptgauge {

// Base class for every error the toolkit raises on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad argument values: empty inputs, out-of-range outcomes, malformed shapes.
struct InvalidInputError : Error {
    using Error::Error;
};

// An operation needs gold labels but the table carries none.
struct MissingLabelsError : Error {
    using Error::Error;
};

// A class-level operation was asked about a class with zero samples.
struct EmptyClassError : Error {
    using Error::Error;
};

// The task spec lacks fields the chosen prompting strategy requires.
struct SpecIncompleteError : Error {
    using Error::Error;
};

// A file could not be parsed. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::size_t line = 0)
        : Error(what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Semantic validation failures: duplicate ids, unknown labels, shape mismatches.
struct ValidationError : Error {
    using Error::Error;
};

// HTTP-level failure: retries exhausted or a non-retryable status.
class TransportError : public Error {
public:
    explicit TransportError(const std::string& what, int status = 0)
        : Error(what), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

// The endpoint answered, but the body violated the chat-completions schema.
struct ProtocolError : Error {
    using Error::Error;
};

// The response cache could not be read or written.
struct StorageError : Error {
    using Error::Error;
};

// A persisted artifact declares a schema version this build does not know.
struct FormatVersionError : Error {
    using Error::Error;
};

}  // namespace promptgauge
