#pragma once

#include <stdexcept>
#include <string>

namespace grouptree {

/// Invalid or inconsistent run configuration (bad keys, missing input files).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Input data violates a contract (empty panel, no alignable dates, ...).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// A file failed to parse; carries the 1-based line number when known.
class ParseError : public DataError {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : DataError(line ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Nonfatal diagnostics (excluded tickers, dropped samples) go to stderr.
void warn(const std::string& message);

}  // namespace grouptree
