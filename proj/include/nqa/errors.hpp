#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace nqa {

/// Malformed or inconsistent input structure (unknown letter, unknown state, ...).
class InvalidInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Text-format syntax error with a 1-based source position.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t line, std::size_t column)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
          line_(line), column_(column), message_(msg) {}
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }
    const std::string& message() const { return message_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string message_;
};

/// The (f, g, problem) combination has no known decision procedure.
class UnsupportedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The (f, g, problem) combination is undecidable.
class UndecidableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An explicit exploration exceeded its configured capacity.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Timeout : public std::runtime_error {
public:
    Timeout() : std::runtime_error("timeout") {}
};

/// Cooperative cancellation: long-running loops call poll(), which throws Timeout
/// once the deadline has passed. The clock is sampled every 1024 polls.
class Cancellation {
public:
    Cancellation() = default;
    explicit Cancellation(std::chrono::steady_clock::duration budget)
        : deadline_(std::chrono::steady_clock::now() + budget), armed_(true) {}

    void poll() {
        if (!armed_ || (++counter_ & 1023u) != 0) return;
        if (std::chrono::steady_clock::now() > deadline_) throw Timeout();
    }

private:
    std::chrono::steady_clock::time_point deadline_{};
    std::uint64_t counter_ = 0;
    bool armed_ = false;
};

inline void poll(Cancellation* c) {
    if (c != nullptr) c->poll();
}

}  // namespace nqa
