// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace eager {

// Error taxonomy mirrored by the C API status codes and the CLI exit codes:
// invalid_input -> 2, io/runtime -> 3.
enum class ErrKind { invalid_input, io, runtime };

class Error : public std::runtime_error {
public:
    Error(ErrKind kind, std::string msg) : std::runtime_error(std::move(msg)), kind_(kind) {}
    ErrKind kind() const { return kind_; }

    template <typename... Args>
    static Error invalid(Args&&... args) { return Error(ErrKind::invalid_input, cat(std::forward<Args>(args)...)); }
    template <typename... Args>
    static Error io(Args&&... args) { return Error(ErrKind::io, cat(std::forward<Args>(args)...)); }
    template <typename... Args>
    static Error runtime(Args&&... args) { return Error(ErrKind::runtime, cat(std::forward<Args>(args)...)); }

    template <typename... Args>
    static std::string cat(Args&&... args) {
        std::ostringstream os;
        (os << ... << args);
        return os.str();
    }

private:
    ErrKind kind_;
};

// SHA-256 of a byte string, hex-encoded. Used for config provenance hashes.
std::string sha256_hex(const std::string& data);

// Parallelism budget: min(requested, EAGER_THREADS) when the env var is set,
// else the requested count (0 = hardware concurrency).
unsigned thread_budget(unsigned requested = 0);

// Runs fn(i) for i in [0, n) on up to thread_budget() threads. Exceptions from
// workers are rethrown on the calling thread. Falls back to a plain loop when
// only one thread is available.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace eager
