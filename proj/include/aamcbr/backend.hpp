#pragma once

#include <memory>
#include <semaphore>
#include <stdexcept>
#include <string>

namespace aamcbr {

struct BackendIdentity {
    std::string name;
    std::string model;

    /// "name/model"; used for cache partitioning and reports.
    std::string key() const { return name + "/" + model; }
};

class BackendFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TransportError : public BackendFailure {
public:
    using BackendFailure::BackendFailure;
};

class RateLimited : public BackendFailure {
public:
    using BackendFailure::BackendFailure;
};

class AuthFailure : public BackendFailure {
public:
    using BackendFailure::BackendFailure;
};

class UnknownScenario : public BackendFailure {
public:
    using BackendFailure::BackendFailure;
};

class UnrecognizedPromptShape : public BackendFailure {
public:
    using BackendFailure::BackendFailure;
};

/// A single-turn text completion service.
class Backend {
public:
    virtual ~Backend() = default;

    virtual std::string complete(const std::string& prompt) = 0;
    virtual BackendIdentity identity() const = 0;

    /// Backends that cannot serve concurrent calls return true; callers then
    /// issue one request at a time.
    virtual bool single_flight() const { return false; }
};

/// Caps the number of in-flight complete() calls across all users of the wrapper.
class ThrottledBackend final : public Backend {
public:
    ThrottledBackend(std::shared_ptr<Backend> inner, std::ptrdiff_t limit);

    std::string complete(const std::string& prompt) override;
    BackendIdentity identity() const override { return inner_->identity(); }
    bool single_flight() const override { return inner_->single_flight(); }

private:
    std::shared_ptr<Backend> inner_;
    std::counting_semaphore<> slots_;
};

} // namespace aamcbr
