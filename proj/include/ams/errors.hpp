#ifndef AMS_ERRORS_HPP
#define AMS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ams {

// Error categories map 1:1 to CLI exit codes.
enum class ErrorCategory : int {
    Config = 2,
    Data = 3,
    Degenerate = 4,
    Internal = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory cat, const std::string& what)
        : std::runtime_error(what), category_(cat) {}
    ErrorCategory category() const { return category_; }
    int exit_code() const { return static_cast<int>(category_); }

private:
    ErrorCategory category_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorCategory::Config, what) {}
};

// Parameters outside a model's or calibration's admissible domain.
struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(ErrorCategory::Config, what) {}
};

// A scale restriction left no scanning candidates.
struct EmptySystem : Error {
    explicit EmptySystem(const std::string& what) : Error(ErrorCategory::Config, what) {}
};

struct SizeError : Error {
    explicit SizeError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

struct ShapeError : Error {
    explicit ShapeError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

struct NegativeCount : Error {
    explicit NegativeCount(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

struct CacheCorrupt : Error {
    explicit CacheCorrupt(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

// Data admits no usable estimate (e.g. zero sample variance); downstream
// standardization would be meaningless, so scanning aborts.
struct DegenerateData : Error {
    explicit DegenerateData(const std::string& what) : Error(ErrorCategory::Degenerate, what) {}
};

}  // namespace ams

#endif
