#pragma once

#include <stdexcept>
#include <string>

namespace pnpsteric {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error { using Error::Error; };
class SubcriticalError : public Error { using Error::Error; };
class SupercriticalError : public Error { using Error::Error; };
class NoIntersectionError : public Error { using Error::Error; };
class EmptyDomainError : public Error { using Error::Error; };
class NonconvergenceError : public Error { using Error::Error; };
class DomainEscapeError : public Error { using Error::Error; };
class InconsistentProfileError : public Error { using Error::Error; };
class SignError : public Error { using Error::Error; };
class RootPresentError : public Error { using Error::Error; };
class BranchMismatchError : public Error { using Error::Error; };
class BoundsError : public Error { using Error::Error; };
class ConsistencyError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };

} // namespace pnpsteric
