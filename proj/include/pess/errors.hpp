#pragma once

#include <stdexcept>
#include <string>

namespace pess {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error { public: using Error::Error; };
class IndexOutOfRange : public Error { public: using Error::Error; };
class NotPositiveDefinite : public Error { public: using Error::Error; };
class Singular : public Error { public: using Error::Error; };
class ConvergenceFailure : public Error { public: using Error::Error; };
class SizeGuardExceeded : public Error { public: using Error::Error; };
class InapplicableBound : public Error { public: using Error::Error; };
class FullRankViolation : public Error { public: using Error::Error; };
class InvalidArgument : public Error { public: using Error::Error; };
class ParseError : public Error { public: using Error::Error; };
class Diverged : public Error { public: using Error::Error; };

template <class E>
inline void require(bool ok, const std::string& what) {
    if (!ok) throw E(what);
}

/// Largest order allowed for any densified operator.
inline constexpr std::size_t kDenseSizeGuard = 5000;

} // namespace pess
