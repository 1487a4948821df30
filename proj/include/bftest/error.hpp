#pragma once

#include <stdexcept>
#include <string>

namespace bftest {

// Base of every error the library raises; subclasses carry the kind.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "Error"; }
};

#define BFTEST_DEFINE_ERROR(Name)                                         \
    class Name : public Error {                                           \
    public:                                                               \
        using Error::Error;                                               \
        const char* kind() const noexcept override { return #Name; }      \
    };

BFTEST_DEFINE_ERROR(RankDeficient)
BFTEST_DEFINE_ERROR(Singular)
BFTEST_DEFINE_ERROR(SingularK)
BFTEST_DEFINE_ERROR(DimensionMismatch)
BFTEST_DEFINE_ERROR(DomainViolation)
BFTEST_DEFINE_ERROR(DomainError)
BFTEST_DEFINE_ERROR(NotConverged)
BFTEST_DEFINE_ERROR(ConfigurationError)

#undef BFTEST_DEFINE_ERROR

}  // namespace bftest
