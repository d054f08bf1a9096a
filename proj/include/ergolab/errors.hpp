#pragma once

#include <stdexcept>
#include <string>

namespace ergolab {

// Base for all library errors. name() is the stable identifier used in
// CLI reports and exit-code mapping.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(what), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define ERGOLAB_DEFINE_ERROR(Type)                                  \
    class Type : public Error {                                     \
    public:                                                         \
        explicit Type(const std::string& what) : Error(#Type, what) {} \
    }

ERGOLAB_DEFINE_ERROR(GroupMismatch);
ERGOLAB_DEFINE_ERROR(ShapeMismatch);
ERGOLAB_DEFINE_ERROR(PartitionTooFine);
ERGOLAB_DEFINE_ERROR(PatternSpaceTooLarge);
ERGOLAB_DEFINE_ERROR(BudgetExceeded);
ERGOLAB_DEFINE_ERROR(ToleranceUnreachable);
ERGOLAB_DEFINE_ERROR(NonFree);
ERGOLAB_DEFINE_ERROR(NoAlmostInvariantSetAvailable);
ERGOLAB_DEFINE_ERROR(NotEquivariant);
ERGOLAB_DEFINE_ERROR(NotMeasurePreserving);
ERGOLAB_DEFINE_ERROR(MonotonicityViolation);
ERGOLAB_DEFINE_ERROR(ConfigError);
ERGOLAB_DEFINE_ERROR(IoError);

#undef ERGOLAB_DEFINE_ERROR

}  // namespace ergolab
