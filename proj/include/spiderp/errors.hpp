#pragma once

#include <stdexcept>
#include <string>

namespace spiderp {

// Base for all pipeline errors. `code()` is the stable machine-readable
// name used by the CLI's single-line error output.
class SpiderpError : public std::runtime_error {
public:
    SpiderpError(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

#define SPIDERP_DEFINE_ERROR(Name)                                       \
    class Name : public SpiderpError {                                   \
    public:                                                              \
        explicit Name(const std::string& what)                           \
            : SpiderpError(#Name, what) {}                               \
    }

// signal_core
SPIDERP_DEFINE_ERROR(MissingFile);
SPIDERP_DEFINE_ERROR(LengthMismatch);
SPIDERP_DEFINE_ERROR(BadSamplingRate);
SPIDERP_DEFINE_ERROR(NoPeaksFound);
SPIDERP_DEFINE_ERROR(TooFewPeaks);
SPIDERP_DEFINE_ERROR(DeadChannel);
SPIDERP_DEFINE_ERROR(RecordTooShort);

// fear_model
SPIDERP_DEFINE_ERROR(DegenerateLabels);
SPIDERP_DEFINE_ERROR(NonFiniteLoss);
SPIDERP_DEFINE_ERROR(TooFewSubjects);
SPIDERP_DEFINE_ERROR(NonFiniteFeature);

// mkde
SPIDERP_DEFINE_ERROR(BadKernelSpec);
SPIDERP_DEFINE_ERROR(NonBinaryInput);
SPIDERP_DEFINE_ERROR(ZeroVarianceFeature);
SPIDERP_DEFINE_ERROR(TooFewSamples);
SPIDERP_DEFINE_ERROR(NonFiniteInput);
SPIDERP_DEFINE_ERROR(OutOfRange);

// io
SPIDERP_DEFINE_ERROR(IoError);

#undef SPIDERP_DEFINE_ERROR

}  // namespace spiderp
