#pragma once

#include <stdexcept>
#include <string>

namespace cr3bp {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define CR3BP_DEFINE_ERROR(NAME)                                       \
    struct NAME : Error {                                              \
        explicit NAME(const std::string& msg = #NAME) : Error(msg) {}  \
    }

CR3BP_DEFINE_ERROR(CollisionLocus);         // xi0 too close to 1, no unregularized image
CR3BP_DEFINE_ERROR(CollisionInput);         // unregularized state at a primary
CR3BP_DEFINE_ERROR(DegenerateInput);
CR3BP_DEFINE_ERROR(OtherPrimaryCollision);  // D denominator underflow
CR3BP_DEFINE_ERROR(OutOfRange);
CR3BP_DEFINE_ERROR(SamplingFailure);
CR3BP_DEFINE_ERROR(OnBinding);
CR3BP_DEFINE_ERROR(NoReturn);
CR3BP_DEFINE_ERROR(NoConvergence);
CR3BP_DEFINE_ERROR(RegionMismatch);
CR3BP_DEFINE_ERROR(EnergyDomain);
CR3BP_DEFINE_ERROR(NonNegativeEnergy);
CR3BP_DEFINE_ERROR(SupercriticalEnergy);
CR3BP_DEFINE_ERROR(OutsidePage);
CR3BP_DEFINE_ERROR(StepFailure);
CR3BP_DEFINE_ERROR(TimeBudgetExceeded);
CR3BP_DEFINE_ERROR(ConfigError);

#undef CR3BP_DEFINE_ERROR

}  // namespace cr3bp
