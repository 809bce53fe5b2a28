#pragma once

#include <stdexcept>
#include <string>

namespace pft {

/// Base of every error thrown by the library. `kind()` is a stable tag for
/// reporting (e.g. "NotSpacelike").
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define PFT_ERROR(Name)                                                    \
    class Name : public Error {                                            \
    public:                                                                \
        explicit Name(const std::string& what) : Error(#Name, what) {}     \
    }

PFT_ERROR(InvalidLattice);
PFT_ERROR(NotSpacelike);
PFT_ERROR(InvalidEmbedding);
PFT_ERROR(DimensionMismatch);
PFT_ERROR(CurvedEmbedding);
PFT_ERROR(SingularConformalMap);
PFT_ERROR(NonTimelikeDeformation);
PFT_ERROR(MassiveField);
PFT_ERROR(StepTooLarge);
PFT_ERROR(LeafMismatch);
PFT_ERROR(FrameMismatch);
PFT_ERROR(ModeOutOfRange);
PFT_ERROR(UnreachableEmbedding);
PFT_ERROR(DeformationNotSpacelike);
PFT_ERROR(DegenerateInput);
PFT_ERROR(InvalidEnsemble);
PFT_ERROR(FamilyInconsistent);
PFT_ERROR(ConfigError);
PFT_ERROR(ExperimentError);

#undef PFT_ERROR

}  // namespace pft
