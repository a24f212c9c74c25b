// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace qpm {

// Every failure carries a stable name; the CLI prints it and exits 1.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

#define QPM_DEFINE_ERROR(Name)                                     \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  };

QPM_DEFINE_ERROR(InvalidSpec)
QPM_DEFINE_ERROR(OutOfRange)
QPM_DEFINE_ERROR(NonFinite)
QPM_DEFINE_ERROR(InconsistentInitialConditions)
QPM_DEFINE_ERROR(DefectiveMatrix)
QPM_DEFINE_ERROR(SingularSimilarity)
QPM_DEFINE_ERROR(NotHermitianLimit)
QPM_DEFINE_ERROR(SingularAtFrequency)
QPM_DEFINE_ERROR(UnsupportedDrive)
QPM_DEFINE_ERROR(MalformedXYZ)
QPM_DEFINE_ERROR(CountMismatch)
QPM_DEFINE_ERROR(CoincidentAtoms)
QPM_DEFINE_ERROR(ThermalSingularity)
QPM_DEFINE_ERROR(ResonantFrequency)
QPM_DEFINE_ERROR(ZeroMode)
QPM_DEFINE_ERROR(SingularEffectiveSigma)
QPM_DEFINE_ERROR(SingularAuxiliary)
QPM_DEFINE_ERROR(LightConeSingularity)
QPM_DEFINE_ERROR(FrequencyNotCovered)
QPM_DEFINE_ERROR(MalformedModel)

#undef QPM_DEFINE_ERROR

}  // namespace qpm
