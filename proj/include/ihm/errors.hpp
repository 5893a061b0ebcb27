#pragma once

#include <stdexcept>
#include <string>

namespace ihm {

enum class ErrorKind {
  InvalidSpec,
  EmptyPartitionClass,
  DisconnectedComplex,
  InconsistentOrientation,
  IncompleteAtVertex,
  IncompleteMetric,
  MeshQualityFailure,
  InvalidTarget,
  LineSearchFailure,
  BarrierInfeasible,
  DegreeInconsistent,
  Io,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::EmptyPartitionClass: return "EmptyPartitionClass";
    case ErrorKind::DisconnectedComplex: return "DisconnectedComplex";
    case ErrorKind::InconsistentOrientation: return "InconsistentOrientation";
    case ErrorKind::IncompleteAtVertex: return "IncompleteAtVertex";
    case ErrorKind::IncompleteMetric: return "IncompleteMetric";
    case ErrorKind::MeshQualityFailure: return "MeshQualityFailure";
    case ErrorKind::InvalidTarget: return "InvalidTarget";
    case ErrorKind::LineSearchFailure: return "LineSearchFailure";
    case ErrorKind::BarrierInfeasible: return "BarrierInfeasible";
    case ErrorKind::DegreeInconsistent: return "DegreeInconsistent";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ihm
