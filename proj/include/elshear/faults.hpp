#pragma once

#include <stdexcept>
#include <string>

namespace elshear {

/// Base class for all recoverable numerical faults raised by the library.
class Fault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested evaluation point is inside the guard band of a pole beta_n.
class PoleFault : public Fault {
 public:
  using Fault::Fault;
};

/// Argument outside the representable range (e.g. F(s) with s not in ran G).
class RangeFault : public Fault {
 public:
  using Fault::Fault;
};

/// A quadrature, root solve or ODE step failed to reach its tolerance.
class ConvergenceFault : public Fault {
 public:
  using Fault::Fault;
};

/// A quantity required to be nonzero (transversality) is numerically zero.
class DegenerateFault : public Fault {
 public:
  using Fault::Fault;
};

/// Equation 2D(beta)=ubar has no root in the requested window.
class NoRootFault : public Fault {
 public:
  using Fault::Fault;
};

}  // namespace elshear
