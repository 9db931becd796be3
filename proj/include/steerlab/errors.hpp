#pragma once

#include <stdexcept>
#include <string>

namespace steerlab {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Total damping of an oscillator is not positive (no steady state).
class UnstableConfig : public Error {
 public:
  using Error::Error;
};

// Channel power loss outside [0, 1].
class ChannelLossOutOfRange : public Error {
 public:
  using Error::Error;
};

// Cooperativity requested with zero thermal decoherence rate.
class CooperativityUndefined : public Error {
 public:
  using Error::Error;
};

// A quadrature variance required as a divisor is zero.
class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

class DivisionByZeroRatio : public Error {
 public:
  using Error::Error;
};

// Closed-form moments are only available for phi = 0.
class PhaseUnsupported : public Error {
 public:
  using Error::Error;
};

class NotHurwitz : public Error {
 public:
  using Error::Error;
};

class SolverSingular : public Error {
 public:
  using Error::Error;
};

// Integrator step violates the stiffness guard dt*max|eig(A)| < 0.1.
class StiffStep : public Error {
 public:
  using Error::Error;
};

class RiccatiNoPSDSolution : public Error {
 public:
  using Error::Error;
};

// No stable point inside the optimization box.
class EmptyFeasibleSet : public Error {
 public:
  using Error::Error;
};

// A quantity violated a bound that physical inputs cannot violate.
class InternalConsistency : public Error {
 public:
  using Error::Error;
};

// Generic invalid argument (bad ranges, non-finite values, schema errors).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

}  // namespace steerlab
