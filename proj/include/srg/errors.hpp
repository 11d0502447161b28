#pragma once

#include <stdexcept>
#include <string>

namespace srg {

/// Malformed user input (files, documents, flags). The message names the
/// offending field where one exists.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rational function evaluated exactly at one of its poles.
class EvaluationAtPole : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Winding number requested for a point lying on the contour.
class BoundaryAmbiguity : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Angle sum of a winding computation did not land near an integer.
class UnderSampledContour : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Jump-rate cap exceeded.
class ZenoError : public SimulationError {
 public:
  ZenoError(double time, std::size_t jumps)
      : SimulationError("Zeno-like behaviour: " + std::to_string(jumps) +
                        " jumps by t=" + std::to_string(time)),
        time(time) {}
  double time;
};

class HorizonTooShort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace srg
