#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace chainlift {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller supplied an argument outside the documented range.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not produce a trustworthy result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A trajectory left the safety box around the state domain.
class EscapeError : public NumericalError {
 public:
  EscapeError(double exit_time, Eigen::VectorXd exit_state);

  double exit_time() const noexcept { return exit_time_; }
  const Eigen::VectorXd& exit_state() const noexcept { return exit_state_; }

 private:
  double exit_time_;
  Eigen::VectorXd exit_state_;
};

/// Newton iteration stagnated or ran out of iterations.
class NoConvergenceError : public NumericalError {
 public:
  NoConvergenceError(const std::string& what, std::vector<double> defect_trace);

  const std::vector<double>& defect_trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

/// Finite-time exponents too close to zero: the splitting has a neutral direction.
class CenterDirectionError : public NumericalError {
 public:
  CenterDirectionError(const std::string& what, std::vector<double> exponents);

  const std::vector<double>& exponents() const noexcept { return exponents_; }

 private:
  std::vector<double> exponents_;
};

}  // namespace chainlift
