#include "chainlift/errors.hpp"

#include <sstream>
#include <utility>

namespace chainlift {

namespace {

std::string escape_message(double t, const Eigen::VectorXd& x) {
  std::ostringstream os;
  os << "trajectory left the safety box at t=" << t << " (state";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << ' ' << x[i];
  os << ')';
  return os.str();
}

}  // namespace

EscapeError::EscapeError(double exit_time, Eigen::VectorXd exit_state)
    : NumericalError(escape_message(exit_time, exit_state)),
      exit_time_(exit_time),
      exit_state_(std::move(exit_state)) {}

NoConvergenceError::NoConvergenceError(const std::string& what,
                                       std::vector<double> defect_trace)
    : NumericalError(what), trace_(std::move(defect_trace)) {}

CenterDirectionError::CenterDirectionError(const std::string& what,
                                           std::vector<double> exponents)
    : NumericalError(what), exponents_(std::move(exponents)) {}

}  // namespace chainlift
