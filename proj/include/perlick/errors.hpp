#ifndef PERLICK_ERRORS_HPP
#define PERLICK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace perlick {

// Base class for every error thrown by this library.
class error : public std::runtime_error {
  public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Coordinate or parameter outside the valid chart / configuration range.
class domain_error : public error {
  public:
    explicit domain_error(const std::string& msg) : error(msg) {}
};

// Evaluation at a pole of tk / the equator of the r-chart.
class pole_error : public error {
  public:
    explicit pole_error(const std::string& msg) : error(msg) {}
};

// Degenerate configuration: l = 0, or the planar l = lz case where the
// non-planar constants lose their phase.
class degenerate_error : public error {
  public:
    explicit degenerate_error(const std::string& msg) : error(msg) {}
};

// Equation has no solution for the requested data (e.g. E below the
// potential minimum).
class no_solution_error : public error {
  public:
    explicit no_solution_error(const std::string& msg) : error(msg) {}
};

// Invalid discriminant in a closed-form orbit expression.
class discriminant_error : public error {
  public:
    explicit discriminant_error(const std::string& msg) : error(msg) {}
};

// Numerical procedure failed (step collapse, no convergence, ...).
class numerical_error : public error {
  public:
    explicit numerical_error(const std::string& msg) : error(msg) {}
};

} // namespace perlick

#endif
