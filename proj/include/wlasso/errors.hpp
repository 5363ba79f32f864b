#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wlasso {

/// Bad input: wrong dimensions, out-of-range parameter, non-finite data.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed configuration text or an unknown key.
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// A column of the design has zero Euclidean norm.
class DegenerateColumn : public std::runtime_error {
public:
    explicit DegenerateColumn(std::size_t column)
        : std::runtime_error("degenerate column " + std::to_string(column) +
                             " (zero norm)"),
          column_(column) {}
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

/// Restricted design is numerically rank deficient.
class SingularDesign : public std::runtime_error {
public:
    SingularDesign(double sigma_min, double sigma_max)
        : std::runtime_error("singular design: sigma_min = " +
                             std::to_string(sigma_min) +
                             ", sigma_max = " + std::to_string(sigma_max)),
          sigma_min_(sigma_min) {}
    double sigma_min() const noexcept { return sigma_min_; }

private:
    double sigma_min_;
};

/// A weight formula is evaluated outside the range where it is defined.
class RegimeViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exhaustive enumeration or materialization exceeds a size guard.
class SizeGuard : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wlasso
