#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oscbath {

enum class Errc {
  invalid_mode_count,
  frequency_imaginary,
  invalid_parameter,
  quadrature_failure,
  grid_too_coarse,
  time_out_of_range,
  step_too_large,
  basis_mismatch,
  unsupported_mode_count,
  wrong_mode_count,
  unphysical_moments,
  index_error,
  no_sign_change,
  config_invalid,
  io_failure,
};

std::string_view to_string(Errc code) noexcept;

/// Numerical failures map to CLI exit code 3; everything else is a
/// configuration/validation problem (exit code 2).
constexpr bool is_numerical(Errc code) noexcept {
  return code == Errc::quadrature_failure || code == Errc::time_out_of_range ||
         code == Errc::unphysical_moments || code == Errc::no_sign_change;
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace oscbath
