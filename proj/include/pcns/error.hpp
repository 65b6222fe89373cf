#pragma once

#include <stdexcept>
#include <string>

namespace pcns {

enum class Errc {
  not_power_of_two,
  epsilon_out_of_range,
  theta_too_large,
  k_too_large,
  too_large,
  level_out_of_range,
  wrong_scheme,
  unknown_test,
  overflow,
  domain_error,
  divergence_domain,
  dimension_mismatch,
  bad_config,
  io_error,
};

inline const char* errc_name(Errc c) noexcept {
  switch (c) {
    case Errc::not_power_of_two: return "not_power_of_two";
    case Errc::epsilon_out_of_range: return "epsilon_out_of_range";
    case Errc::theta_too_large: return "theta_too_large";
    case Errc::k_too_large: return "k_too_large";
    case Errc::too_large: return "too_large";
    case Errc::level_out_of_range: return "level_out_of_range";
    case Errc::wrong_scheme: return "wrong_scheme";
    case Errc::unknown_test: return "unknown_test";
    case Errc::overflow: return "overflow";
    case Errc::domain_error: return "domain_error";
    case Errc::divergence_domain: return "divergence_domain";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::bad_config: return "bad_config";
    case Errc::io_error: return "io_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace pcns
