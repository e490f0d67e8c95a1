#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ebs {

enum class ErrorCode {
  config,
  in_band,
  interpolation_not_supported,
  ill_posed_bath,
  unsupported,
  no_bound_state,
  bracketing_failure,
  grid_too_small,
  regime_undefined,
  regime_mismatch,
  no_root,
  degenerate_nullspace,
  coincident_poles,
  tb_singularity,
  optimizer_failed,
  pole_hit,
  root_below_floor,
  dimension_cap,
  non_convergence,
  empty_density,
  nonpositive_data,
};

// Short stable identifiers; these are the reason codes written by the CLI.
constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::config: return "config";
    case ErrorCode::in_band: return "in-band";
    case ErrorCode::interpolation_not_supported: return "interpolation";
    case ErrorCode::ill_posed_bath: return "ill-posed-bath";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::no_bound_state: return "no-bound-state";
    case ErrorCode::bracketing_failure: return "bracketing";
    case ErrorCode::grid_too_small: return "grid-too-small";
    case ErrorCode::regime_undefined: return "regime-undefined";
    case ErrorCode::regime_mismatch: return "regime-mismatch";
    case ErrorCode::no_root: return "no-root";
    case ErrorCode::degenerate_nullspace: return "degenerate";
    case ErrorCode::coincident_poles: return "coincident-poles";
    case ErrorCode::tb_singularity: return "tb-singularity";
    case ErrorCode::optimizer_failed: return "optimizer";
    case ErrorCode::pole_hit: return "pole-hit";
    case ErrorCode::root_below_floor: return "root-below-floor";
    case ErrorCode::dimension_cap: return "cap";
    case ErrorCode::non_convergence: return "non-convergence";
    case ErrorCode::empty_density: return "empty-density";
    case ErrorCode::nonpositive_data: return "nonpositive-data";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace ebs
