#pragma once

#include <stdexcept>
#include <string>

namespace stacklp {

enum class ErrorCode {
  invalid_argument,
  missing_file,
  unknown_label,
  non_numeric_cell,
  ragged_row,
  single_class,
  degenerate_dataset,
  dimension_mismatch,
  never_out_of_bag,
  training_failed,
  solver_failure,
  config_error,
  io_error,
};

const char* to_string(ErrorCode code);

// All library failures are reported through this type; the code lets the CLI
// map an error onto an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stacklp
