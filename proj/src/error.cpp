#include "stacklp/error.hpp"

namespace stacklp {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::missing_file: return "missing_file";
    case ErrorCode::unknown_label: return "unknown_label";
    case ErrorCode::non_numeric_cell: return "non_numeric_cell";
    case ErrorCode::ragged_row: return "ragged_row";
    case ErrorCode::single_class: return "single_class";
    case ErrorCode::degenerate_dataset: return "degenerate_dataset";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::never_out_of_bag: return "never_out_of_bag";
    case ErrorCode::training_failed: return "training_failed";
    case ErrorCode::solver_failure: return "solver_failure";
    case ErrorCode::config_error: return "config_error";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

}  // namespace stacklp
