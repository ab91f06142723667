#pragma once

#include <stdexcept>
#include <string>

namespace htsentinel {

// Error taxonomy shared by all modules. The CLI maps these onto its exit
// code contract: config/usage errors -> 1, input data errors -> 2,
// numeric failures -> 3.
class error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad in-memory arguments (empty samples, inconsistent dimensions, ...).
class invalid_input_error : public error {
  using error::error;
};

// Bad configuration values (thresholds, run counts, flags).
class invalid_config_error : public error {
  using error::error;
};

// Structurally valid file whose payload violates the data contract.
class invalid_data_error : public error {
  using error::error;
};

// Byte-level violation of a file format; message carries an offset or line.
class format_error : public error {
  using error::error;
};

// Well-formed file in a dialect this toolkit deliberately rejects.
class unsupported_format_error : public error {
  using error::error;
};

// Manifest JSON violating the documented schema; message names the field.
class schema_error : public error {
  using error::error;
};

// Fewer usable tail points than the configured floor.
class insufficient_tail_error : public error {
  using error::error;
};

// Sample admits no maximum-likelihood estimate (zero spread).
class degenerate_sample_error : public error {
  using error::error;
};

// Argument outside a function's mathematical domain.
class domain_error : public error {
  using error::error;
};

class numeric_error : public error {
  using error::error;
};

class io_error : public error {
  using error::error;
};

}  // namespace htsentinel
