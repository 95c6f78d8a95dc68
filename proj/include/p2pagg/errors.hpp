#pragma once

#include <stdexcept>
#include <string>

namespace p2pagg {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reconstruction found a share that disagrees with the interpolated polynomial.
struct InconsistentSharing : Error {
  using Error::Error;
};

// Fewer shares supplied than the degree requires.
struct InsufficientShares : Error {
  using Error::Error;
};

// Error-correcting reconstruction found no polynomial within the error budget.
struct Undecodable : Error {
  using Error::Error;
};

// Share operands disagree on party id or the degree budget is exceeded.
struct DegreeMismatch : Error {
  using Error::Error;
};

// A protocol round cannot continue (insufficient online members, failed check
// under abort policy, undecodable tampering).
struct AbortError : Error {
  using Error::Error;
};

// Config file problem; line/col are 1-based, 0 when not applicable.
struct ConfigError : Error {
  int line = 0;
  int col = 0;
  ConfigError(const std::string& msg, int line_ = 0, int col_ = 0)
      : Error(line_ ? msg + " at line " + std::to_string(line_) + ", col " +
                          std::to_string(col_)
                    : msg),
        line(line_),
        col(col_) {}
};

struct IoError : Error {
  using Error::Error;
};

inline void check(bool cond, const char* msg) {
  if (!cond) throw Error(msg);
}

}  // namespace p2pagg
