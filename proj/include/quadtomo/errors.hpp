#pragma once

#include <stdexcept>
#include <string>

namespace quadtomo {

/// A grid or sampling step is too coarse for the requested operation.
class resolution_error : public std::runtime_error {
 public:
  explicit resolution_error(const std::string& what) : std::runtime_error(what) {}
};

/// Data passed a precondition but is numerically inconsistent with the model
/// (indeterminate inference, unphysical moment pair, degenerate fit).
class consistency_error : public std::runtime_error {
 public:
  explicit consistency_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace quadtomo
