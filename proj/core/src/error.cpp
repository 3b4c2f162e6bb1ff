#include "extdep/error.hpp"

namespace extdep {

TransformError::TransformError(const std::string& what, std::size_t index)
    : ValidationError(what + " (observation " + std::to_string(index) + ")"), index_(index) {}

}  // namespace extdep
