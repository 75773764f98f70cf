#pragma once

#include <cstddef>
#include <iosfwd>

namespace symortho::cli {

/// Largest accepted mode dimension and order for input tensors.
inline constexpr std::size_t kMaxDimension = 16;
inline constexpr std::size_t kMaxOrder = 6;

/**
 * Runs the command line tool. Returns 0 on success, 1 when a verification
 * fails (invalid certificate, uncertified oracle, broken norm chain, failing
 * case) and 2 on usage, input or infeasibility errors.
 */
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

} // namespace symortho::cli
