#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace hierarch {

/// Exact integer used wherever values may outgrow machine words
/// (pairing codes, Smith normal form entries).
using BigInt = boost::multiprecision::cpp_int;

}  // namespace hierarch
