#pragma once

// Scalar type of the network code. The normal build uses double. Defining
// GOALNET_EXTENDED compiles the same sources with long double into their own
// namespace, which the gradient checker uses to get below double round-off.

#ifdef GOALNET_EXTENDED
#define GOALNET_NUMERIC_NS extended
#define GOALNET_PREC_NAME "extended"
#else
#define GOALNET_NUMERIC_NS binary64
#define GOALNET_PREC_NAME "binary64"
#endif

namespace goalnet::inline GOALNET_NUMERIC_NS {
#ifdef GOALNET_EXTENDED
using Real = long double;
#else
using Real = double;
#endif
}  // namespace goalnet::inline GOALNET_NUMERIC_NS
