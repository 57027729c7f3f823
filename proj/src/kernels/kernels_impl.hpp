#pragma once

#include "cnkz/kernels.hpp"

namespace cnkz::kernels {

#if defined(CNKZ_HAVE_AVX2)
const Table& avx2_table();
#endif

}  // namespace cnkz::kernels
