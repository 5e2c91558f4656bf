// SPDX-License-Identifier: Apache-2.0
// Scalar reference entries for the dispatch table. Built with fp-contract
// disabled so results are reproducible against the SIMD variants.

#include "tables.hpp"

namespace hazediff::kernels::detail {

void fill_scalar(TableF& t) {
  t.axpy = &ref::axpy<float>;
  t.axpby = &ref::axpby<float>;
  t.dot = &ref::dot<float>;
  t.sum_abs = &ref::sum_abs<float>;
  t.matvec_acc = &ref::matvec_acc<float>;
  t.matvec_t_acc = &ref::matvec_t_acc<float>;
  t.ger_acc = &ref::ger_acc<float>;
}

} // namespace hazediff::kernels::detail
