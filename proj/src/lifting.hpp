// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Internal helpers for writing complex affine expressions as real rows.

#pragma once

#include "mfris/conic.hpp"

namespace mfris::detail {

// Complex vector variable of length n stored as [Re z; Im z] at base.
struct CBlock {
  int base = 0;
  int n = 0;
  int re(int i) const { return base + i; }
  int im(int i) const { return base + n + i; }
};

// row += scale * Re(u^H z)
inline void add_re_inner(AffineRow& row, const CBlock& z, const CVec& u, double scale) {
  for (int i = 0; i < z.n; ++i) {
    row.add(z.re(i), scale * u[i].real());
    row.add(z.im(i), scale * u[i].imag());
  }
}

// row += scale * Im(u^H z)
inline void add_im_inner(AffineRow& row, const CBlock& z, const CVec& u, double scale) {
  for (int i = 0; i < z.n; ++i) {
    row.add(z.im(i), scale * u[i].real());
    row.add(z.re(i), -scale * u[i].imag());
  }
}

// Rows of scale * R [Re z; Im z] for a lifted factor R (r x 2n).
inline void append_factor_rows(std::vector<AffineRow>& rows, const CBlock& z, const RMat& R,
                               double scale) {
  for (Eigen::Index j = 0; j < R.rows(); ++j) {
    AffineRow r;
    for (int i = 0; i < z.n; ++i) {
      r.add(z.re(i), scale * R(j, i));
      r.add(z.im(i), scale * R(j, z.n + i));
    }
    rows.push_back(std::move(r));
  }
}

inline CVec read_block(const RVec& x, const CBlock& z, double scale) {
  CVec v(z.n);
  for (int i = 0; i < z.n; ++i) v[i] = scale * cplx(x[z.re(i)], x[z.im(i)]);
  return v;
}

inline void write_block(RVec& x, const CBlock& z, const CVec& v, double inv_scale) {
  for (int i = 0; i < z.n; ++i) {
    x[z.re(i)] = v[i].real() * inv_scale;
    x[z.im(i)] = v[i].imag() * inv_scale;
  }
}

// Safety factor applied to budgets and thresholds so that solutions that
// are feasible to interior-point accuracy are feasible for the original
// constraints.
inline constexpr double kMargin = 1e-8;

}  // namespace mfris::detail
