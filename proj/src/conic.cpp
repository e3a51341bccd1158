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

#include "mfris/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace mfris {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double row_value(const AffineRow& r, const RVec& x) {
  double v = r.constant;
  for (const auto& [j, c] : r.terms) v += c * x[j];
  return v;
}

double cone_violation(ConeKind kind, const RVec& v) {
  switch (kind) {
    case ConeKind::kNonneg:
      return std::max(0.0, -v.minCoeff());
    case ConeKind::kSoc:
      return std::max(0.0, v.tail(v.size() - 1).norm() - v[0]);
    case ConeKind::kRotatedSoc: {
      const double u = v[0], w = v[1];
      const double rest = v.size() > 2 ? v.tail(v.size() - 2).squaredNorm() : 0.0;
      // distance-like measure: violation of the equivalent Lorentz form
      const double t = (u + w) * M_SQRT1_2;
      const double a = (u - w) * M_SQRT1_2;
      return std::max(0.0, std::sqrt(a * a + rest) - t);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Standard form used internally:  min c'x  s.t.  Ax = b,  Gx + s = h,  s in K
// with K a product of nonnegative orthants and Lorentz cones.

struct StdBlock {
  bool soc = false;
  int offset = 0;  // into s / z
  int dim = 0;
  std::vector<int> cols;
  RMat G;  // dim x cols.size()
  RVec h;
  RMat GtG;  // SOC blocks: G'G, fixed across iterations
};

struct Scaling {
  // LP: d (W = diag(d)); SOC: eta and wbar
  RVec d;
  double eta = 1.0;
  RVec w;
};

struct StdForm {
  int n = 0, p = 0, m = 0, degree = 0;
  RVec c;
  RMat A;
  RVec b;
  std::vector<StdBlock> blocks;
};

StdForm to_standard(const ConicProgram& prog) {
  StdForm f;
  f.n = prog.n_vars;
  f.c = prog.objective;
  f.p = static_cast<int>(prog.equalities.size());
  f.A = RMat::Zero(f.p, f.n);
  f.b = RVec::Zero(f.p);
  for (int i = 0; i < f.p; ++i) {
    for (const auto& [j, c] : prog.equalities[i].terms) f.A(i, j) += c;
    f.b[i] = -prog.equalities[i].constant;
  }
  int offset = 0;
  for (const auto& cone : prog.cones) {
    const int dim = static_cast<int>(cone.rows.size());
    if (dim == 0) continue;
    StdBlock blk;
    blk.soc = cone.kind != ConeKind::kNonneg;
    blk.offset = offset;
    blk.dim = dim;
    for (const auto& r : cone.rows)
      for (const auto& t : r.terms) blk.cols.push_back(t.first);
    std::sort(blk.cols.begin(), blk.cols.end());
    blk.cols.erase(std::unique(blk.cols.begin(), blk.cols.end()), blk.cols.end());
    // affine value a'x + b in cone  <=>  s = h - Gx with G = -a, h = b
    RMat a = RMat::Zero(dim, static_cast<Eigen::Index>(blk.cols.size()));
    RVec bb(dim);
    for (int i = 0; i < dim; ++i) {
      bb[i] = cone.rows[i].constant;
      for (const auto& [j, c] : cone.rows[i].terms) {
        const auto pos = std::lower_bound(blk.cols.begin(), blk.cols.end(), j) - blk.cols.begin();
        a(i, pos) += c;
      }
    }
    if (cone.kind == ConeKind::kRotatedSoc) {
      // (u, v, w) -> ((u+v)/sqrt2, (u-v)/sqrt2, w)
      RMat a2 = a;
      RVec b2 = bb;
      a2.row(0) = (a.row(0) + a.row(1)) * M_SQRT1_2;
      a2.row(1) = (a.row(0) - a.row(1)) * M_SQRT1_2;
      b2[0] = (bb[0] + bb[1]) * M_SQRT1_2;
      b2[1] = (bb[0] - bb[1]) * M_SQRT1_2;
      a.swap(a2);
      bb.swap(b2);
    }
    blk.G = -a;
    blk.h = bb;
    if (blk.soc) blk.GtG = blk.G.transpose() * blk.G;
    f.degree += blk.soc ? 1 : dim;
    offset += dim;
    f.blocks.push_back(std::move(blk));
  }
  f.m = offset;
  return f;
}

// ---------------------------------------------------------------------------
// Cone arithmetic

double soc_det(const Eigen::Ref<const RVec>& u) {
  return u[0] * u[0] - u.tail(u.size() - 1).squaredNorm();
}

// Max alpha in [0, inf) with u + alpha*du in the block cone.
double max_step(const StdBlock& blk, const Eigen::Ref<const RVec>& u,
                const Eigen::Ref<const RVec>& du) {
  double amax = kInf;
  if (!blk.soc) {
    for (int i = 0; i < blk.dim; ++i)
      if (du[i] < 0.0) amax = std::min(amax, -u[i] / du[i]);
    return amax;
  }
  const int q = blk.dim;
  const double a = du[0] * du[0] - du.tail(q - 1).squaredNorm();
  const double bq = u[0] * du[0] - u.tail(q - 1).dot(du.tail(q - 1));
  const double c = std::max(soc_det(u), 0.0);
  // roots of a t^2 + 2 b t + c = 0
  double root = kInf;
  const double disc = bq * bq - a * c;
  if (a == 0.0) {
    if (bq < 0.0) root = -c / (2.0 * bq);
  } else if (a > 0.0) {
    if (bq < 0.0 && disc >= 0.0) root = c / (-bq + std::sqrt(disc));
  } else {
    root = (bq + std::sqrt(std::max(disc, 0.0))) / (-a);
    if (root < 0.0) root = 0.0;
  }
  amax = std::min(amax, root);
  if (du[0] < 0.0) amax = std::min(amax, -u[0] / du[0]);
  return amax;
}

// Smallest "eigenvalue" of u with respect to the block cone.
double min_eig(const StdBlock& blk, const Eigen::Ref<const RVec>& u) {
  if (!blk.soc) return u.minCoeff();
  return u[0] - u.tail(blk.dim - 1).norm();
}

void add_identity(const StdBlock& blk, Eigen::Ref<RVec> u, double alpha) {
  if (!blk.soc) {
    u.array() += alpha;
  } else {
    u[0] += alpha;
  }
}

// Jordan product u o v
void jordan(const StdBlock& blk, const Eigen::Ref<const RVec>& u, const Eigen::Ref<const RVec>& v,
            Eigen::Ref<RVec> out) {
  if (!blk.soc) {
    out = u.cwiseProduct(v);
    return;
  }
  const int q = blk.dim;
  const double first = u.dot(v);
  out.tail(q - 1) = u[0] * v.tail(q - 1) + v[0] * u.tail(q - 1);
  out[0] = first;
}

// Solve lambda o out = x
void jordan_div(const StdBlock& blk, const Eigen::Ref<const RVec>& lam,
                const Eigen::Ref<const RVec>& x, Eigen::Ref<RVec> out) {
  if (!blk.soc) {
    out = x.cwiseQuotient(lam);
    return;
  }
  const int q = blk.dim;
  const double det = soc_det(lam);
  const double y0 = (lam[0] * x[0] - lam.tail(q - 1).dot(x.tail(q - 1))) / det;
  out.tail(q - 1) = (x.tail(q - 1) - y0 * lam.tail(q - 1)) / lam[0];
  out[0] = y0;
}

Scaling compute_scaling(const StdBlock& blk, const Eigen::Ref<const RVec>& s,
                        const Eigen::Ref<const RVec>& z) {
  Scaling sc;
  if (!blk.soc) {
    sc.d = (s.array() / z.array()).sqrt();
    return sc;
  }
  const int q = blk.dim;
  const double sn = std::sqrt(std::max(soc_det(s), 1e-300));
  const double zn = std::sqrt(std::max(soc_det(z), 1e-300));
  RVec sb = s / sn;
  RVec zb = z / zn;
  const double gamma = std::sqrt(std::max((1.0 + sb.dot(zb)) / 2.0, 1e-300));
  sc.w.resize(q);
  sc.w[0] = (sb[0] + zb[0]) / (2.0 * gamma);
  sc.w.tail(q - 1) = (sb.tail(q - 1) - zb.tail(q - 1)) / (2.0 * gamma);
  sc.eta = std::sqrt(sn / zn);
  return sc;
}

// y = W x  (inverse = false)  or  y = W^{-1} x  (inverse = true); x may have many columns
template <typename In, typename Out>
void apply_scaling(const StdBlock& blk, const Scaling& sc, const In& x, Out& y, bool inverse) {
  if (!blk.soc) {
    if (inverse)
      y = sc.d.cwiseInverse().asDiagonal() * x;
    else
      y = sc.d.asDiagonal() * x;
    return;
  }
  const int q = blk.dim;
  const double w0 = sc.w[0];
  const auto w1 = sc.w.tail(q - 1);
  const double sign = inverse ? -1.0 : 1.0;
  const double scale = inverse ? 1.0 / sc.eta : sc.eta;
  // rows: y0 = w0 x0 + sign*w1'x1 ; y1 = x1 + (sign*x0 + w1'x1/(1+w0)) w1
  Eigen::RowVectorXd wx = w1.transpose() * x.bottomRows(q - 1);
  Eigen::RowVectorXd x0 = x.row(0);
  y.resize(x.rows(), x.cols());
  y.bottomRows(q - 1) = x.bottomRows(q - 1) + w1 * (sign * x0 + wx / (1.0 + w0));
  y.row(0) = w0 * x0 + sign * wx;
  y *= scale;
}

// ---------------------------------------------------------------------------

class InteriorPoint {
 public:
  InteriorPoint(const StdForm& f, const SolverOptions& o) : f_(f), opts_(o) {
    scalings_.resize(f_.blocks.size());
  }

  ConicSolution run();

 private:
  RVec g_times(const RVec& x) const {
    RVec out(f_.m);
    for (const auto& blk : f_.blocks) {
      auto seg = out.segment(blk.offset, blk.dim);
      seg.setZero();
      for (size_t k = 0; k < blk.cols.size(); ++k) seg += blk.G.col(k) * x[blk.cols[k]];
    }
    return out;
  }
  RVec gt_times(const RVec& z) const {
    RVec out = RVec::Zero(f_.n);
    for (const auto& blk : f_.blocks) {
      RVec part = blk.G.transpose() * z.segment(blk.offset, blk.dim);
      for (size_t k = 0; k < blk.cols.size(); ++k) out[blk.cols[k]] += part[k];
    }
    return out;
  }
  RVec h_full() const {
    RVec out(f_.m);
    for (const auto& blk : f_.blocks) out.segment(blk.offset, blk.dim) = blk.h;
    return out;
  }
  void scale_vec(const RVec& x, RVec& y, bool inverse) const {
    y.resize(f_.m);
    for (size_t b = 0; b < f_.blocks.size(); ++b) {
      const auto& blk = f_.blocks[b];
      RVec seg = x.segment(blk.offset, blk.dim);
      RVec out;
      apply_scaling(blk, scalings_[b], seg, out, inverse);
      y.segment(blk.offset, blk.dim) = out;
    }
  }

  void set_identity_scaling();
  void update_scaling(const RVec& s, const RVec& z);
  bool factor();
  // Solves [0 A' G'; A 0 0; G 0 -W^2] [x; y; z] = [r1; r2; r3]
  void kkt_solve(const RVec& r1, const RVec& r2, const RVec& r3, RVec& x, RVec& y, RVec& z) const;
  void kkt_solve_once(const RVec& r1, const RVec& r2, const RVec& r3, RVec& x, RVec& y,
                      RVec& z) const;

  double step_to_boundary(const RVec& s, const RVec& ds, const RVec& z, const RVec& dz) const {
    double a = kInf;
    for (const auto& blk : f_.blocks) {
      a = std::min(a, max_step(blk, s.segment(blk.offset, blk.dim), ds.segment(blk.offset, blk.dim)));
      a = std::min(a, max_step(blk, z.segment(blk.offset, blk.dim), dz.segment(blk.offset, blk.dim)));
    }
    return a;
  }

  const StdForm& f_;
  SolverOptions opts_;
  std::vector<Scaling> scalings_;
  RMat kkt_;
  Eigen::PartialPivLU<RMat> lu_;
  Eigen::LLT<RMat> llt_;
  bool use_llt_ = false;
  double reg_ = 0.0;
};

void InteriorPoint::set_identity_scaling() {
  for (size_t b = 0; b < f_.blocks.size(); ++b) {
    const auto& blk = f_.blocks[b];
    Scaling sc;
    if (!blk.soc) {
      sc.d = RVec::Ones(blk.dim);
    } else {
      sc.w = RVec::Zero(blk.dim);
      sc.w[0] = 1.0;
      sc.eta = 1.0;
    }
    scalings_[b] = sc;
  }
}

void InteriorPoint::update_scaling(const RVec& s, const RVec& z) {
  for (size_t b = 0; b < f_.blocks.size(); ++b) {
    const auto& blk = f_.blocks[b];
    scalings_[b] = compute_scaling(blk, s.segment(blk.offset, blk.dim), z.segment(blk.offset, blk.dim));
  }
}

bool InteriorPoint::factor() {
  // G' W^{-2} G per block. For a second-order cone W^{-2} = (2 Jw (Jw)' - J) / eta^2,
  // so the block term is a rank-two update of the fixed G'G.
  RMat H = RMat::Zero(f_.n, f_.n);
  for (size_t b = 0; b < f_.blocks.size(); ++b) {
    const auto& blk = f_.blocks[b];
    const auto& sc = scalings_[b];
    RMat local;
    if (!blk.soc) {
      local = blk.G.transpose() * sc.d.cwiseAbs2().cwiseInverse().asDiagonal() * blk.G;
    } else {
      const int q = blk.dim;
      const RVec g0 = blk.G.row(0).transpose();
      const RVec v = g0 * sc.w[0] - blk.G.bottomRows(q - 1).transpose() * sc.w.tail(q - 1);
      local = blk.GtG;
      local.noalias() += 2.0 * v * v.transpose();
      local.noalias() -= 2.0 * g0 * g0.transpose();
      local /= sc.eta * sc.eta;
    }
    const auto nc = blk.cols.size();
    for (size_t j = 0; j < nc; ++j)
      for (size_t i = 0; i < nc; ++i) H(blk.cols[i], blk.cols[j]) += local(i, j);
  }
  const double scale = std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
  reg_ = 1e-13 * scale;
  if (f_.p == 0) {
    H.diagonal().array() += reg_;
    llt_.compute(H);
    use_llt_ = llt_.info() == Eigen::Success;
    if (use_llt_) return true;
    H.diagonal().array() += 1e-10 * scale;
  }
  kkt_ = RMat::Zero(f_.n + f_.p, f_.n + f_.p);
  kkt_.topLeftCorner(f_.n, f_.n) = H;
  if (f_.p == 0 && !use_llt_) {
    // already regularized above
  } else {
    kkt_.topLeftCorner(f_.n, f_.n).diagonal().array() += reg_;
  }
  if (f_.p > 0) {
    kkt_.topRightCorner(f_.n, f_.p) = f_.A.transpose();
    kkt_.bottomLeftCorner(f_.p, f_.n) = f_.A;
    kkt_.bottomRightCorner(f_.p, f_.p).diagonal().array() = -reg_;
  }
  lu_.compute(kkt_);
  use_llt_ = false;
  return std::isfinite(lu_.rcond());
}

void InteriorPoint::kkt_solve_once(const RVec& r1, const RVec& r2, const RVec& r3, RVec& x,
                                   RVec& y, RVec& z) const {
  RVec t;
  scale_vec(r3, t, true);  // W^{-1} r3
  RVec rhs_x = r1;
  for (size_t b = 0; b < f_.blocks.size(); ++b) {
    const auto& blk = f_.blocks[b];
    RVec wt;
    apply_scaling(blk, scalings_[b], RVec(t.segment(blk.offset, blk.dim)), wt, true);
    const RVec part = blk.G.transpose() * wt;
    for (size_t k = 0; k < blk.cols.size(); ++k) rhs_x[blk.cols[k]] += part[k];
  }
  if (use_llt_) {
    x = llt_.solve(rhs_x);
    y.resize(0);
  } else {
    RVec rhs(f_.n + f_.p);
    rhs.head(f_.n) = rhs_x;
    rhs.tail(f_.p) = r2;
    RVec sol = lu_.solve(rhs);
    x = sol.head(f_.n);
    y = sol.tail(f_.p);
  }
  z.resize(f_.m);
  for (size_t b = 0; b < f_.blocks.size(); ++b) {
    const auto& blk = f_.blocks[b];
    RVec gx = RVec::Zero(blk.dim);
    for (size_t k = 0; k < blk.cols.size(); ++k) gx += blk.G.col(k) * x[blk.cols[k]];
    RVec wgx;
    apply_scaling(blk, scalings_[b], gx, wgx, true);
    RVec v = wgx - t.segment(blk.offset, blk.dim);
    RVec out;
    apply_scaling(blk, scalings_[b], v, out, true);
    z.segment(blk.offset, blk.dim) = out;
  }
}

void InteriorPoint::kkt_solve(const RVec& r1, const RVec& r2, const RVec& r3, RVec& x, RVec& y,
                              RVec& z) const {
  kkt_solve_once(r1, r2, r3, x, y, z);
  // iterative refinement against the unregularized operator
  for (int it = 0; it < 3; ++it) {
    RVec w2z;
    {
      RVec tmp;
      scale_vec(z, tmp, false);
      scale_vec(tmp, w2z, false);
    }
    RVec e1 = r1 - gt_times(z);
    if (f_.p > 0) e1 -= f_.A.transpose() * y;
    RVec e2 = f_.p > 0 ? RVec(r2 - f_.A * x) : RVec(RVec::Zero(0));
    RVec e3 = r3 - (g_times(x) - w2z);
    const double err = std::max({e1.lpNorm<Eigen::Infinity>(),
                                 f_.p > 0 ? e2.lpNorm<Eigen::Infinity>() : 0.0,
                                 e3.lpNorm<Eigen::Infinity>()});
    const double ref = 1.0 + std::max({r1.lpNorm<Eigen::Infinity>(),
                                       f_.p > 0 ? r2.lpNorm<Eigen::Infinity>() : 0.0,
                                       r3.lpNorm<Eigen::Infinity>()});
    if (err <= 1e-14 * ref) break;
    RVec dx, dy, dz;
    kkt_solve_once(e1, e2, e3, dx, dy, dz);
    x += dx;
    if (f_.p > 0) y += dy;
    z += dz;
  }
}

ConicSolution InteriorPoint::run() {
  const int n = f_.n, p = f_.p, m = f_.m;
  ConicSolution sol;
  const RVec h = h_full();
  const double cn = std::max(1.0, f_.c.norm());
  const double bn = std::max(1.0, p > 0 ? f_.b.norm() : 0.0);
  const double hn = std::max(1.0, h.norm());

  if (m == 0) {
    // pure equality-constrained LP: feasible point then check objective direction
    sol.status = SolveStatus::kNumericalError;
    return sol;
  }

  // --- initial point
  set_identity_scaling();
  if (!factor()) return sol;
  RVec x, y, z, s;
  {
    RVec zhat;
    kkt_solve(RVec::Zero(n), p > 0 ? f_.b : RVec(RVec::Zero(0)), h, x, y, zhat);
    s = -zhat;
    double ap = -kInf;
    for (const auto& blk : f_.blocks) ap = std::max(ap, -min_eig(blk, s.segment(blk.offset, blk.dim)));
    if (ap >= -1e-8 * std::max(1.0, s.norm())) {
      for (const auto& blk : f_.blocks) add_identity(blk, s.segment(blk.offset, blk.dim), 1.0 + ap);
    }
  }
  {
    RVec xd, yd;
    kkt_solve(-f_.c, RVec::Zero(p), RVec::Zero(m), xd, yd, z);
    y = yd;
    double ad = -kInf;
    for (const auto& blk : f_.blocks) ad = std::max(ad, -min_eig(blk, z.segment(blk.offset, blk.dim)));
    if (ad >= -1e-8 * std::max(1.0, z.norm())) {
      for (const auto& blk : f_.blocks) add_identity(blk, z.segment(blk.offset, blk.dim), 1.0 + ad);
    }
  }
  double tau = 1.0, kappa = 1.0;

  RVec best_x;
  double best_merit = kInf;
  int since_best = 0;

  for (int iter = 0; iter <= opts_.max_iter; ++iter) {
    sol.iterations = iter;
    // residuals
    const RVec gx = g_times(x);
    RVec rx = gt_times(z) + f_.c * tau;
    if (p > 0) rx += f_.A.transpose() * y;
    RVec ry = p > 0 ? RVec(f_.A * x - f_.b * tau) : RVec(RVec::Zero(0));
    RVec rz = gx + s - h * tau;
    const double cx = f_.c.dot(x);
    const double by = p > 0 ? f_.b.dot(y) : 0.0;
    const double hz = h.dot(z);
    const double rtau = kappa + cx + by + hz;

    const double gap = s.dot(z);
    const double mu = (gap + tau * kappa) / (f_.degree + 1);

    const double pcost = cx / tau;
    const double dcost = -(by + hz) / tau;
    const double pres = std::max(p > 0 ? ry.norm() / bn : 0.0, rz.norm() / hn) / tau;
    const double dres = rx.norm() / cn / tau;
    const double abs_gap = gap / (tau * tau);
    double rel_gap = kInf;
    if (pcost < 0.0)
      rel_gap = abs_gap / -pcost;
    else if (dcost > 0.0)
      rel_gap = abs_gap / dcost;

    sol.primal_residual = pres;
    sol.dual_residual = dres;
    const double merit = std::max({pres, dres, std::min(abs_gap, rel_gap)});
    if (merit < best_merit) {
      since_best = 0;
      best_merit = merit;
      best_x = x / tau;
      sol.objective = pcost;
      sol.dual_objective = dcost;
    }

    if (pres <= opts_.feas_tol && dres <= opts_.feas_tol &&
        (abs_gap <= opts_.abs_tol || rel_gap <= opts_.rel_tol)) {
      sol.status = SolveStatus::kOptimal;
      sol.x = x / tau;
      sol.objective = pcost;
      sol.dual_objective = dcost;
      return sol;
    }
    // infeasibility certificates
    if (by + hz < 0.0) {
      const RVec dual_ray = rx - f_.c * tau;  // A'y + G'z
      if (dual_ray.norm() / cn <= opts_.feas_tol * -(by + hz) && (-(by + hz)) / cn > opts_.rel_tol) {
        sol.status = SolveStatus::kInfeasible;
        sol.x = x;
        return sol;
      }
    }
    if (cx < 0.0) {
      const RVec prim_ray_z = gx + s;
      const double pr = std::max(p > 0 ? (f_.A * x).norm() / bn : 0.0, prim_ray_z.norm() / hn);
      if (pr <= opts_.feas_tol * -cx && -cx / cn > opts_.rel_tol) {
        sol.status = SolveStatus::kUnbounded;
        sol.x = x;
        return sol;
      }
    }
    if (iter == opts_.max_iter) break;
    // no progress for several iterations: numerical floor reached
    if (++since_best > 5) break;

    // --- Newton system
    update_scaling(s, z);
    if (!factor()) break;
    RVec lam;
    scale_vec(z, lam, false);  // lambda = W z

    RVec x1, y1, z1;
    kkt_solve(-f_.c, p > 0 ? f_.b : RVec(RVec::Zero(0)), h, x1, y1, z1);
    const double denom_base = f_.c.dot(x1) + (p > 0 ? f_.b.dot(y1) : 0.0) + h.dot(z1);

    auto direction = [&](double sigma, const RVec& bs, double bkappa, RVec& dx, RVec& dy, RVec& dz,
                         RVec& ds, double& dtau, double& dkappa) {
      const double red = 1.0 - sigma;
      RVec ws;
      scale_vec(bs, ws, false);
      RVec x2, y2, z2;
      kkt_solve(-red * rx, p > 0 ? RVec(-red * ry) : RVec(RVec::Zero(0)), RVec(-red * rz - ws), x2, y2,
                z2);
      const double btau = -red * rtau;
      const double num = btau - bkappa / tau - f_.c.dot(x2) - (p > 0 ? f_.b.dot(y2) : 0.0) - h.dot(z2);
      dtau = num / (denom_base - kappa / tau);
      dx = x2 + dtau * x1;
      dy = p > 0 ? RVec(y2 + dtau * y1) : RVec(RVec::Zero(0));
      dz = z2 + dtau * z1;
      RVec wdz;
      scale_vec(dz, wdz, false);
      RVec t = bs - wdz;
      scale_vec(t, ds, false);
      dkappa = (bkappa - kappa * dtau) / tau;
    };

    auto max_alpha = [&](const RVec& ds, const RVec& dz, double dtau, double dkappa) {
      double a = step_to_boundary(s, ds, z, dz);
      if (dtau < 0.0) a = std::min(a, -tau / dtau);
      if (dkappa < 0.0) a = std::min(a, -kappa / dkappa);
      return a;
    };

    // predictor
    RVec dxa, dya, dza, dsa;
    double dtaua, dkappaa;
    direction(0.0, -lam, -tau * kappa, dxa, dya, dza, dsa, dtaua, dkappaa);
    const double alpha_a = std::min(1.0, max_alpha(dsa, dza, dtaua, dkappaa));
    const double sigma = std::pow(1.0 - alpha_a, 3);

    // corrector
    RVec dsa_t, dza_t;
    scale_vec(dsa, dsa_t, true);
    scale_vec(dza, dza_t, false);
    RVec bs(m);
    for (const auto& blk : f_.blocks) {
      const int o = blk.offset, q = blk.dim;
      RVec ll(q), corr(q), target(q);
      jordan(blk, lam.segment(o, q), lam.segment(o, q), ll);
      jordan(blk, dsa_t.segment(o, q), dza_t.segment(o, q), corr);
      target = -ll - corr;
      add_identity(blk, target, sigma * mu);
      RVec out(q);
      jordan_div(blk, lam.segment(o, q), target, out);
      bs.segment(o, q) = out;
    }
    const double bkappa = sigma * mu - tau * kappa - dtaua * dkappaa;
    RVec dx, dy, dz, ds;
    double dtau, dkappa;
    direction(sigma, bs, bkappa, dx, dy, dz, ds, dtau, dkappa);
    const double alpha = std::min(1.0, 0.99 * max_alpha(ds, dz, dtau, dkappa));
    if (!(alpha > 1e-14) || !dx.allFinite()) break;

    x += alpha * dx;
    if (p > 0) y += alpha * dy;
    z += alpha * dz;
    s += alpha * ds;
    tau += alpha * dtau;
    kappa += alpha * dkappa;
  }

  sol.status = best_x.size() ? SolveStatus::kMaxIter : SolveStatus::kNumericalError;
  sol.x = best_x;
  return sol;
}

}  // namespace

// ---------------------------------------------------------------------------

int ConicProgram::cone_rows() const {
  int r = 0;
  for (const auto& c : cones) r += static_cast<int>(c.rows.size());
  return r;
}

double ConicProgram::max_violation(const RVec& x) const {
  double v = 0.0;
  for (const auto& e : equalities) v = std::max(v, std::abs(row_value(e, x)));
  for (const auto& c : cones) {
    RVec val(c.rows.size());
    for (size_t i = 0; i < c.rows.size(); ++i) val[i] = row_value(c.rows[i], x);
    v = std::max(v, cone_violation(c.kind, val));
  }
  return v;
}

double ConicProgram::evaluate_objective(const RVec& x) const {
  return objective.dot(x) + objective_offset;
}

void ConicProgram::validate() const {
  if (objective.size() != n_vars) throw SolverError("objective length differs from n_vars");
  auto check_row = [&](const AffineRow& r) {
    for (const auto& t : r.terms)
      if (t.first < 0 || t.first >= n_vars) throw SolverError("variable index out of range");
  };
  for (const auto& e : equalities) check_row(e);
  for (const auto& c : cones) {
    if (c.rows.empty()) throw SolverError("empty cone block '" + c.label + "'");
    if (c.kind == ConeKind::kRotatedSoc && c.rows.size() < 2)
      throw SolverError("rotated cone needs at least two rows");
    for (const auto& r : c.rows) check_row(r);
  }
}

int ConicBuilder::add_variables(int count) {
  const int first = program_.n_vars;
  program_.n_vars += count;
  program_.objective.conservativeResize(program_.n_vars);
  program_.objective.tail(count).setZero();
  return first;
}

void ConicBuilder::set_objective(int var, double coef) { program_.objective[var] = coef; }
void ConicBuilder::add_objective(int var, double coef) { program_.objective[var] += coef; }

void ConicBuilder::add_equality(AffineRow row) { program_.equalities.push_back(std::move(row)); }

void ConicBuilder::add_nonneg(AffineRow row, std::string label) {
  // consecutive scalar constraints with the same label share one block
  if (!program_.cones.empty() && program_.cones.back().kind == ConeKind::kNonneg &&
      program_.cones.back().label == label) {
    program_.cones.back().rows.push_back(std::move(row));
    return;
  }
  program_.cones.push_back({ConeKind::kNonneg, {std::move(row)}, std::move(label)});
}

void ConicBuilder::add_soc(std::vector<AffineRow> rows, std::string label) {
  program_.cones.push_back({ConeKind::kSoc, std::move(rows), std::move(label)});
}

void ConicBuilder::add_rotated_soc(std::vector<AffineRow> rows, std::string label) {
  program_.cones.push_back({ConeKind::kRotatedSoc, std::move(rows), std::move(label)});
}

void ConicBuilder::add_quadratic_le(const RMat& factor, const std::vector<int>& vars,
                                    AffineRow bound, std::string label) {
  std::vector<AffineRow> rows;
  rows.reserve(factor.rows() + 2);
  rows.push_back(std::move(bound));
  AffineRow half;
  half.constant = 0.5;
  rows.push_back(half);
  for (Eigen::Index i = 0; i < factor.rows(); ++i) {
    AffineRow r;
    for (Eigen::Index j = 0; j < factor.cols(); ++j) r.add(vars[j], factor(i, j));
    rows.push_back(std::move(r));
  }
  add_rotated_soc(std::move(rows), std::move(label));
}

ConicProgram ConicBuilder::build() && { return std::move(program_); }

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kUnbounded:
      return "unbounded";
    case SolveStatus::kMaxIter:
      return "max_iter";
    case SolveStatus::kNumericalError:
      return "numerical_error";
  }
  return "unknown";
}

ConicSolution solve(const ConicProgram& p, const SolverOptions& opts) {
  p.validate();
  const StdForm f = to_standard(p);
  ConicSolution sol;
  if (f.m == 0) {
    // No cones: only an equality-constrained linear objective remains.
    if (f.p == 0) {
      sol.x = RVec::Zero(f.n);
      sol.status = f.c.norm() == 0.0 ? SolveStatus::kOptimal : SolveStatus::kUnbounded;
    } else {
      Eigen::CompleteOrthogonalDecomposition<RMat> cod(f.A);
      sol.x = cod.solve(f.b);
      Eigen::CompleteOrthogonalDecomposition<RMat> cod_t(f.A.transpose());
      const RVec proj = f.c - f.A.transpose() * cod_t.solve(f.c);
      sol.status = proj.norm() <= opts.feas_tol * std::max(1.0, f.c.norm()) ? SolveStatus::kOptimal
                                                                            : SolveStatus::kUnbounded;
    }
  } else {
    InteriorPoint ipm(f, opts);
    sol = ipm.run();
  }
  if (sol.x.size() == p.n_vars &&
      (sol.status == SolveStatus::kOptimal || sol.status == SolveStatus::kMaxIter)) {
    sol.objective = p.evaluate_objective(sol.x);
    sol.max_violation = p.max_violation(sol.x);
  }
  return sol;
}

void dump_program(const ConicProgram& p, std::ostream& os) {
  os << "variables " << p.n_vars << "\n";
  os << "objective";
  for (int j = 0; j < p.n_vars; ++j)
    if (p.objective[j] != 0.0) os << " " << j << ":" << p.objective[j];
  os << " offset:" << p.objective_offset << "\n";
  auto print_row = [&](const AffineRow& r) {
    os << "  ";
    for (const auto& [j, c] : r.terms) os << j << ":" << c << " ";
    os << "+ " << r.constant << "\n";
  };
  os << "equalities " << p.equalities.size() << "\n";
  for (const auto& e : p.equalities) print_row(e);
  for (const auto& c : p.cones) {
    const char* kind = c.kind == ConeKind::kNonneg ? "nonneg" : c.kind == ConeKind::kSoc ? "soc" : "rsoc";
    os << "cone " << kind << " " << c.rows.size() << " " << (c.label.empty() ? "-" : c.label) << "\n";
    for (const auto& r : c.rows) print_row(r);
  }
}

RMat lift_complex_linear(const CMat& L) {
  const auto r = L.rows(), n = L.cols();
  RMat out(2 * r, 2 * n);
  out.topLeftCorner(r, n) = L.real();
  out.topRightCorner(r, n) = -L.imag();
  out.bottomLeftCorner(r, n) = L.imag();
  out.bottomRightCorner(r, n) = L.real();
  return out;
}

RMat lift_complex_quadratic(const CMat& Q) {
  if (Q.rows() != Q.cols()) throw SolverError("quadratic form must be square");
  const double qn = std::max(Q.cwiseAbs().maxCoeff(), 1e-300);
  if ((Q - Q.adjoint()).cwiseAbs().maxCoeff() > 1e-8 * qn)
    throw SolverError("quadratic form is not Hermitian");
  const CMat Qh = 0.5 * (Q + Q.adjoint());
  const auto n = Q.rows();
  RMat emb(2 * n, 2 * n);
  emb.topLeftCorner(n, n) = Qh.real();
  emb.topRightCorner(n, n) = -Qh.imag();
  emb.bottomLeftCorner(n, n) = Qh.imag();
  emb.bottomRightCorner(n, n) = Qh.real();
  Eigen::SelfAdjointEigenSolver<RMat> es(emb);
  const RVec& ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-9 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300) && ev.minCoeff() < -1e-9 * qn)
    throw SolverError("quadratic form is not positive semidefinite");
  // x_real' emb x_real = x^H Q x; keep rows with positive eigenvalues
  const double floor = 1e-14 * std::max(ev.maxCoeff(), 0.0);
  std::vector<int> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > floor) keep.push_back(static_cast<int>(i));
  RMat R(keep.size(), 2 * n);
  for (size_t k = 0; k < keep.size(); ++k)
    R.row(k) = std::sqrt(ev[keep[k]]) * es.eigenvectors().col(keep[k]).transpose();
  return R;
}

}  // namespace mfris
