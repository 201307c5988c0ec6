#pragma once

#include "penreg/groups.hpp"
#include "penreg/types.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace penreg {

enum class PenaltyKind {
  None,
  Lasso,
  GroupLasso,
  SparseGroupLasso,
  AdaptiveLasso,
  AdaptiveGroupLasso,
  AdaptiveSGL,
  AdaptiveSGLLassoPart,  // "asgl_lasso": weights on the l1 part only
  AdaptiveSGLGroupPart,  // "asgl_gl": weights on the group part only
};

/// Accepts "none", "lasso", "gl", "sgl", "alasso", "agl", "asgl",
/// "asgl_lasso", "asgl_gl".
PenaltyKind parse_penalty(std::string_view name);
std::string penalty_name(PenaltyKind kind);
const std::vector<std::string>& penalty_names();

/// True for the SGL family, the only kinds that read alpha.
bool uses_alpha(PenaltyKind kind);
bool uses_groups(PenaltyKind kind);
bool uses_lasso_weights(PenaltyKind kind);
bool uses_gl_weights(PenaltyKind kind);
inline bool is_adaptive(PenaltyKind kind) {
  return uses_lasso_weights(kind) || uses_gl_weights(kind);
}

/// One fully specified penalty:
///   alpha*lambda*sum_j w_j |b_j| + (1-alpha)*lambda*sum_l sqrt(p_l) v_l ||b^l||_2
/// with alpha fixed to 1 for lasso kinds, 0 for group lasso kinds, and unit
/// weights where a kind is not adaptive on that part.
template <typename Scalar = double>
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::None;
  Scalar lambda1 = Scalar(1);
  Scalar alpha = Scalar(0.5);
  std::optional<Vector<Scalar>> lasso_weights;
  std::optional<Vector<Scalar>> gl_weights;

  /// Multiplier of the (weighted) l1 term.
  Scalar l1_level() const {
    switch (kind) {
      case PenaltyKind::None: return Scalar(0);
      case PenaltyKind::Lasso:
      case PenaltyKind::AdaptiveLasso: return lambda1;
      case PenaltyKind::GroupLasso:
      case PenaltyKind::AdaptiveGroupLasso: return Scalar(0);
      default: return alpha * lambda1;
    }
  }

  /// Multiplier of the (weighted) group term.
  Scalar group_level() const {
    switch (kind) {
      case PenaltyKind::None:
      case PenaltyKind::Lasso:
      case PenaltyKind::AdaptiveLasso: return Scalar(0);
      case PenaltyKind::GroupLasso:
      case PenaltyKind::AdaptiveGroupLasso: return lambda1;
      default: return (Scalar(1) - alpha) * lambda1;
    }
  }

  Scalar lasso_weight(Index j) const { return lasso_weights ? (*lasso_weights)(j) : Scalar(1); }
  Scalar gl_weight(Index l) const { return gl_weights ? (*gl_weights)(l) : Scalar(1); }

  void validate(Index p, const GroupStructure* groups) const {
    if (!(lambda1 >= Scalar(0)) || !std::isfinite(static_cast<double>(lambda1))) {
      throw ConfigError("lambda1 must be a finite nonnegative number");
    }
    if (uses_alpha(kind) && !(alpha >= Scalar(0) && alpha <= Scalar(1))) {
      throw ConfigError("alpha must lie in [0, 1]");
    }
    if (uses_groups(kind)) {
      if (!groups) throw ConfigError("penalty " + penalty_name(kind) + " needs a group index");
      if (groups->num_predictors() != p) {
        throw ConfigError("group index covers " + std::to_string(groups->num_predictors()) +
                          " predictors, data has " + std::to_string(p));
      }
    }
    check_weights(lasso_weights, uses_lasso_weights(kind), p, "lasso_weights");
    if (uses_gl_weights(kind)) {
      check_weights(gl_weights, true, groups->num_groups(), "gl_weights");
    } else {
      check_weights(gl_weights, false, 0, "gl_weights");
    }
  }

 private:
  void check_weights(const std::optional<Vector<Scalar>>& w, bool required, Index length,
                     const char* name) const {
    if (!required) {
      if (w) throw ConfigError(std::string(name) + " given for non-adaptive part of " +
                               penalty_name(kind));
      return;
    }
    if (!w) throw ConfigError("penalty " + penalty_name(kind) + " needs " + name);
    if (w->size() != length) {
      throw ConfigError(std::string(name) + " has length " + std::to_string(w->size()) +
                        ", expected " + std::to_string(length));
    }
    for (Index i = 0; i < w->size(); ++i) {
      if (!((*w)(i) >= Scalar(0)) || !std::isfinite(static_cast<double>((*w)(i)))) {
        throw ConfigError(std::string(name) + " must be finite and nonnegative");
      }
    }
  }
};

/// Value of the penalty at beta. `groups` may be null for kinds without a
/// group term.
template <typename Scalar, typename Derived>
Scalar penalty_value(const PenaltySpec<Scalar>& spec, const Eigen::MatrixBase<Derived>& beta,
                     const GroupStructure* groups) {
  if (uses_groups(spec.kind) && !groups) {
    throw ConfigError("penalty " + penalty_name(spec.kind) + " needs a group index");
  }
  Scalar total(0);
  const Scalar a = spec.l1_level();
  const Scalar c = spec.group_level();
  if (a != Scalar(0)) {
    Scalar l1(0);
    for (Index j = 0; j < beta.size(); ++j) l1 += spec.lasso_weight(j) * std::abs(beta(j));
    total += a * l1;
  }
  if (c != Scalar(0)) {
    Scalar gl(0);
    for (Index l = 0; l < groups->num_groups(); ++l) {
      gl += std::sqrt(static_cast<Scalar>(groups->size(l))) * spec.gl_weight(l) *
            block_norm(beta, *groups, l);
    }
    total += c * gl;
  }
  return total;
}

/// Soft thresholding sign(v_j) max(|v_j| - t_j, 0).
template <typename DerivedV, typename DerivedT>
Vector<typename DerivedV::Scalar> prox_l1(const Eigen::MatrixBase<DerivedV>& v,
                                          const Eigen::MatrixBase<DerivedT>& threshold) {
  using Scalar = typename DerivedV::Scalar;
  if (v.size() != threshold.size()) throw ConfigError("prox_l1: length mismatch");
  Vector<Scalar> out(v.size());
  for (Index j = 0; j < v.size(); ++j) {
    const Scalar t = threshold(j);
    if (!(t >= Scalar(0))) throw ConfigError("prox_l1: negative threshold");
    const Scalar mag = std::abs(v(j)) - t;
    out(j) = mag > Scalar(0) ? std::copysign(mag, v(j)) : Scalar(0);
  }
  return out;
}

/// Block soft thresholding v^l max(1 - t_l / ||v^l||, 0) per group.
template <typename DerivedV, typename DerivedT>
Vector<typename DerivedV::Scalar> prox_group(const Eigen::MatrixBase<DerivedV>& v,
                                             const GroupStructure& groups,
                                             const Eigen::MatrixBase<DerivedT>& threshold) {
  using Scalar = typename DerivedV::Scalar;
  if (groups.num_predictors() != v.size() || threshold.size() != groups.num_groups()) {
    throw ConfigError("prox_group: shape mismatch");
  }
  Vector<Scalar> out = v;
  for (Index l = 0; l < groups.num_groups(); ++l) {
    const Scalar t = threshold(l);
    if (!(t >= Scalar(0))) throw ConfigError("prox_group: negative threshold");
    const Scalar norm = block_norm(v, groups, l);
    const Scalar factor = norm > t ? Scalar(1) - t / norm : Scalar(0);
    for (Index j : groups.members(l)) out(j) *= factor;
  }
  return out;
}

/// In-place proximal point of step * penalty. For the SGL family the
/// elementwise stage runs before the blockwise stage; this composition is
/// the exact prox of their sum.
template <typename Scalar, typename Derived>
void prox_penalty_inplace(const PenaltySpec<Scalar>& spec, Eigen::MatrixBase<Derived>& z,
                          Scalar step, const GroupStructure* groups) {
  const Scalar a = spec.l1_level() * step;
  const Scalar c = spec.group_level() * step;
  if (a > Scalar(0)) {
    for (Index j = 0; j < z.size(); ++j) {
      const Scalar mag = std::abs(z(j)) - a * spec.lasso_weight(j);
      z(j) = mag > Scalar(0) ? std::copysign(mag, z(j)) : Scalar(0);
    }
  }
  if (c > Scalar(0)) {
    for (Index l = 0; l < groups->num_groups(); ++l) {
      const Scalar t = c * std::sqrt(static_cast<Scalar>(groups->size(l))) * spec.gl_weight(l);
      const Scalar norm = block_norm(z, *groups, l);
      const Scalar factor = norm > t ? Scalar(1) - t / norm : Scalar(0);
      for (Index j : groups->members(l)) z(j) *= factor;
    }
  }
}

template <typename Scalar, typename Derived>
Vector<Scalar> prox_penalty(const PenaltySpec<Scalar>& spec, const Eigen::MatrixBase<Derived>& v,
                            Scalar step, const GroupStructure* groups) {
  if (!(step > Scalar(0))) throw ConfigError("prox_penalty: step must be positive");
  spec.validate(v.size(), groups);
  Vector<Scalar> z = v;
  prox_penalty_inplace(spec, z, step, groups);
  return z;
}

/// Infinity-norm of the smallest element of grad + subdifferential(penalty)
/// at beta, taking the l1 part elementwise first and letting the group part
/// absorb what remains in l2. Zero exactly at stationary points of
/// smooth + penalty; an upper bound on the true distance otherwise.
template <typename Scalar, typename DerivedB, typename DerivedG>
Scalar subgradient_residual(const PenaltySpec<Scalar>& spec,
                            const Eigen::MatrixBase<DerivedB>& beta,
                            const Eigen::MatrixBase<DerivedG>& grad,
                            const GroupStructure* groups) {
  const Scalar a = spec.l1_level();
  const Scalar c = spec.group_level();
  const Index p = beta.size();
  Vector<Scalar> r(p);
  for (Index j = 0; j < p; ++j) {
    const Scalar t = a * spec.lasso_weight(j);
    if (beta(j) != Scalar(0)) {
      r(j) = grad(j) + t * (beta(j) > Scalar(0) ? Scalar(1) : Scalar(-1));
    } else {
      const Scalar mag = std::abs(grad(j)) - t;
      r(j) = mag > Scalar(0) ? std::copysign(mag, grad(j)) : Scalar(0);
    }
  }
  if (c > Scalar(0)) {
    for (Index l = 0; l < groups->num_groups(); ++l) {
      const Scalar radius = c * std::sqrt(static_cast<Scalar>(groups->size(l))) * spec.gl_weight(l);
      const Scalar bnorm = block_norm(beta, *groups, l);
      if (bnorm > Scalar(0)) {
        for (Index j : groups->members(l)) r(j) += radius * beta(j) / bnorm;
      } else {
        const Scalar rnorm = block_norm(r, *groups, l);
        const Scalar factor = rnorm > radius ? Scalar(1) - radius / rnorm : Scalar(0);
        for (Index j : groups->members(l)) r(j) *= factor;
      }
    }
  }
  return p == 0 ? Scalar(0) : r.cwiseAbs().maxCoeff();
}

}  // namespace penreg
