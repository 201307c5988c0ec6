#include "penreg/penalty.hpp"

#include <array>
#include <utility>

namespace penreg {

namespace {

constexpr std::array<std::pair<std::string_view, PenaltyKind>, 9> kPenaltyNames{{
    {"none", PenaltyKind::None},
    {"lasso", PenaltyKind::Lasso},
    {"gl", PenaltyKind::GroupLasso},
    {"sgl", PenaltyKind::SparseGroupLasso},
    {"alasso", PenaltyKind::AdaptiveLasso},
    {"agl", PenaltyKind::AdaptiveGroupLasso},
    {"asgl", PenaltyKind::AdaptiveSGL},
    {"asgl_lasso", PenaltyKind::AdaptiveSGLLassoPart},
    {"asgl_gl", PenaltyKind::AdaptiveSGLGroupPart},
}};

}  // namespace

const std::vector<std::string>& penalty_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, kind] : kPenaltyNames) out.emplace_back(name);
    return out;
  }();
  return names;
}

PenaltyKind parse_penalty(std::string_view name) {
  for (const auto& [candidate, kind] : kPenaltyNames) {
    if (candidate == name) return kind;
  }
  std::string valid;
  for (const auto& n : penalty_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown penalization \"" + std::string(name) + "\"; valid: " + valid);
}

std::string penalty_name(PenaltyKind kind) {
  for (const auto& [name, candidate] : kPenaltyNames) {
    if (candidate == kind) return std::string(name);
  }
  return "none";
}

bool uses_alpha(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::SparseGroupLasso:
    case PenaltyKind::AdaptiveSGL:
    case PenaltyKind::AdaptiveSGLLassoPart:
    case PenaltyKind::AdaptiveSGLGroupPart: return true;
    default: return false;
  }
}

bool uses_groups(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::None:
    case PenaltyKind::Lasso:
    case PenaltyKind::AdaptiveLasso: return false;
    default: return true;
  }
}

bool uses_lasso_weights(PenaltyKind kind) {
  return kind == PenaltyKind::AdaptiveLasso || kind == PenaltyKind::AdaptiveSGL ||
         kind == PenaltyKind::AdaptiveSGLLassoPart;
}

bool uses_gl_weights(PenaltyKind kind) {
  return kind == PenaltyKind::AdaptiveGroupLasso || kind == PenaltyKind::AdaptiveSGL ||
         kind == PenaltyKind::AdaptiveSGLGroupPart;
}

}  // namespace penreg
