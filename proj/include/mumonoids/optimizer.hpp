#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mumonoids/aggregation.hpp"
#include "mumonoids/dist.hpp"
#include "mumonoids/expr.hpp"
#include "mumonoids/types.hpp"

namespace mumonoids {

struct RewriteStep {
  std::string rule;  // PF, PJ, PA, Pdist
  bool applied = false;
  std::string reason;
  std::string before;
  std::string after;
};

struct RewriteTrace {
  std::vector<RewriteStep> steps;

  std::size_t applied_count() const;
  bool applied(std::string_view rule) const;
  std::string to_text() const;
  void append(const RewriteTrace& other) { steps.insert(steps.end(), other.steps.begin(), other.steps.end()); }
};

struct RewriteResult {
  ExprPtr expr;
  RewriteTrace trace;
};

struct OptimizerContext {
  TypeEnv types;            // types of the program inputs
  Annotations annotations;  // programmer compatibility assertions
  std::size_t probe_samples = 200;
  std::uint64_t seed = 1;
};

// λX.body where body is built from X by flatmaps with X-free functions and
// joins with X-free operands only.
bool is_syntactic_homomorphism(const Expr& lam);

// Substitutes let-bound functions into their uses, so every fixpoint body is
// a closed lambda over the program inputs. Unlabelled fixpoints bound by a
// let take the let's name as their label.
ExprPtr inline_lets(const ExprPtr& e);

// Pushes filters (flatmaps that keep or drop whole elements) into distinct
// fixpoints when φ provably preserves the tested component; a conjunction is
// split and only its pushable half moves.
RewriteResult rewrite_pf(const ExprPtr& e, const OptimizerContext& ctx);
// join(A, μ(R, φ)) with φ preserving the join key: R is first reduced to the
// elements whose key occurs in A.
RewriteResult rewrite_pj(const ExprPtr& e, const OptimizerContext& ctx);
// δ(μ(R, φ)) becomes μ^δ(R, φ) for distinct, or for an annotated δ whose
// compatibility the random probe does not refute.
RewriteResult rewrite_pa(const ExprPtr& e, const OptimizerContext& ctx);

// Execution plan for every fixpoint in e, keyed by node address in e.
Directives apply_pdist(const ExprPtr& e, const OptimizerContext& ctx, RewriteTrace* trace = nullptr);

struct Optimized {
  ExprPtr expr;
  Directives directives;
  RewriteTrace trace;
};

// Inlines lets, then runs PF to saturation, PJ, PA and finally plan selection,
// re-typechecking after every rewrite.
Optimized optimize(const ExprPtr& e, const OptimizerContext& ctx);

}  // namespace mumonoids
