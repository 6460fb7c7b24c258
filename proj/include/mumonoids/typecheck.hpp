#pragma once

#include <string>
#include <vector>

#include "mumonoids/expr.hpp"
#include "mumonoids/types.hpp"

namespace mumonoids {

// Typing is bidirectional. Lambdas are never typed on their own: every site
// that applies a function (application, flatmap, reduce, join consumers,
// fixpoint bodies) pushes the argument types into it. A let-bound lambda is
// re-checked at each of its use sites.

TypeExpr type_of_value(const Value& v);

// Type of a data-valued expression. Throws a type error naming the violated rule.
TypeExpr infer(const TypeEnv& env, const ExprPtr& e);

// Result type of applying `fn` to arguments of the given types, one at a time.
TypeExpr infer_application(const TypeEnv& env, const ExprPtr& fn, const std::vector<TypeExpr>& args);

// Checks that an aggregator can be applied to bags of `elem`.
void check_aggregator(const TypeEnv& env, const AggregatorSpec& delta, const TypeExpr& elem);

// Typechecks phi at Bag(C(α)) -> Bag(C(α)), where C(α) is `elem` with the node
// at `path` replaced by a rigid variable. Success proves that phi keeps that
// component of every element unchanged.
bool preserves_path(const TypeEnv& env, const ExprPtr& phi, const TypeExpr& elem, BagKind kind,
                    const TypePath& path);

// Condition (C) for the variable `var` of `pattern`.
bool check_condition_c(const TypeEnv& env, const ExprPtr& phi, const TypeExpr& elem, BagKind kind,
                       const Pattern& pattern, const std::string& var);

}  // namespace mumonoids
