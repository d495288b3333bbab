#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rumi/ad/params.hpp"
#include "rumi/ad/tape.hpp"

namespace rumi::ad {

/// Builds a scalar-valued graph on a fresh tape. Called once for the
/// analytic pass and twice per perturbed element.
using ScalarGraph = std::function<Var(Tape&)>;

enum class FdScheme {
  /// D(h) = (f(x+h) - f(x-h)) / 2h
  Central,
  /// (4 D(h/2) - D(h)) / 3. Truncation error O(h^4), so a larger h can be
  /// used and the rounding noise of the quotient drops with it. Deep graphs
  /// with gradient entries near 1e-8 need this to resolve them.
  /// When a perturbation flips a relu or changes an argmax the step is
  /// divided by 4 (down to 1e-7) until every evaluation stays on the
  /// base point's branch.
  Richardson,
};

/// Compares backward() against finite differences for every element of
/// every parameter in `wrt`. Returns max |a - b| / max(|a|, |b|, 1e-8).
/// Parameter values are restored.
double grad_check(const ScalarGraph& graph, std::span<Parameter* const> wrt, double h = 1e-5,
                  FdScheme scheme = FdScheme::Central);

/// Same check with plain tensors as inputs; they enter the graph as leaves.
double grad_check(const std::function<Var(Tape&, std::span<const Var>)>& graph,
                  std::vector<Tensor> inputs, double h = 1e-5, FdScheme scheme = FdScheme::Central);

}  // namespace rumi::ad
