#include "rumi/ad/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

namespace rumi::ad {

double grad_check(const ScalarGraph& graph, std::span<Parameter* const> wrt, double h, FdScheme scheme) {
  std::vector<Tensor> analytic;
  std::uint64_t base_branch = 0;
  {
    Tape tape;
    for (Parameter* p : wrt) tape.param(*p);
    Var loss = graph(tape);
    Gradients grads = tape.backward(loss);
    for (Parameter* p : wrt) {
      const Tensor* g = grads.of(*p);
      analytic.push_back(g ? *g : Tensor(p->value.shape()));
    }
    base_branch = tape.branch_signature();
  }

  bool same_branch = true;
  auto evaluate = [&] {
    Tape tape;
    const double v = graph(tape).value().item();
    if (scheme == FdScheme::Richardson) same_branch = same_branch && tape.branch_signature() == base_branch;
    return v;
  };

  double worst = 0.0;
  for (std::size_t k = 0; k < wrt.size(); ++k) {
    Parameter& p = *wrt[k];
    if (p.frozen) continue;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      auto central = [&](double step) {
        p.value[i] = saved + step;
        const double up = evaluate();
        p.value[i] = saved - step;
        const double down = evaluate();
        p.value[i] = saved;
        return (up - down) / (2.0 * step);
      };
      double numeric = 0.0;
      if (scheme == FdScheme::Central) {
        numeric = central(h);
      } else {
        for (double step = h;; step /= 4.0) {
          same_branch = true;
          numeric = (4.0 * central(step / 2.0) - central(step)) / 3.0;
          if (same_branch || step < 1e-7) break;
        }
      }
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

double grad_check(const std::function<Var(Tape&, std::span<const Var>)>& graph,
                  std::vector<Tensor> inputs, double h, FdScheme scheme) {
  std::vector<Parameter> holders;
  holders.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i)
    holders.push_back(Parameter{"input" + std::to_string(i), std::move(inputs[i]), false, false});
  std::vector<Parameter*> wrt;
  for (auto& p : holders) wrt.push_back(&p);

  return grad_check(
      [&](Tape& tape) {
        std::vector<Var> leaves;
        for (auto* p : wrt) leaves.push_back(tape.param(*p));
        return graph(tape, leaves);
      },
      wrt, h, scheme);
}

}  // namespace rumi::ad
