// Advances a small random state and prints the H^s sum, ‖Ω‖ and the Lyapunov value.

#include <cstdio>

#include "tcm/diagnostics.hpp"
#include "tcm/harness/ic_library.hpp"

int main() {
  tcm::Params p;
  p.grid = tcm::GridSpec::make(64);
  p.dt = 2e-3;
  p.t_end = 2.0;
  const tcm::State x0 = tcm::harness::ic_library("random-band", 1e-2, 7, p.grid, p.s);
  const tcm::LyapunovConstants lc = tcm::lyapunov_constants(p.alpha, p.eta);

  std::printf("%6s %14s %14s %14s\n", "t", "hs_sum", "omega_l2", "lyapunov");
  tcm::solve(x0, p, {[&](const tcm::State& x) {
               std::printf("%6.2f %14.6e %14.6e %14.6e\n", x.t, tcm::hs_sum(x, p.s),
                           tcm::lp_norm(tcm::omega(x, p.eta), 2.0), tcm::lyapunov_record(x, p, p.s, lc).value);
             }},
             tcm::SolveOptions{0.25, 0.0, {}});
}
