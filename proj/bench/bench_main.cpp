// Compares the reference (direct, serial) sweeps against the factored OpenMP
// kernels, and the tree pipeline against the dense oracle. Run manually:
//   bench_compare [cells] [horizon]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ttvi/pipeline.hpp"

using namespace ttvi;

namespace {

using Clock = std::chrono::steady_clock;

double time_of(const std::function<void()>& f) {
  const auto t0 = Clock::now();
  f();
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

RunConfig linear_2d(std::size_t cells, std::size_t horizon) {
  RunConfig cfg;
  for (int i = 0; i < 2; ++i) {
    SubsystemConfig s;
    s.name = "x" + std::to_string(i + 1);
    s.dynamics.state_dim = 1;
    s.dynamics.input_dim = 1;
    s.dynamics.A = {{0.9}};
    s.dynamics.B = {{0.5}};
    s.dynamics.noise_std = {1.0};
    s.dynamics.state_box = {{-20.0, 5.0}};
    s.dynamics.input_box = {{-2.0, 2.0}};
    s.grid.cells_per_dim = {cells};
    s.grid.inputs_per_dim = {5};
    cfg.subsystems.push_back(std::move(s));
  }
  cfg.predicates = {{"p1", 0, std::nullopt, {0.0, 5.0}, false},
                    {"p2", 0, std::nullopt, {-5.0, 0.0}, false},
                    {"p3", 1, std::nullopt, {-20.0, -15.0}, false}};
  cfg.initial_state = {-10.0, 0.0};
  cfg.formula = "(!p2 & !p3) U p1";
  cfg.horizon = horizon;
  cfg.v_th = 1e-4;
  cfg.mc_episodes = 0;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t cells = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 60;
  const std::size_t horizon = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 12;

  RunConfig cfg = linear_2d(cells, horizon);
  Instance inst = build_instance(cfg);
  TreeOps ops = inst.make_ops();
  JointSpace space = build_joint_space(inst.mdps, inst.labeling, inst.dfa);
  std::printf("2-D linear system, %zu cells/dim (%zu joint states), horizon %zu\n", cells,
              space.n_states, horizon);

  // Factored kernels against the direct reference, identical results expected.
  std::vector<DenseValueField> direct_hist, factored_hist;
  SynthesisOutcome synth = run_synthesis(inst, ops, cfg);
  double t_direct = time_of([&] {
    direct_hist = dense_vi_fixed_policy_direct(space, inst.mdps, inst.dfa,
                                               as_joint_policy(synth.policy, space), horizon);
  });
  double t_factored = time_of([&] {
    factored_hist = dense_vi_fixed_policy(space, inst.mdps, inst.dfa, inst.outgoing,
                                          inst.labeling, synth.policy, horizon);
  });
  double diff = 0.0;
  for (std::size_t q = 0; q < space.n_modes; ++q)
    for (std::size_t s = 0; s < space.n_states; ++s)
      diff = std::max(diff, std::abs(direct_hist[horizon].per_mode[q][s] -
                                     factored_hist[horizon].per_mode[q][s]));
  std::printf("fixed-policy sweep   direct (reference, serial): %8.3f s\n", t_direct);
  std::printf("fixed-policy sweep   factored (OpenMP kernels):  %8.3f s   speedup %.1fx, max diff %.2e\n",
              t_factored, t_direct / t_factored, diff);

#ifdef _OPENMP
  const int max_threads = omp_get_max_threads();
  omp_set_num_threads(1);
  double t_serial = time_of([&] {
    dense_vi_optimal(space, inst.mdps, inst.dfa, inst.outgoing, inst.labeling, horizon);
  });
  omp_set_num_threads(max_threads);
  double t_parallel = time_of([&] {
    dense_vi_optimal(space, inst.mdps, inst.dfa, inst.outgoing, inst.labeling, horizon);
  });
  std::printf("optimal sweep        factored, 1 thread:         %8.3f s\n", t_serial);
  std::printf("optimal sweep        factored, %2d threads:       %8.3f s   speedup %.1fx\n",
              max_threads, t_parallel, t_serial / t_parallel);
#else
  double t_opt = time_of([&] {
    dense_vi_optimal(space, inst.mdps, inst.dfa, inst.outgoing, inst.labeling, horizon);
  });
  std::printf("optimal sweep        factored (no OpenMP):       %8.3f s\n", t_opt);
#endif

  double t_tree = time_of([&] { run_synthesis(inst, ops, cfg); });
  std::printf("tree synthesis       rank-1 pipeline:            %8.3f s   (%zu scalars vs %zu dense per mode)\n",
              t_tree, synth.tree.scalars_stored(), space.n_states);
  return 0;
}
