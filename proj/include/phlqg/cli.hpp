#ifndef PHLQG_CLI_HPP
#define PHLQG_CLI_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "phlqg/balancing.hpp"
#include "phlqg/hamiltonian_opt.hpp"

namespace phlqg {

/// One row of the reduction sweep. Failed truncations carry NaN errors and
/// the error code name in the matching failure field.
struct SweepRecord {
  int ell = 0;
  double bound_canonical = 0, bound_optimized = 0;
  double err_structured_canonical = 0, err_structured_optimized = 0, err_classical = 0;
  bool regular_canonical = false, regular_optimized = false, regular_classical = false;
  std::string failure_canonical, failure_optimized, failure_classical;
};

struct SweepOptions {
  int ell_lo = 1, ell_hi = 10;
  // Order of the canonical-Q reduction the optimized Hamiltonian is
  // computed on; -1 picks ell_hi + 2, 0 optimizes the full model.
  int pre_reduce = -1;
  HamiltonianOptions hamiltonian;
  BalanceOptions balance;
  double hinf_tol = 1e-6;
  int jobs = 1;
};

/// Canonical reduction to `order` followed by Q-optimization on the ROM.
/// order = 0 optimizes ph itself.
struct OptimizedModel {
  PortHamiltonianDAE base;  // model the optimization ran on
  OptimizedHamiltonian hamiltonian;
  int order = 0;
  double tail_bound = 0;  // error bound of the canonical pre-reduction
};

OptimizedModel optimize_model(const PortHamiltonianDAE& ph, int order, const Matrix& P_c,
                              const Matrix& P_f, const HamiltonianOptions& hopt = {},
                              const BalanceOptions& bopt = {});

struct SweepResult {
  std::vector<SweepRecord> records;
  Vector sigma, sigma_hat;
  int pre_order = 0;
  std::string optimize_failure;
};

SweepResult sweep(const PortHamiltonianDAE& ph, const SweepOptions& opt);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records);
/// Reads the numeric columns back; failure fields stay empty.
std::vector<SweepRecord> read_sweep_csv(std::istream& is);

/// Gnuplot script plotting the CSV columns on a log scale.
std::string sweep_plot_script(const std::string& csv_path, const std::string& title);

/// Model argument: a system file path, or "counterexample:<id>".
struct LoadedModel {
  AnySystem sys;
  std::optional<Matrix> P_c, P_f;  // printed fixtures for counterexamples
};

LoadedModel load_model(const std::string& spec);

/// Exit status 0 on success, 1 on usage errors, 2 on numerical or
/// certificate failures. Error records go to err as "Code: message".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace phlqg

#endif  // PHLQG_CLI_HPP
