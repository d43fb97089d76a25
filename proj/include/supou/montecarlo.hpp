#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "supou/errors.hpp"
#include "supou/gmm.hpp"
#include "supou/levy.hpp"

namespace supou {

// Replicated simulate-then-estimate study at a known truth. Replication r
// draws from Rng::stream(seed, r), so the study is reproducible and each
// replication is independent of the others and of scheduling.
struct McConfig {
  SubordinatorSpec levy;
  GammaMeanReversion pi;
  MomentVector::Kind kind = MomentVector::Kind::supou;
  std::size_t n = 10000;
  double delta = 1.0;
  std::size_t m = 6;
  Weighting weighting = Weighting::identity;
  std::size_t replications = 100;
  std::uint64_t seed = 1;
  double sim_tol = 1e-6;
  OptimizerConfig optimizer;
  ParameterBox box;

  void validate() const;
};

struct McRow {
  std::size_t rep = 0;
  ThetaParams theta_hat;
  Eigen::Vector4d std_errors = Eigen::Vector4d::Zero();
  double objective = 0.0;
  double j_stat = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t restart_index = 0;
  double smallest_singular = 0.0;
};

struct McComponent {
  std::string name;
  double truth = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double bias = 0.0;        // mean - truth
  double emp_sd = 0.0;      // sample sd of the estimates across replications
  double theory_sd = 0.0;   // sqrt diag of the sandwich at the truth
  double sd_ratio = 0.0;    // emp_sd / theory_sd
  double coverage95 = 0.0;  // fraction of 1.96-interval hits
};

struct McReport {
  std::vector<McRow> rows;  // completed replications, sorted by index
  std::array<McComponent, 4> summary{};
  Eigen::Vector4d theory_se = Eigen::Vector4d::Zero();
  ThetaParams truth;
  bool aborted = false;  // a replication failed; rows hold the completed ones
  std::size_t failed_rep = 0;
  std::string error_message;
  errc error_kind = errc::numeric;
};

// Run the full study. A failing replication aborts the run: the report comes
// back with aborted set, the completed rows, and the first failure by
// replication index. The summary is only populated on a complete run.
McReport run_monte_carlo(const McConfig& config);

}  // namespace supou
