#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace htsentinel::theory {

// Numerically stable softmax (max subtraction).
Eigen::VectorXd softmax(const Eigen::VectorXd& z);

// Hessian of the softmax cross-entropy in logit space: diag(p) - p p^T.
Eigen::MatrixXd ce_hessian(const Eigen::VectorXd& p);

// Lipschitz ratio of the CE gradient between two logit vectors:
// ||grad(z1) - grad(z2)|| / ||z1 - z2|| with grad(z) = softmax(z) - onehot.
// The supremum over probes is 1/2 (the Hessian's largest eigenvalue), not
// the 1/4 sometimes quoted; p = (1/2, 1/2) attains 1/2.
double smoothness_probe(const Eigen::VectorXd& z1, const Eigen::VectorXd& z2,
                        Eigen::Index label);

// Toy fixed-attention cross-entropy problem. Attention weights are a frozen
// row-stochastic matrix P, so the map V -> logits is the fixed linear
// operator A = P X and f(V) = mean CE(A V, y) is convex and L-smooth with
// the safe constant L = sigma_max(A)^2 / (2 * samples).
struct GdInstance {
  Eigen::MatrixXd map;  // A, samples x dim
  std::vector<Eigen::Index> labels;
  Eigen::Index classes = 0;
  Eigen::Index dim = 0;
  double lipschitz = 0.0;
};

GdInstance make_gd_instance(Eigen::Index classes, Eigen::Index dim, Eigen::Index samples,
                            std::uint64_t seed);

double ce_loss(const GdInstance& inst, const Eigen::MatrixXd& v);

// Gradient descent from V = 0; returns the loss at every step including the
// start (steps + 1 values). Requires eta <= 1/L.
std::vector<double> gd_descent_check(const GdInstance& inst, double eta, std::size_t steps);

struct TheoryCheck {
  std::string claim;
  double bound = 0.0;
  double observed = 0.0;
  bool pass = false;
  bool informational = false;  // reported, not required to pass
};

struct TheoryReport {
  std::uint64_t seed = 0;
  std::vector<TheoryCheck> checks;
};

// Runs every numerical claim check. The quarter-smoothness line is
// informational: it records the observed extremum (~1/2) against the 1/4
// bound without being required.
TheoryReport run_theory_checks(std::uint64_t seed);

bool all_required_pass(const TheoryReport& report);

std::string to_json(const TheoryReport& report);

}  // namespace htsentinel::theory
