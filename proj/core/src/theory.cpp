#include "htsentinel/theory.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "htsentinel/errors.hpp"
#include "htsentinel/rng.hpp"

namespace htsentinel::theory {

namespace {

Eigen::VectorXd random_logits(RngStream& rng, Eigen::Index k, double scale) {
  Eigen::VectorXd z(k);
  for (Eigen::Index i = 0; i < k; ++i) z(i) = scale * rng.normal();
  return z;
}

Eigen::MatrixXd ce_gradient(const GdInstance& inst, const Eigen::MatrixXd& v) {
  const Eigen::Index s = inst.map.rows();
  Eigen::MatrixXd residual(s, inst.classes);
  for (Eigen::Index i = 0; i < s; ++i) {
    Eigen::VectorXd p = softmax((inst.map.row(i) * v).transpose());
    p(inst.labels[static_cast<std::size_t>(i)]) -= 1.0;
    residual.row(i) = p.transpose();
  }
  return inst.map.transpose() * residual / static_cast<double>(s);
}

}  // namespace

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  const double zmax = z.maxCoeff();
  Eigen::VectorXd p = (z.array() - zmax).exp();
  return p / p.sum();
}

Eigen::MatrixXd ce_hessian(const Eigen::VectorXd& p) {
  return Eigen::MatrixXd(p.asDiagonal()) - p * p.transpose();
}

double smoothness_probe(const Eigen::VectorXd& z1, const Eigen::VectorXd& z2,
                        Eigen::Index label) {
  if (z1.size() != z2.size()) throw invalid_input_error("smoothness_probe: size mismatch");
  if (z1 == z2) throw domain_error("smoothness_probe: z1 must differ from z2");
  Eigen::VectorXd g1 = softmax(z1);
  Eigen::VectorXd g2 = softmax(z2);
  g1(label) -= 1.0;
  g2(label) -= 1.0;
  return (g1 - g2).norm() / (z1 - z2).norm();
}

GdInstance make_gd_instance(Eigen::Index classes, Eigen::Index dim, Eigen::Index samples,
                            std::uint64_t seed) {
  if (classes < 2 || dim < 1 || samples < 1)
    throw invalid_config_error("make_gd_instance: need classes >= 2, dim >= 1, samples >= 1");
  RngStream rng(seed, 0, 0);

  // Frozen attention: row-stochastic P over `samples` context positions.
  Eigen::MatrixXd p(samples, samples);
  for (Eigen::Index i = 0; i < samples; ++i)
    p.row(i) = softmax(random_logits(rng, samples, 1.0)).transpose();
  Eigen::MatrixXd x(samples, dim);
  for (Eigen::Index i = 0; i < samples; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) x(i, j) = rng.normal();

  GdInstance inst;
  inst.map = p * x;
  inst.classes = classes;
  inst.dim = dim;
  inst.labels.resize(static_cast<std::size_t>(samples));
  for (auto& l : inst.labels)
    l = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(classes)));
  const double op = inst.map.jacobiSvd().singularValues()(0);
  inst.lipschitz = op * op / (2.0 * static_cast<double>(samples));
  return inst;
}

double ce_loss(const GdInstance& inst, const Eigen::MatrixXd& v) {
  const Eigen::Index s = inst.map.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < s; ++i) {
    const Eigen::VectorXd z = (inst.map.row(i) * v).transpose();
    const double zmax = z.maxCoeff();
    const double lse = zmax + std::log((z.array() - zmax).exp().sum());
    total += lse - z(inst.labels[static_cast<std::size_t>(i)]);
  }
  return total / static_cast<double>(s);
}

std::vector<double> gd_descent_check(const GdInstance& inst, double eta, std::size_t steps) {
  if (steps == 0) throw invalid_config_error("gd_descent_check: steps must be >= 1");
  if (!(eta > 0.0) || eta > 1.0 / inst.lipschitz * (1.0 + 1e-12))
    throw invalid_config_error("gd_descent_check: eta must lie in (0, 1/L]");
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(inst.dim, inst.classes);
  std::vector<double> losses;
  losses.reserve(steps + 1);
  losses.push_back(ce_loss(inst, v));
  for (std::size_t t = 0; t < steps; ++t) {
    v -= eta * ce_gradient(inst, v);
    losses.push_back(ce_loss(inst, v));
  }
  return losses;
}

TheoryReport run_theory_checks(std::uint64_t seed) {
  TheoryReport report;
  report.seed = seed;
  RngStream rng(seed, 7, 0);

  double sym = 0.0, min_eig = 0.0, row_sum = 0.0, max_eig = 0.0;
  double convexity_gap = 0.0, grad_err = 0.0;
  const int probes = 10000;
  for (int t = 0; t < probes; ++t) {
    const Eigen::Index k = 2 + static_cast<Eigen::Index>(rng.below(9));  // K in [2, 10]
    const Eigen::VectorXd p = softmax(random_logits(rng, k, 2.0));
    const Eigen::MatrixXd h = ce_hessian(p);
    sym = std::max(sym, (h - h.transpose()).cwiseAbs().maxCoeff());
    row_sum = std::max(row_sum, (h * Eigen::VectorXd::Ones(k)).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
    max_eig = std::max(max_eig, eig.eigenvalues().maxCoeff());

    // convexity along a random segment: midpoint under the chord
    const Eigen::Index label = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(k)));
    const Eigen::VectorXd z1 = random_logits(rng, k, 3.0);
    const Eigen::VectorXd z2 = random_logits(rng, k, 3.0);
    auto ce = [&](const Eigen::VectorXd& z) {
      const double zmax = z.maxCoeff();
      return zmax + std::log((z.array() - zmax).exp().sum()) - z(label);
    };
    convexity_gap = std::max(convexity_gap,
                             ce(0.5 * (z1 + z2)) - 0.5 * (ce(z1) + ce(z2)));

    // gradient identity vs central finite differences
    if (t < 200) {
      const Eigen::VectorXd z = random_logits(rng, k, 2.0);
      Eigen::VectorXd g = softmax(z);
      g(label) -= 1.0;
      const double h_fd = 1e-6;
      for (Eigen::Index j = 0; j < k; ++j) {
        Eigen::VectorXd zp = z, zm = z;
        zp(j) += h_fd;
        zm(j) -= h_fd;
        const double fd = (ce(zp) - ce(zm)) / (2.0 * h_fd);
        grad_err = std::max(grad_err, std::fabs(fd - g(j)) / std::max(1.0, std::fabs(g(j))));
      }
    }
  }

  double sup_ratio = 0.0;
  for (int t = 0; t < probes; ++t) {
    const Eigen::Index k = 2 + static_cast<Eigen::Index>(rng.below(15));  // K in [2, 16]
    const Eigen::VectorXd z1 = random_logits(rng, k, 2.0);
    Eigen::VectorXd dir = random_logits(rng, k, 1.0);
    if (dir.norm() == 0.0) continue;
    const double step = std::pow(10.0, rng.uniform(-4.0, 0.5));
    const Eigen::VectorXd z2 = z1 + step * dir.normalized();
    const Eigen::Index label = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(k)));
    sup_ratio = std::max(sup_ratio, smoothness_probe(z1, z2, label));
  }

  bool monotone = true;
  double sublinear_ratio = 0.0;
  for (int inst_id = 0; inst_id < 20; ++inst_id) {
    const auto inst = make_gd_instance(2 + inst_id % 7, 8, 8 + 3 * (inst_id % 9),
                                       seed + 1000 + static_cast<std::uint64_t>(inst_id));
    const auto losses = gd_descent_check(inst, 1.0 / inst.lipschitz, 1000);
    for (std::size_t t = 1; t < losses.size(); ++t)
      if (losses[t] > losses[t - 1] + 1e-12) monotone = false;
    const double f_best = losses.back();
    double early = 0.0, late = 0.0;
    for (std::size_t t = 10; t <= 100; ++t)
      early = std::max(early, static_cast<double>(t) * (losses[t] - f_best));
    for (std::size_t t = 100; t <= 1000; ++t)
      late = std::max(late, static_cast<double>(t) * (losses[t] - f_best));
    if (early > 0.0) sublinear_ratio = std::max(sublinear_ratio, late / early);
  }

  auto add = [&](std::string claim, double bound, double observed, bool pass,
                 bool informational = false) {
    report.checks.push_back({std::move(claim), bound, observed, pass, informational});
  };
  add("hessian symmetric", 1e-12, sym, sym <= 1e-12);
  add("hessian positive semidefinite", -1e-10, min_eig, min_eig >= -1e-10);
  add("hessian annihilates the ones vector", 1e-12, row_sum, row_sum <= 1e-12);
  add("hessian eigenvalues at most 1/2", 0.5 + 1e-10, max_eig, max_eig <= 0.5 + 1e-10);
  add("hessian eigenvalues at most 1/4", 0.25, max_eig, max_eig <= 0.25,
      /*informational=*/true);
  add("cross-entropy convex along segments", 1e-10, convexity_gap, convexity_gap <= 1e-10);
  add("softmax gradient matches finite differences", 1e-6, grad_err, grad_err <= 1e-6);
  add("gradient Lipschitz ratio at most 1/2", 0.5 + 1e-6, sup_ratio, sup_ratio <= 0.5 + 1e-6);
  add("gradient descent monotone for eta <= 1/L", 0.0, monotone ? 0.0 : 1.0, monotone);
  add("t * (f(t) - f_best) bounded (O(1/t) signature)", 2.0, sublinear_ratio,
      sublinear_ratio <= 2.0);
  return report;
}

bool all_required_pass(const TheoryReport& report) {
  for (const auto& c : report.checks)
    if (!c.informational && !c.pass) return false;
  return true;
}

std::string to_json(const TheoryReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) {
    checks.push_back(nlohmann::json{{"claim", c.claim},
                                    {"bound", c.bound},
                                    {"observed", c.observed},
                                    {"pass", c.pass},
                                    {"informational", c.informational}});
  }
  nlohmann::json doc{{"schema", "ht-sentinel/v1"},
                     {"kind", "theory-report"},
                     {"seed", report.seed},
                     {"checks", std::move(checks)}};
  return doc.dump(2) + "\n";
}

}  // namespace htsentinel::theory
