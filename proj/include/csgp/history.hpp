#ifndef CSGP_HISTORY_HPP_
#define CSGP_HISTORY_HPP_

#include <vector>

#include <Eigen/Dense>

#include "csgp/errors.hpp"

namespace csgp {

// An evaluation point: action in [0, 1] paired with a context vector.
struct ActionContext {
  double a = 0.0;
  Eigen::VectorXd x;
};

// Append-only record of (context, action, reward) triples plus the known
// observation noise variance. Round index equals arrival order.
struct BanditHistory {
  struct Round {
    Eigen::VectorXd context;
    double action = 0.0;
    double reward = 0.0;
  };

  std::vector<Round> rounds;
  double noise_var = 0.1;

  void append(const Eigen::VectorXd& context, double action, double reward) {
    if (!(action >= 0.0 && action <= 1.0)) {
      throw DomainError("BanditHistory: action outside [0, 1]");
    }
    if (!rounds.empty() &&
        context.size() != rounds.front().context.size()) {
      throw DimensionError("BanditHistory: context dimension changed");
    }
    rounds.push_back(Round{context, action, reward});
  }

  std::size_t size() const { return rounds.size(); }
  bool empty() const { return rounds.empty(); }

  Eigen::VectorXd rewards() const {
    Eigen::VectorXd y(static_cast<Eigen::Index>(rounds.size()));
    for (std::size_t i = 0; i < rounds.size(); ++i) {
      y[static_cast<Eigen::Index>(i)] = rounds[i].reward;
    }
    return y;
  }

  std::vector<ActionContext> points() const {
    std::vector<ActionContext> pts;
    pts.reserve(rounds.size());
    for (const auto& r : rounds) pts.push_back({r.action, r.context});
    return pts;
  }
};

}  // namespace csgp

#endif  // CSGP_HISTORY_HPP_
