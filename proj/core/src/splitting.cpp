#include "demux/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "demux/errors.hpp"
#include "demux/routing.hpp"
#include "least_squares.hpp"

namespace demux {
namespace {

struct PeakArea {
  std::uint32_t a = 0;  // a < b
  std::uint32_t b = 0;
  std::size_t residue = 0;
  double delays = 0.0;  // number of delay bins summed
  double counts = 0.0;
};

double initial_ratio(const std::string& state) {
  if (state == kStateOn) return 0.9;
  if (state == kStateOff) return 0.1;
  return 0.5;
}

// Path-product routing of every bin for a parameter vector.
class RoutingModel {
 public:
  RoutingModel(const DemuxNetwork& network, const SwitchSchedule& schedule,
               const std::map<std::pair<CouplerId, std::string>, std::size_t>& index)
      : network_(network), period_(schedule.period()) {
    param_of_.resize(period_);
    for (std::size_t k = 0; k < period_; ++k) {
      for (const auto& node : network.nodes()) {
        param_of_[k].push_back(index.at({node.id, schedule.bins[k].at(node.id)}));
      }
    }
  }

  // rows[bin][output - 1]
  void evaluate(const Eigen::VectorXd& x, std::vector<std::vector<double>>& rows) const {
    rows.assign(period_, std::vector<double>(network_.output_count()));
    for (std::size_t k = 0; k < period_; ++k) {
      for (std::size_t o = 1; o <= network_.output_count(); ++o) {
        double p = 1.0;
        for (const auto& step : network_.path_to(o)) {
          const double r = x(static_cast<Eigen::Index>(param_of_[k][step.node]));
          p *= step.branch == 0 ? r : 1.0 - r;
        }
        rows[k][o - 1] = p;
      }
    }
  }

 private:
  const DemuxNetwork& network_;
  std::size_t period_;
  std::vector<std::vector<std::size_t>> param_of_;  // [bin][node]
};

}  // namespace

const RatioEstimate& SplittingEstimate::at(const CouplerId& id, std::string_view state) const {
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    if (parameters[i].first == id && parameters[i].second == state) return ratios[i];
  }
  throw DomainError("no estimate for coupler '" + id + "' state '" + std::string(state) + "'");
}

CouplerTable SplittingEstimate::as_table() const {
  CouplerTable table;
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    table.set(parameters[i].first, parameters[i].second,
              {ratios[i].value, ratios[i].sigma});
  }
  return table;
}

SplittingEstimate estimate_splitting_ratios(std::span<const CoincidenceHistogram> histograms,
                                            const DemuxNetwork& network,
                                            const SwitchSchedule& schedule) {
  schedule.validate(network);
  const std::size_t period = schedule.period();
  const std::size_t outputs = network.output_count();
  if (outputs < 2) throw EstimationError("a single-output network has no splitting ratios");

  // Canonical orientation a < b.
  std::map<std::pair<std::uint32_t, std::uint32_t>, CoincidenceHistogram> by_pair;
  for (const auto& h : histograms) {
    if (h.a == h.b || h.a < 1 || h.b < 1 || h.a > outputs || h.b > outputs) {
      throw EstimationError("histogram for invalid channel pair (" + std::to_string(h.a) +
                            "," + std::to_string(h.b) + ")");
    }
    const auto canon = h.a < h.b ? h : h.reversed();
    if (!by_pair.emplace(std::pair{canon.a, canon.b}, canon).second) {
      throw EstimationError("duplicate histogram for pair (" + std::to_string(canon.a) + "," +
                            std::to_string(canon.b) + ")");
    }
  }
  std::vector<std::string> missing;
  for (std::uint32_t b = 2; b <= outputs; ++b) {
    if (!by_pair.contains({1u, b})) missing.push_back("(1," + std::to_string(b) + ")");
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw EstimationError("splitting-ratio estimate needs histograms for pairs " + list);
  }

  std::vector<PeakArea> peaks;
  double total = 0.0;
  for (const auto& [pair, h] : by_pair) {
    if (h.max_delay_bins < static_cast<int>(period)) {
      throw EstimationError("histogram delay range must cover one schedule period");
    }
    std::vector<PeakArea> areas(period);
    for (std::size_t r = 0; r < period; ++r) areas[r] = {pair.first, pair.second, r, 0.0, 0.0};
    for (int d = -h.max_delay_bins; d <= h.max_delay_bins; ++d) {
      if (d == 0) continue;  // source multi-photon events, not routing
      const auto p = static_cast<long long>(period);
      const auto r = static_cast<std::size_t>(((d % p) + p) % p);
      areas[r].delays += 1.0;
      areas[r].counts += static_cast<double>(h.at(d));
    }
    for (const auto& a : areas) {
      total += a.counts;
      peaks.push_back(a);
    }
  }
  if (total == 0.0) throw EstimationError("histograms contain no coincidences");

  // Parameters: every (coupler, state) the schedule uses, then the scale.
  std::map<std::pair<CouplerId, std::string>, std::size_t> index;
  SplittingEstimate est;
  for (const auto& node : network.nodes()) {
    std::set<std::string> states;
    for (const auto& bin : schedule.bins) states.insert(bin.at(node.id));
    for (const auto& s : states) {
      index[{node.id, s}] = est.parameters.size();
      est.parameters.emplace_back(node.id, s);
    }
  }
  const auto n_ratio = static_cast<Eigen::Index>(est.parameters.size());
  const RoutingModel routing(network, schedule, index);

  std::vector<double> sigma(peaks.size());
  for (std::size_t i = 0; i < peaks.size(); ++i) sigma[i] = std::sqrt(std::max(peaks[i].counts, 1.0));

  // Routing overlap of each peak for unit scale.
  const auto overlaps = [&](const Eigen::VectorXd& x, std::vector<double>& f) {
    std::vector<std::vector<double>> m;
    routing.evaluate(x, m);
    f.resize(peaks.size());
    for (std::size_t i = 0; i < peaks.size(); ++i) {
      const auto& pk = peaks[i];
      double sum = 0.0;
      for (std::size_t phase = 0; phase < period; ++phase) {
        sum += m[phase][pk.a - 1] * m[(phase + pk.residue) % period][pk.b - 1];
      }
      f[i] = pk.delays * sum;
    }
  };

  detail::LsqProblem problem;
  problem.residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    std::vector<double> f;
    overlaps(x, f);
    const double scale = x(n_ratio);
    r.resize(static_cast<Eigen::Index>(peaks.size()));
    for (std::size_t i = 0; i < peaks.size(); ++i) {
      r(static_cast<Eigen::Index>(i)) = (peaks[i].counts - scale * f[i]) / sigma[i];
    }
  };
  problem.lower = Eigen::VectorXd::Zero(n_ratio + 1);
  problem.upper = Eigen::VectorXd::Ones(n_ratio + 1);
  problem.upper(n_ratio) = std::numeric_limits<double>::infinity();
  problem.jacobian = [&](const Eigen::VectorXd& x, Eigen::MatrixXd& j) {
    j = detail::numeric_jacobian(problem.residual, x, problem.lower, problem.upper);
  };

  Eigen::VectorXd start(n_ratio + 1);
  for (Eigen::Index i = 0; i < n_ratio; ++i) {
    start(i) = initial_ratio(est.parameters[static_cast<std::size_t>(i)].second);
  }
  {
    start(n_ratio) = 1.0;
    std::vector<double> f;
    overlaps(start, f);
    double model = 0.0;
    for (const double v : f) model += v;
    start(n_ratio) = total / std::max(model, 1e-300);
  }

  const auto outcome = detail::solve_damped_least_squares(problem, start, {200, 1e-10});
  if (outcome.singular) {
    std::ostringstream why;
    why << "splitting ratios are not identifiable from the given histograms (";
    for (const auto& [pair, h] : by_pair) why << '(' << pair.first << ',' << pair.second << ')';
    why << "); add channel pairs or longer acquisitions";
    throw EstimationError(why.str());
  }
  if (!outcome.converged) {
    throw NumericalError("splitting-ratio fit did not converge in " +
                         std::to_string(outcome.iterations) + " iterations");
  }

  est.ratios.resize(est.parameters.size());
  est.covariance.assign(est.parameters.size(), std::vector<double>(est.parameters.size()));
  for (Eigen::Index i = 0; i < n_ratio; ++i) {
    est.ratios[i] = {outcome.x(i), std::sqrt(outcome.covariance(i, i))};
    for (Eigen::Index k = 0; k < n_ratio; ++k) est.covariance[i][k] = outcome.covariance(i, k);
  }
  est.scale = outcome.x(n_ratio);
  est.chi_squared = outcome.chi_squared;
  est.degrees_of_freedom = static_cast<int>(peaks.size()) - static_cast<int>(n_ratio) - 1;
  est.iterations = outcome.iterations;
  return est;
}

RatioEstimate switching_efficiency_estimate(const DemuxNetwork& network,
                                            const SwitchSchedule& schedule,
                                            const SplittingEstimate& estimate) {
  const std::size_t n = estimate.parameters.size();
  const auto efficiency = [&](const std::vector<double>& values) {
    CouplerTable table;
    for (std::size_t i = 0; i < n; ++i) {
      table.set(estimate.parameters[i].first, estimate.parameters[i].second,
                {std::clamp(values[i], 0.0, 1.0), 0.0});
    }
    return switching_efficiency(network, schedule, table);
  };
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = estimate.ratios[i].value;
  const double eta = efficiency(values);

  // The efficiency is multilinear in the ratios, so a unit secant is exact
  // along each axis.
  std::vector<double> grad(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto up = values;
    auto down = values;
    up[i] = 1.0;
    down[i] = 0.0;
    grad[i] = efficiency(up) - efficiency(down);
  }
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) var += grad[i] * estimate.covariance[i][k] * grad[k];
  }
  return {eta, std::sqrt(std::max(var, 0.0))};
}

}  // namespace demux
