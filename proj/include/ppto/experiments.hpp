#pragma once

// Parameter sweeps behind the throughput figures:
//   fig2  T versus beta (m = smallest feasible cap per point)
//   fig3  T versus 1 + m (beta = beta*(m))
//   fig4  optimal T versus lambda, uncapped m
//   fig5  optimal T versus lambda, m capped
//   fig6  m* versus lambda

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ppto/analytic.hpp"
#include "ppto/montecarlo.hpp"
#include "ppto/optimize.hpp"

namespace ppto {

enum class SweepVariable { beta, m, lambda };
enum class Spacing { linear, log };

/// Strictly increasing list of sweep points.
struct Grid {
    std::vector<double> values;

    static Grid explicit_values(std::vector<double> values);
    static Grid range(double min, double max, std::size_t count, Spacing spacing);
    void validate() const;
};

/// How fig2 picks the retransmission cap at each beta.
enum class CapPolicy { smallest_feasible, fixed };

struct SweepSpec {
    SweepVariable variable = SweepVariable::beta;
    Grid grid;
    ChannelParams fixed_params;       // lambda is overridden by the series for beta and m sweeps
    std::vector<double> lambdas;      // one series per lambda (beta and m sweeps)
    std::vector<double> epsilons;     // beta and m sweeps use epsilons.front()
    std::optional<int> m_cap;
    CapPolicy cap_policy = CapPolicy::smallest_feasible;
    int fixed_m = 0;
    bool approximate_attempts = false;  // also emit the approximate attempt-count chain (fig2)
    SearchConfig search;
    bool mc_overlay = false;
    SimConfig sim;
    std::size_t mc_stride = 1;  // simulate every mc_stride-th grid point

    void validate() const;
};

struct Series {
    std::string label;
    std::vector<double> y;   // NaN marks a missing or infeasible point
    std::vector<double> se;  // empty when the series has no error bars
    bool plotted = true;     // auxiliary columns (chosen m, feasibility) go to CSV only
};

struct FigureDataset {
    std::string figure_id;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    std::vector<double> x;
    std::vector<Series> series;
    std::vector<std::pair<std::string, std::string>> metadata;

    const Series* find(const std::string& label) const;
};

/// Default sweep of each figure with the grids used for the reproduction run.
SweepSpec default_spec(const std::string& figure_id);

FigureDataset sweep_beta(const SweepSpec& spec);
FigureDataset sweep_m(const SweepSpec& spec);
/// fig4 when spec.m_cap is empty, fig5 otherwise.
FigureDataset sweep_lambda_optimal(const SweepSpec& spec);
FigureDataset sweep_lambda_mstar(const SweepSpec& spec);

/// Runs the sweep named by figure_id (fig2..fig6).
FigureDataset run_figure(const std::string& figure_id, const SweepSpec& spec);

/// Rebuilds the figure id and spec recorded in a dataset's metadata.
std::pair<std::string, SweepSpec> spec_from_metadata(const std::vector<std::pair<std::string, std::string>>& metadata);

/// Smallest m in [0, m_hi] with p_out^(1+m) <= eps, if any.
std::optional<int> smallest_feasible_cap(double p_out, double epsilon, int m_hi);

}  // namespace ppto
