#pragma once

#include <map>
#include <vector>

#include "slas/model.hpp"
#include "slas/params.hpp"
#include "slas/predictor.hpp"
#include "slas/vehicle.hpp"

// Brute-force optimum of one SLAS instance: enumerate every adjacency-valid
// lane path, resolve each ahead/behind disjunction combinatorially, and solve
// the per-path convex speed QP with the interior-point oracle. Shares only
// the model *data* (margins, deviation projection, predictions) with the
// production builder; the solve path is fully independent.
namespace oracle {

struct EnumOutcome {
  bool feasible = false;
  double objective = 0;
  std::vector<int> best_lanes;
  long paths_evaluated = 0;
  long qps_solved = 0;
};

EnumOutcome enumerate_optimum(const slas::WorldSnapshot& snap,
                              const std::map<int, slas::PredictedTrajectory>& preds,
                              const slas::PlannerParams& params,
                              slas::Formulation formulation);

}  // namespace oracle
