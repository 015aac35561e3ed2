#pragma once

#include <Eigen/Core>

#include <functional>

namespace svs {

/// Worker count used by row-parallel kernels. Results never depend on this value.
void set_num_threads(int n);
int num_threads();

/// Calls fn(row) for every row in [0, rows). Rows are split into contiguous chunks,
/// one per worker; each row is computed by exactly one worker.
void parallel_rows(Eigen::Index rows, const std::function<void(Eigen::Index)>& fn);

}  // namespace svs
