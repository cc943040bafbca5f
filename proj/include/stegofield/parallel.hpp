#pragma once

namespace stegofield::parallel {

/// Worker threads used by the OpenMP kernels. Read once from
/// STEGOFIELD_THREADS (0 or 1 = serial); unset means the OpenMP default.
int worker_count();

/// Overrides the environment for the rest of the process; n <= 1 is serial.
void set_worker_count(int n);

}  // namespace stegofield::parallel
