// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace thz {

/// Serial loops are the reference; parallel kernels must reproduce them
/// bit for bit (fixed-slot results merged in index order).
enum class ExecPolicy { Serial, Parallel };

/// Caps the OpenMP team size from PLAN_THREADS when set. Returns the
/// resulting maximum thread count.
int apply_thread_cap_from_env();

int max_threads();

}  // namespace thz
