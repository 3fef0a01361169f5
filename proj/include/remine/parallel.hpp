// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

namespace remine {

/// Caps worker parallelism for the OpenMP kernels. 0 means "one worker per
/// available hardware thread".
void set_worker_threads(int n);

/// Resolved worker count, always >= 1.
int worker_threads();

int hardware_threads();

}  // namespace remine
