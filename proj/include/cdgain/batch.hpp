#pragma once

#include "cdgain/config.hpp"

#include <vector>

namespace cdgain {

// Simulates subjects 0..subjects-1 on `jobs` threads. Records come back
// ordered by subject, then method order, then trial, whatever the thread
// count.
std::vector<TrialRecord> simulate_batch(const BatchConfig& cfg);

// One session of cfg.session.subject under cfg.session.method, seeded as
// simulate_session seeds that method.
MethodRun simulate_single(const BatchConfig& cfg);

} // namespace cdgain
