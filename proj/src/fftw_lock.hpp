#pragma once

#include <mutex>

// FFTW's planner mutates global state; every fftw_plan_* call in the
// library goes through this lock. Executing existing plans is lock-free.

namespace pulseprop::detail {
std::mutex& fftw_planner_mutex();
}
