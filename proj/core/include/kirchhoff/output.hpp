#pragma once

#include <string>

#include "kirchhoff/experiments.hpp"
#include "kirchhoff/integrator.hpp"

namespace kirchhoff {

/// Shortest round-trip decimal representation (std::to_chars).
std::string format_double(double x);

/// CSV with header t,s,s_prime,s_second,E,F,I,H1,S,V,residual; one row per
/// sample, the I column empty for non-pokhozhaev families, residual =
/// F - F(0) + S/4. Identical bytes for identical trajectories. Empty
/// trajectory -> header only. Throws IoError.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
std::string trajectory_csv(const Trajectory& traj);

/// CSV table of per-epsilon sweep records.
void write_sweep_csv(const std::string& path, const SweepReport& report);
std::string sweep_csv(const SweepReport& report);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace kirchhoff
