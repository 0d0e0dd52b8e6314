// Desk-scale reproductions of the benchmark studies, emitting CSV/JSON
// artifacts into the configured output directory.
#pragma once

#include "ncbem/config.hpp"

namespace ncbem {

// Runs config.study; returns 0 on success, 2 if any linear solve failed to
// converge (artifacts are still written).
int run_study(const StudyConfig& config);

// Structured-cube sizing helpers shared with the benchmark drivers.
int cube_vertex_count(int n);
int cube_resolution(double wavelength, double elements_per_wavelength, int max_nodes);

}  // namespace ncbem
