// Flat key=value study configuration with bundled presets.
#pragma once

#include <string>
#include <vector>

#include "ncbem/formulations.hpp"

namespace ncbem {

struct StudyConfig {
  std::string study;  // projection-error | convergence | efficiency | screen | foam
  // physical parameters
  double frequency = 1.0;
  double c_ext = 1.0, c_int = 1.0;
  double rho_ext = 1.0, rho_int = 1.0;
  double alpha_int = 0.0;
  double f_alpha = 1.0;
  // resolution targets
  double elements_per_wavelength = 6.0;
  int n_ext = 0;         // explicit structured resolution; 0 = derive from epw
  int n_int = 0;
  int max_n_ext = 4000;  // dense-matrix cap for cube studies
  int refine_levels = 3;
  int grid_n = 60;
  // projection-error study
  int square_n = 20;
  // screen study
  int screen_n_fine = 48;
  int screen_n_coarse = 0;  // 0 = derive from 2 elements per wavelength
  // foam study
  int foam_nx = 2, foam_ny = 2;
  int foam_refine_ext = 2, foam_refine_int = 1;
  double source_height = 0.15;
  // run control
  std::vector<FormulationKind> formulations{FormulationKind::pmchwt_ext};
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int threads = 0;
};

// Parses `key = value` lines ('#' comments). Unknown keys and non-positive
// physical values are rejected. Values override the given base config.
StudyConfig parse_config_file(const std::string& path, StudyConfig base = {});
void apply_config_line(StudyConfig& config, const std::string& line);

// Bundled presets: unit-square, standard, high-frequency, high-contrast,
// cube-convergence, screen, foam.
StudyConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace ncbem
