#pragma once

#include <string>

#include "mckv/density.hpp"
#include "mckv/grid.hpp"
#include "mckv/particle.hpp"
#include "mckv/transform.hpp"

namespace mckv {

// GridDensity: CSV with header `x,pi,pi_prime` (pi_prime column empty when
// not populated) and a compact binary with magic bytes `MKVD1`
// (little-endian doubles).
void write_density_csv(const GridDensity& d, const std::string& path);
GridDensity read_density_csv(const std::string& path);
void write_density_binary(const GridDensity& d, const std::string& path);
GridDensity read_density_binary(const std::string& path);

// ParticleEnsemble: CSV `index,position`, binary `MKVE1`, and a JSON sidecar
// (path + ".json") carrying seed and simulation metadata.
void write_ensemble_csv(const ParticleEnsemble& e, const std::string& path);
ParticleEnsemble read_ensemble_csv(const std::string& path);
void write_ensemble_binary(const ParticleEnsemble& e, const std::string& path);
ParticleEnsemble read_ensemble_binary(const std::string& path);
void write_ensemble_sidecar(const ParticleEnsemble& e, const std::string& path);
void read_ensemble_sidecar(ParticleEnsemble& e, const std::string& path);

// LineTransform: `# a=<value>` comment line, then `y,re,im` rows.
void write_line_transform_csv(const LineTransform& t, const std::string& path);
LineTransform read_line_transform_csv(const std::string& path);

// Generic x,<name> two-column CSV for grid functions.
void write_grid_function_csv(const GridFunction& f, const std::string& path,
                             const std::string& value_header = "value");

// Estimation export: `y,pi_hat,pi_prime_hat,l_hat`.
void write_estimates_csv(const GridFunction& pi_hat, const GridFunction& pi_prime_hat,
                         const GridFunction& l_hat, const std::string& path);

}  // namespace mckv
