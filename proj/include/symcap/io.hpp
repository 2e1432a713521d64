#pragma once
#include "symcap/capacities.hpp"
#include "symcap/disk_maps.hpp"
#include "symcap/genfun.hpp"
#include "symcap/reeb.hpp"
#include "symcap/section.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace symcap::io {

/// Shortest round-trip decimal form; byte-stable across runs.
std::string fmt(double v);

void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const nlohmann::json& j);

/// action,period,rotation_number,cz,type,x1,y1,x2,y2
std::string orbits_csv(const std::vector<ReebOrbit>& orbits);
/// i,j,r,theta,ret_r,ret_theta,sigma,theta_lift
std::string section_csv(const SectionReturnData& d);

/// r,theta,R,Theta_lift rows, theta fastest.
std::string lift_csv(const PolarGrid& grid, const std::vector<double>& R, const std::vector<double>& Theta);
/// Grid recovered from the r/theta columns; throws InputError when they are not a polar grid.
StripMap read_lift_csv(const std::string& path);

/// "n_r,n_theta" header row, the sizes, then one line of values per r row.
std::string grid_csv(const PolarGrid& grid, const std::vector<double>& values);
GenFunW read_grid_csv(const std::string& path);

/// k,i,j,H with time nodes k.
std::string hamiltonian_csv(const PolarGrid& grid, int n_t, const std::vector<double>& H);

/// value,m,n for the ellipsoid spectrum
std::string spectrum_csv(const std::vector<double>& spectrum);

nlohmann::json to_json(const ConditionReport& c);
nlohmann::json to_json(const PipelineResult& r);

}  // namespace symcap::io
