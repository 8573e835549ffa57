// SPDX-License-Identifier: Apache-2.0
#ifndef SCATTER_RUNCONFIG_HPP
#define SCATTER_RUNCONFIG_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "scatter/analytic.hpp"
#include "scatter/assembly.hpp"
#include "scatter/meshes.hpp"
#include "scatter/problem.hpp"

namespace scatter::cli {

/// Flat key=value configuration with [section] headers. Keys are looked up
/// as "section.key"; "#" and ";" start comments.
class IniFile {
public:
  static IniFile parse(std::istream& is);
  static IniFile load(const std::string& path);

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double dflt) const;
  int get_int_or(const std::string& key, int dflt) const;
  std::vector<double> get_list(const std::string& key) const;

private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

struct RunConfig {
  // [problem]
  BoundaryKind kind = BoundaryKind::SHBC;
  // [geometry]  (r_a has no default: each study sets it explicitly)
  double R0 = 1.0;
  double R1 = 0.0;
  double r_a = 0.0;
  double upsilon = 0.0;
  Vec3 source = Vec3(0, 0, 0);  // manufactured source point
  // [material]
  analytic::MaterialParams mat = analytic::ihlenburg_material();
  // [discretization]
  int degree = 2;
  int level = 1;
  meshes::Family family = meshes::Family::IgaMax;
  meshes::Schedule schedule = meshes::Schedule::Uniform;
  int quad_pts = 0;  // 0: degree + 1 per direction
  // [ie]
  assembly::IeFormulation formulation = assembly::IeFormulation::BGU;
  int N = 4;
  assembly::RadialBasis basis = assembly::RadialBasis::Lagrange;
  // [wave]
  std::vector<double> k_list = {1.0};
  double P_inc = 1.0;
  double alpha_s_deg = 180.0;
  double beta_s_deg = 0.0;
  // [series]
  analytic::SeriesControl series;
  // [farfield]
  double alpha_start_deg = 0.0;
  double alpha_end_deg = 360.0;
  int n_angles = 181;
  // [output]
  std::string output_path;
  // [check]  (0 disables the corresponding tolerance check)
  double check_ts_db = 0.0;
  double check_energy = 0.0;
  double check_farfield = 0.0;
  bool check_monotone = false;

  ScatterProblem problem(double k) const;
  Vec3 incidence() const;

  static RunConfig from_ini(const IniFile& ini);
  static RunConfig from_file(const std::string& path);
};

}  // namespace scatter::cli

#endif
