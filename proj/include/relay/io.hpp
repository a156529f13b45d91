#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "relay/atlas.hpp"
#include "relay/event_sim.hpp"
#include "relay/sym4_map.hpp"
#include "relay/torus.hpp"

namespace relay {

inline constexpr int kSchemaVersion = 1;

/// Fixed 17-significant-digit rendering used for every real in CSV and JSON.
std::string format_real(double v);

/// JSON text with reals printed by format_real; non-finite reals become null.
std::string dump_json(const nlohmann::json& j);

nlohmann::json fixed_point_json(const FixedPoint& fp, const Spectrum* spectrum = nullptr);
nlohmann::json bifurcation_json(const BifurcationPoint& pt);
nlohmann::json orbit_json(const OrbitRecord& rec, const OrbitClass& cls);
nlohmann::json torus_json(const TorusSection& sec);
nlohmann::json error_json(std::string_view kind, std::string_view message);

/// Row of the shared atlas table.
struct AtlasRow {
  std::string kind;
  int nu = 0;
  double Q = 0.0;
  double Omega = 0.0;
  double Tstar = 0.0;
  double invP = 0.0;
  double xH = 0.0;
  int unstable_count = 0;
  std::string marker;
};

inline constexpr std::string_view kAtlasHeader = "kind,nu,Q,Omega,Tstar,invP,xH,unstable_count,marker";

void write_atlas_csv(std::ostream& os, const std::vector<AtlasRow>& rows);

AtlasRow atlas_row(const FixedPoint& fp, const Spectrum& spectrum, std::string kind, std::string marker = "");
AtlasRow atlas_row(const BifurcationPoint& pt);
std::vector<AtlasRow> atlas_rows(const RegionGrid& grid);
std::vector<AtlasRow> atlas_rows(const PeriodDiagram& pd);
std::vector<AtlasRow> atlas_rows(const ModeBranch& mb);

/// Dense samples as t,x,y.
void write_samples_csv(std::ostream& os, const OrbitRecord& rec);
/// Section points as Omega,tag,x,y.
void write_torus_csv(std::ostream& os, const std::vector<TorusSection>& sections);

}  // namespace relay
