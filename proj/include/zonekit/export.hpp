#pragma once

#include <span>
#include <string>

#include <json.hpp>

#include "zonekit/core.hpp"
#include "zonekit/freqmap.hpp"
#include "zonekit/geometry.hpp"
#include "zonekit/geostat.hpp"
#include "zonekit/gwr.hpp"
#include "zonekit/lisa.hpp"
#include "zonekit/synth.hpp"

namespace zonekit::io {

/// Writes text to path; IoError on failure.
void write_text(const std::string& path, const std::string& text);

/// cell,value[,variance] for every non-missing cell, ascending cell index.
void write_surface_csv(const std::string& path, const Surface& surface, const Surface* variance = nullptr);

/// FeatureCollection of cell-center points with cell and value properties.
void write_surface_geojson(const std::string& path, const Surface& surface, const geometry::BaseGrid& grid);

nlohmann::json variogram_json(const geostat::EmpiricalVariogram& emp, const geostat::VariogramFit& fit);
void write_json(const std::string& path, const nlohmann::json& j);

/// cell,local_I,p,quadrant,MC
void write_lisa_csv(const std::string& path, const lisa::LisaResult& result);

/// cell,YF,class,partial over covered cells. YF frequency maps are also read
/// back from this format (years from the P column).
void write_frequency_csv(const std::string& path, const freq::FrequencyMap& fm);
freq::FrequencyMap read_frequency_csv(const std::string& path, const geometry::BaseGrid& grid);

/// bin_low,bin_high,count,mean_YF,YF_-P..YF_+P
void write_report_csv(const std::string& path, const freq::AttributeReport& report);

/// cell,beta0,beta_<name>..., beta0_std,beta_<name>_std..., fitted,local_R2,zone
void write_gwr_csv(const std::string& path, const gwr::GwrResult& result);
nlohmann::json gwr_summary(const gwr::GwrResult& result);

/// cell,class,zone
void write_truth_csv(const std::string& path, const synth::SynthField& field);
/// Reads a truth CSV back into per-cell classes (background cells absent
/// from the file are unstable).
std::vector<freq::Stability> read_truth_csv(const std::string& path, const geometry::BaseGrid& grid);

nlohmann::json recovery_json(const synth::RecoveryScore& score);

}  // namespace zonekit::io
