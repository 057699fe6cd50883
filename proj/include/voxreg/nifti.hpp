// Minimal uncompressed NIfTI-1 reader/writer.
//
// Supported subset: single-file .nii, datatypes uint8 (2), int16 (4) and
// float32 (16), little- or big-endian headers (detected via sizeof_hdr),
// scl_slope/scl_inter scaling, pixdim spacing. Writer emits float32 for
// volumes and field components, uint8 for label maps, magic "n+1",
// vox_offset 352, scl_slope 1 / scl_inter 0.
//
// Axis mapping: NIfTI's fastest-varying x axis corresponds to toolkit axis 2,
// so dim[1..3] = dims[2], dims[1], dims[0] and the raw payload matches the
// toolkit memory layout byte for byte. Displacement fields are stored as
// three scalar files suffixed .x/.y/.z, named after the NIfTI axis the
// component displaces along (component 2 -> .x, 1 -> .y, 0 -> .z).
#pragma once

#include <string>

#include "voxreg/io_util.hpp"
#include "voxreg/types.hpp"

namespace voxreg {

struct NiftiImage {
  Dims dims{0, 0, 0};
  Spacing spacing{1.0, 1.0, 1.0};
  int datatype = 0;  // NIfTI datatype code of the file
  std::vector<double> data;

  Volume to_volume() const;
  LabelMap to_labels() const;  // requires an integer datatype
};

NiftiImage read_nifti(const std::string& path);
Volume read_nifti_volume(const std::string& path);
LabelMap read_nifti_labels(const std::string& path);

void write_nifti(const Volume& v, const std::string& path);
void write_nifti(const LabelMap& s, const std::string& path);

// Componentwise field storage as three scalar volumes.
std::string field_component_path(const std::string& base, int component);
void write_nifti_field(const DisplacementField& f, const std::string& base);
DisplacementField read_nifti_field(const std::string& base);

}  // namespace voxreg
