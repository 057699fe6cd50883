#include "voxreg/nifti.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>

namespace voxreg {

namespace {

constexpr int kHeaderSize = 348;
constexpr int kVoxOffset = 352;

// Field offsets within the 348-byte NIfTI-1 header.
constexpr int kOffSizeofHdr = 0;
constexpr int kOffDim = 40;
constexpr int kOffDatatype = 70;
constexpr int kOffBitpix = 72;
constexpr int kOffPixdim = 76;
constexpr int kOffVoxOffset = 108;
constexpr int kOffSclSlope = 112;
constexpr int kOffSclInter = 116;
constexpr int kOffMagic = 344;

constexpr int kDtUint8 = 2;
constexpr int kDtInt16 = 4;
constexpr int kDtFloat32 = 16;

static_assert(std::endian::native == std::endian::little,
              "NIfTI writer assumes a little-endian host");

template <typename T>
T read_raw(const std::string& bytes, int offset, bool swap) {
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  if (swap) {
    char* p = reinterpret_cast<char*>(&v);
    std::reverse(p, p + sizeof(T));
  }
  return v;
}

template <typename T>
void write_raw(std::string& bytes, int offset, T v) {
  std::memcpy(bytes.data() + offset, &v, sizeof(T));
}

std::string build_header(const Dims& dims, const Spacing& spacing, short datatype, short bitpix) {
  std::string h(kVoxOffset, '\0');
  write_raw<std::int32_t>(h, kOffSizeofHdr, kHeaderSize);
  // dim[0] = 3; NIfTI x = toolkit axis 2.
  write_raw<std::int16_t>(h, kOffDim, 3);
  write_raw<std::int16_t>(h, kOffDim + 2, static_cast<std::int16_t>(dims[2]));
  write_raw<std::int16_t>(h, kOffDim + 4, static_cast<std::int16_t>(dims[1]));
  write_raw<std::int16_t>(h, kOffDim + 6, static_cast<std::int16_t>(dims[0]));
  for (int i = 4; i < 8; ++i) write_raw<std::int16_t>(h, kOffDim + 2 * i, 1);
  write_raw<std::int16_t>(h, kOffDatatype, datatype);
  write_raw<std::int16_t>(h, kOffBitpix, bitpix);
  write_raw<float>(h, kOffPixdim, 1.0f);
  write_raw<float>(h, kOffPixdim + 4, static_cast<float>(spacing[2]));
  write_raw<float>(h, kOffPixdim + 8, static_cast<float>(spacing[1]));
  write_raw<float>(h, kOffPixdim + 12, static_cast<float>(spacing[0]));
  write_raw<float>(h, kOffVoxOffset, static_cast<float>(kVoxOffset));
  write_raw<float>(h, kOffSclSlope, 1.0f);
  write_raw<float>(h, kOffSclInter, 0.0f);
  h[kOffMagic] = 'n';
  h[kOffMagic + 1] = '+';
  h[kOffMagic + 2] = '1';
  h[kOffMagic + 3] = '\0';
  return h;
}

}  // namespace

NiftiImage read_nifti(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < kHeaderSize) throw IoError("truncated header: " + path);

  const std::int32_t raw_sizeof = read_raw<std::int32_t>(bytes, kOffSizeofHdr, false);
  bool swap = false;
  if (raw_sizeof != kHeaderSize) {
    if (read_raw<std::int32_t>(bytes, kOffSizeofHdr, true) == kHeaderSize) {
      swap = true;
    } else {
      throw IoError("bad magic: not a NIfTI-1 file: " + path);
    }
  }

  const char m0 = bytes[kOffMagic], m1 = bytes[kOffMagic + 1];
  const char m2 = bytes[kOffMagic + 2], m3 = bytes[kOffMagic + 3];
  const bool magic_ok = (m0 == 'n' && (m1 == '+' || m1 == 'i') && m2 == '1' && m3 == '\0');
  if (!magic_ok) throw IoError("bad magic: not a NIfTI-1 file: " + path);

  const int ndim = read_raw<std::int16_t>(bytes, kOffDim, swap);
  if (ndim < 1 || ndim > 3) throw IoError("unsupported dimensionality (dim[0] = " + std::to_string(ndim) + "): " + path);

  NiftiImage img;
  int nifti_dims[3] = {1, 1, 1};
  for (int a = 0; a < 3; ++a) {
    if (a < ndim) {
      nifti_dims[a] = read_raw<std::int16_t>(bytes, kOffDim + 2 * (a + 1), swap);
      if (nifti_dims[a] < 1) throw IoError("non-positive dimension in header: " + path);
    }
  }
  img.dims = {nifti_dims[2], nifti_dims[1], nifti_dims[0]};

  for (int a = 0; a < 3; ++a) {
    const float pd = read_raw<float>(bytes, kOffPixdim + 4 * (a + 1), swap);
    img.spacing[2 - a] = pd > 0.0f ? pd : 1.0;
  }

  img.datatype = read_raw<std::int16_t>(bytes, kOffDatatype, swap);
  if (img.datatype != kDtUint8 && img.datatype != kDtInt16 && img.datatype != kDtFloat32) {
    throw IoError("unsupported datatype code " + std::to_string(img.datatype) + ": " + path);
  }
  const int elem_size = img.datatype == kDtUint8 ? 1 : (img.datatype == kDtInt16 ? 2 : 4);

  float slope = read_raw<float>(bytes, kOffSclSlope, swap);
  float inter = read_raw<float>(bytes, kOffSclInter, swap);
  if (slope == 0.0f) {
    slope = 1.0f;
    inter = 0.0f;
  }

  const float vox_offset_f = read_raw<float>(bytes, kOffVoxOffset, swap);
  const std::size_t offset = std::max<std::size_t>(static_cast<std::size_t>(vox_offset_f), kHeaderSize);

  const std::int64_t n = voxel_count(img.dims);
  if (bytes.size() < offset + static_cast<std::size_t>(n) * elem_size) {
    throw IoError("truncated payload: " + path);
  }

  img.data.resize(static_cast<std::size_t>(n));
  const char* payload = bytes.data() + offset;
  for (std::int64_t i = 0; i < n; ++i) {
    double v = 0.0;
    switch (img.datatype) {
      case kDtUint8:
        v = static_cast<unsigned char>(payload[i]);
        break;
      case kDtInt16: {
        std::int16_t s;
        std::memcpy(&s, payload + 2 * i, 2);
        if (swap) {
          char* p = reinterpret_cast<char*>(&s);
          std::swap(p[0], p[1]);
        }
        v = s;
        break;
      }
      case kDtFloat32: {
        float f;
        std::memcpy(&f, payload + 4 * i, 4);
        if (swap) {
          char* p = reinterpret_cast<char*>(&f);
          std::swap(p[0], p[3]);
          std::swap(p[1], p[2]);
        }
        v = f;
        break;
      }
    }
    img.data[i] = v * slope + inter;
  }
  return img;
}

Volume NiftiImage::to_volume() const {
  Volume v(dims, spacing);
  v.data = data;
  return v;
}

LabelMap NiftiImage::to_labels() const {
  if (datatype != kDtUint8 && datatype != kDtInt16) {
    throw IoError("label maps require an integer datatype (uint8 or int16)");
  }
  std::int32_t max_label = 0;
  for (double v : data) {
    const auto l = static_cast<std::int32_t>(std::llround(v));
    if (l < 0) throw IoError("negative label value in file");
    max_label = std::max(max_label, l);
  }
  LabelMap s(dims, max_label + 1);
  for (std::size_t i = 0; i < data.size(); ++i) {
    s.labels[i] = static_cast<std::int32_t>(std::llround(data[i]));
  }
  return s;
}

Volume read_nifti_volume(const std::string& path) { return read_nifti(path).to_volume(); }

LabelMap read_nifti_labels(const std::string& path) { return read_nifti(path).to_labels(); }

void write_nifti(const Volume& v, const std::string& path) {
  check_dims(v.dims);
  std::string out = build_header(v.dims, v.spacing, kDtFloat32, 32);
  out.reserve(out.size() + v.data.size() * 4);
  for (double d : v.data) {
    const float f = static_cast<float>(d);
    char buf[4];
    std::memcpy(buf, &f, 4);
    out.append(buf, 4);
  }
  write_file_atomic(path, out);
}

void write_nifti(const LabelMap& s, const std::string& path) {
  check_dims(s.dims);
  if (s.num_classes > 256) throw IoError("cannot write label map with more than 256 classes as uint8");
  std::string out = build_header(s.dims, {1.0, 1.0, 1.0}, kDtUint8, 8);
  out.reserve(out.size() + s.labels.size());
  for (std::int32_t l : s.labels) out.push_back(static_cast<char>(static_cast<unsigned char>(l)));
  write_file_atomic(path, out);
}

std::string field_component_path(const std::string& base, int component) {
  // Component 2 is the NIfTI x axis.
  static const char* suffix[3] = {".z", ".y", ".x"};
  std::filesystem::path p(base);
  if (p.extension() == ".nii") {
    return (p.parent_path() / (p.stem().string() + suffix[component] + ".nii")).string();
  }
  return base + suffix[component] + ".nii";
}

void write_nifti_field(const DisplacementField& f, const std::string& base) {
  const std::int64_t n = f.size();
  for (int c = 0; c < 3; ++c) {
    Volume comp(f.dims, {1.0, 1.0, 1.0});
    std::copy(f.vectors.begin() + c * n, f.vectors.begin() + (c + 1) * n, comp.data.begin());
    write_nifti(comp, field_component_path(base, c));
  }
}

DisplacementField read_nifti_field(const std::string& base) {
  DisplacementField f;
  for (int c = 0; c < 3; ++c) {
    Volume comp = read_nifti_volume(field_component_path(base, c));
    if (c == 0) {
      f = DisplacementField(comp.dims);
    } else {
      require_same_dims(f.dims, comp.dims, "read_nifti_field");
    }
    std::copy(comp.data.begin(), comp.data.end(), f.vectors.begin() + c * f.size());
  }
  return f;
}

}  // namespace voxreg
