#pragma once

#include <string>
#include <variant>

#include "fakeres/grid.hpp"

namespace fakeres {

// On-disk element types (NIfTI-1 datatype codes 2, 4, 16, 64).
enum class ElementType { u8, i16, f32, f64 };

enum class VolumeIntent { image, labels };

// The format-independent description every reader fills and every writer
// consumes. Spacing and domain follow the node-centered convention: extent
// per axis = (shape-1) * spacing.
struct VolumeFileHeader {
    index3 shape{0, 0, 0};
    vec3 spacing{1.0, 1.0, 1.0};
    vec3 domain_lower{0.0, 0.0, 0.0};
    ElementType dtype = ElementType::f64;
    VolumeIntent intent = VolumeIntent::image;
};

const char* element_type_name(ElementType t);
ElementType element_type_by_name(const std::string& name);

// Reads a single-file NIfTI-1 volume (.nii or .nii.gz, detected by content).
// Returns a SegmentationMask when the header declares label intent (code
// 1002), a VolumeGrid otherwise. Handles either endianness (detected via
// sizeof_hdr), applies scl_slope/scl_inter to image data when nontrivial
// (with a notice on stderr), and assumes axis-aligned orientation, warning on
// stderr when the header says otherwise. Throws format_error with byte-offset
// context on malformed headers, io_error on filesystem failures.
std::variant<VolumeGrid, SegmentationMask> read_nifti(const std::string& path);

// read_nifti, requiring the image (resp. labels) variant; input_error when
// the file holds the other kind.
VolumeGrid read_volume_nifti(const std::string& path);
SegmentationMask read_mask_nifti(const std::string& path);

// Writes a single-file NIfTI-1 volume; a ".gz" suffix selects gzip output.
// Integer element types require exactly integral in-range samples and f32
// requires magnitudes within float range (range_error otherwise, nothing
// written). Masks must use an integer element type (parameter_error) and are
// tagged with label intent.
void write_nifti(const VolumeGrid& volume, const std::string& path,
                 ElementType dtype = ElementType::f32);
void write_nifti(const SegmentationMask& mask, const std::string& path,
                 ElementType dtype = ElementType::u8);

// Internal diff-friendly format: base.raw holds little-endian f64 (volumes)
// or i32 (masks), base.json the VolumeFileHeader fields (+ label_count for
// masks).
void write_raw(const VolumeGrid& volume, const std::string& base_path);
void write_raw(const SegmentationMask& mask, const std::string& base_path);
std::variant<VolumeGrid, SegmentationMask> read_raw(const std::string& base_path);

// NIfTI-1 stores spacing and origin in 32-bit fields, so two files describing
// the same physical grid generally reconstruct slightly different GridSpecs
// (unless every quantity is exactly representable). grids_equivalent treats
// specs as one grid when shapes match and, per axis, spacings agree within
// tol * spacing and origins within tol * max(|origin|, spacing). The default
// tol leaves two decades of margin over float32 rounding while staying far
// below any real geometric offset (half a cell is >= 0.5 * spacing).
bool grids_equivalent(const GridSpec& a, const GridSpec& b, double tol = 1e-5);

// Returns the mask carried over to `spec` verbatim (labels and label count
// untouched) when grids_equivalent says the two specs describe the same grid;
// throws input_error otherwise. Reconciles a stored segmentation with a grid
// built in full precision, after file rounding has made exact equality fail.
SegmentationMask align_mask_to(const SegmentationMask& mask, const GridSpec& spec,
                               double tol = 1e-5);

} // namespace fakeres
