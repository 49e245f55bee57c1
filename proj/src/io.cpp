#include "fakeres/io.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstddef>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <vector>

#include <zlib.h>

#include <json.hpp>

#include "fakeres/errors.hpp"

namespace fakeres {

namespace {

// Classic 348-byte NIfTI-1 header. The layout below is naturally aligned;
// the static_asserts pin the standard byte offsets.
struct NiftiHeader {
    std::int32_t sizeof_hdr;
    char data_type[10];
    char db_name[18];
    std::int32_t extents;
    std::int16_t session_error;
    char regular;
    char dim_info;
    std::int16_t dim[8];
    float intent_p1;
    float intent_p2;
    float intent_p3;
    std::int16_t intent_code;
    std::int16_t datatype;
    std::int16_t bitpix;
    std::int16_t slice_start;
    float pixdim[8];
    float vox_offset;
    float scl_slope;
    float scl_inter;
    std::int16_t slice_end;
    char slice_code;
    char xyzt_units;
    float cal_max;
    float cal_min;
    float slice_duration;
    float toffset;
    std::int32_t glmax;
    std::int32_t glmin;
    char descrip[80];
    char aux_file[24];
    std::int16_t qform_code;
    std::int16_t sform_code;
    float quatern_b;
    float quatern_c;
    float quatern_d;
    float qoffset_x;
    float qoffset_y;
    float qoffset_z;
    float srow_x[4];
    float srow_y[4];
    float srow_z[4];
    char intent_name[16];
    char magic[4];
};

static_assert(sizeof(NiftiHeader) == 348);
static_assert(offsetof(NiftiHeader, dim) == 40);
static_assert(offsetof(NiftiHeader, intent_code) == 68);
static_assert(offsetof(NiftiHeader, datatype) == 70);
static_assert(offsetof(NiftiHeader, bitpix) == 72);
static_assert(offsetof(NiftiHeader, pixdim) == 76);
static_assert(offsetof(NiftiHeader, vox_offset) == 108);
static_assert(offsetof(NiftiHeader, scl_slope) == 112);
static_assert(offsetof(NiftiHeader, scl_inter) == 116);
static_assert(offsetof(NiftiHeader, qform_code) == 252);
static_assert(offsetof(NiftiHeader, sform_code) == 254);
static_assert(offsetof(NiftiHeader, quatern_b) == 256);
static_assert(offsetof(NiftiHeader, qoffset_x) == 268);
static_assert(offsetof(NiftiHeader, srow_x) == 280);
static_assert(offsetof(NiftiHeader, magic) == 344);

constexpr std::int16_t kIntentLabel = 1002;
constexpr std::int32_t kVoxOffset = 352;

template <typename T>
T byte_swapped(T v) {
    unsigned char* p = reinterpret_cast<unsigned char*>(&v);
    std::reverse(p, p + sizeof(T));
    return v;
}

void swap_header(NiftiHeader& h) {
    h.sizeof_hdr = byte_swapped(h.sizeof_hdr);
    h.extents = byte_swapped(h.extents);
    h.session_error = byte_swapped(h.session_error);
    for (std::int16_t& v : h.dim)
        v = byte_swapped(v);
    h.intent_p1 = byte_swapped(h.intent_p1);
    h.intent_p2 = byte_swapped(h.intent_p2);
    h.intent_p3 = byte_swapped(h.intent_p3);
    h.intent_code = byte_swapped(h.intent_code);
    h.datatype = byte_swapped(h.datatype);
    h.bitpix = byte_swapped(h.bitpix);
    h.slice_start = byte_swapped(h.slice_start);
    for (float& v : h.pixdim)
        v = byte_swapped(v);
    h.vox_offset = byte_swapped(h.vox_offset);
    h.scl_slope = byte_swapped(h.scl_slope);
    h.scl_inter = byte_swapped(h.scl_inter);
    h.slice_end = byte_swapped(h.slice_end);
    h.cal_max = byte_swapped(h.cal_max);
    h.cal_min = byte_swapped(h.cal_min);
    h.slice_duration = byte_swapped(h.slice_duration);
    h.toffset = byte_swapped(h.toffset);
    h.glmax = byte_swapped(h.glmax);
    h.glmin = byte_swapped(h.glmin);
    h.qform_code = byte_swapped(h.qform_code);
    h.sform_code = byte_swapped(h.sform_code);
    h.quatern_b = byte_swapped(h.quatern_b);
    h.quatern_c = byte_swapped(h.quatern_c);
    h.quatern_d = byte_swapped(h.quatern_d);
    h.qoffset_x = byte_swapped(h.qoffset_x);
    h.qoffset_y = byte_swapped(h.qoffset_y);
    h.qoffset_z = byte_swapped(h.qoffset_z);
    for (float& v : h.srow_x)
        v = byte_swapped(v);
    for (float& v : h.srow_y)
        v = byte_swapped(v);
    for (float& v : h.srow_z)
        v = byte_swapped(v);
}

int element_size(ElementType t) {
    switch (t) {
    case ElementType::u8:
        return 1;
    case ElementType::i16:
        return 2;
    case ElementType::f32:
        return 4;
    case ElementType::f64:
        return 8;
    }
    return 0;
}

std::int16_t nifti_code(ElementType t) {
    switch (t) {
    case ElementType::u8:
        return 2;
    case ElementType::i16:
        return 4;
    case ElementType::f32:
        return 16;
    case ElementType::f64:
        return 64;
    }
    return 0;
}

ElementType element_from_code(std::int16_t code, const std::string& path) {
    switch (code) {
    case 2:
        return ElementType::u8;
    case 4:
        return ElementType::i16;
    case 16:
        return ElementType::f32;
    case 64:
        return ElementType::f64;
    default:
        throw format_error(path + ": unsupported datatype code " + std::to_string(code) +
                           " at byte offset 70");
    }
}

class GzFile {
public:
    GzFile(const std::string& path, const char* mode) : path_(path) {
        file_ = gzopen(path.c_str(), mode);
        if (!file_)
            throw io_error("cannot open " + path);
    }
    ~GzFile() {
        if (file_)
            gzclose(file_);
    }
    GzFile(const GzFile&) = delete;
    GzFile& operator=(const GzFile&) = delete;

    void read_exact(void* dst, std::size_t bytes) {
        unsigned char* p = static_cast<unsigned char*>(dst);
        while (bytes > 0) {
            unsigned chunk = static_cast<unsigned>(
                std::min<std::size_t>(bytes, 1u << 30));
            int got = gzread(file_, p, chunk);
            if (got <= 0)
                throw format_error(path_ + ": truncated file (wanted " +
                                   std::to_string(bytes) + " more bytes)");
            p += got;
            bytes -= static_cast<std::size_t>(got);
        }
    }

    void skip(std::size_t bytes) {
        std::vector<unsigned char> sink(std::min<std::size_t>(bytes, 4096));
        while (bytes > 0) {
            std::size_t chunk = std::min(bytes, sink.size());
            read_exact(sink.data(), chunk);
            bytes -= chunk;
        }
    }

    void write_exact(const void* src, std::size_t bytes) {
        const unsigned char* p = static_cast<const unsigned char*>(src);
        while (bytes > 0) {
            unsigned chunk = static_cast<unsigned>(
                std::min<std::size_t>(bytes, 1u << 30));
            int put = gzwrite(file_, p, chunk);
            if (put <= 0)
                throw io_error("write failed on " + path_);
            p += put;
            bytes -= static_cast<std::size_t>(put);
        }
    }

    void close() {
        if (!file_)
            return;
        int rc = gzclose(file_);
        file_ = nullptr;
        if (rc != Z_OK)
            throw io_error("close failed on " + path_);
    }

private:
    std::string path_;
    gzFile file_ = nullptr;
};

bool has_gz_suffix(const std::string& path) {
    return path.size() >= 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

struct ParsedNifti {
    VolumeFileHeader header;
    GridSpec spec;
    std::vector<double> data;       // image intent
    std::vector<std::int32_t> labels; // labels intent
    // From intent_p1 when plausible; lets a mask keep trailing empty labels
    // across a round trip. 0 = not declared, infer from the data.
    int declared_label_count = 0;
};

ParsedNifti parse_nifti(const std::string& path) {
    GzFile in(path, "rb");
    NiftiHeader h{};
    in.read_exact(&h, sizeof(h));

    bool swapped = false;
    if (h.sizeof_hdr != 348) {
        if (byte_swapped(h.sizeof_hdr) != 348)
            throw format_error(path + ": sizeof_hdr at byte offset 0 is neither 348 nor its "
                                      "byte-swap; not a NIfTI-1 file");
        swap_header(h);
        swapped = true;
    }

    if (std::memcmp(h.magic, "n+1", 4) != 0) {
        if (std::memcmp(h.magic, "ni1", 4) == 0)
            throw format_error(path + ": two-file NIfTI (.hdr/.img pair, magic at byte offset "
                                      "344) is not supported");
        throw format_error(path + ": bad magic at byte offset 344");
    }
    if (h.dim[0] != 3) {
        // Tolerate trailing degenerate dimensions some writers emit.
        bool degenerate_tail = h.dim[0] > 3 && h.dim[0] <= 7;
        for (int d = 4; degenerate_tail && d <= h.dim[0]; ++d)
            if (h.dim[d] > 1)
                degenerate_tail = false;
        if (!degenerate_tail)
            throw format_error(path + ": dim[0] = " + std::to_string(h.dim[0]) +
                               " at byte offset 40; only 3-D volumes are supported");
    }

    ParsedNifti out;
    ElementType dtype = element_from_code(h.datatype, path);
    int esize = element_size(dtype);
    if (h.bitpix != 8 * esize)
        throw format_error(path + ": bitpix " + std::to_string(h.bitpix) +
                           " at byte offset 72 does not match datatype");

    for (int d = 0; d < 3; ++d) {
        std::int16_t n = h.dim[d + 1];
        if (n < 2)
            throw format_error(path + ": dim[" + std::to_string(d + 1) + "] = " +
                               std::to_string(n) +
                               " at byte offset 40; node-centered grids need >= 2 per axis");
        out.header.shape[d] = n;
        float pd = h.pixdim[d + 1];
        if (!(pd > 0.0f) || !std::isfinite(pd))
            throw format_error(path + ": non-positive pixdim at byte offset 76");
        out.header.spacing[d] = static_cast<double>(pd);
    }

    out.header.dtype = dtype;
    out.header.intent = h.intent_code == kIntentLabel ? VolumeIntent::labels
                                                      : VolumeIntent::image;
    if (out.header.intent == VolumeIntent::labels) {
        float p1 = h.intent_p1;
        if (p1 >= 1.0f && p1 <= 16777216.0f && p1 == std::floor(p1))
            out.declared_label_count = static_cast<int>(p1);
    }

    // Geometry: qoffset (or the sform translation) anchors the lower corner;
    // any rotation in the header is ignored with a warning.
    bool oriented = false;
    if (h.qform_code > 0) {
        out.header.domain_lower = {h.qoffset_x, h.qoffset_y, h.qoffset_z};
        if (std::abs(h.quatern_b) > 1e-6f || std::abs(h.quatern_c) > 1e-6f ||
            std::abs(h.quatern_d) > 1e-6f)
            oriented = true;
    } else if (h.sform_code > 0) {
        out.header.domain_lower = {h.srow_x[3], h.srow_y[3], h.srow_z[3]};
        const float* rows[3] = {h.srow_x, h.srow_y, h.srow_z};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                float expected = r == c ? static_cast<float>(out.header.spacing[r]) : 0.0f;
                if (std::abs(rows[r][c] - expected) > 1e-4f * (1.0f + std::abs(expected)))
                    oriented = true;
            }
    }
    if (oriented)
        std::cerr << "note: " << path
                  << ": orientation in header ignored; assuming axis-aligned grid\n";

    Domain dom;
    for (int d = 0; d < 3; ++d) {
        dom.lower[d] = out.header.domain_lower[d];
        dom.upper[d] =
            dom.lower[d] + (out.header.shape[d] - 1) * out.header.spacing[d];
    }
    out.spec = GridSpec(dom, out.header.shape);

    float vox_offset = h.vox_offset;
    if (vox_offset < 348.0f)
        throw format_error(path + ": vox_offset " + std::to_string(vox_offset) +
                           " at byte offset 108 is below the header size");
    in.skip(static_cast<std::size_t>(vox_offset) - sizeof(NiftiHeader));

    std::size_t count = static_cast<std::size_t>(out.spec.node_count());
    std::vector<unsigned char> bytes(count * static_cast<std::size_t>(esize));
    in.read_exact(bytes.data(), bytes.size());
    if (swapped && esize > 1) {
        for (std::size_t e = 0; e < count; ++e)
            std::reverse(bytes.data() + e * esize, bytes.data() + (e + 1) * esize);
    }

    auto decode = [&](std::size_t e) -> double {
        const unsigned char* p = bytes.data() + e * static_cast<std::size_t>(esize);
        switch (dtype) {
        case ElementType::u8:
            return static_cast<double>(*p);
        case ElementType::i16: {
            std::int16_t v;
            std::memcpy(&v, p, 2);
            return static_cast<double>(v);
        }
        case ElementType::f32: {
            float v;
            std::memcpy(&v, p, 4);
            return static_cast<double>(v);
        }
        case ElementType::f64: {
            double v;
            std::memcpy(&v, p, 8);
            return v;
        }
        }
        return 0.0;
    };

    if (out.header.intent == VolumeIntent::labels) {
        if (dtype != ElementType::u8 && dtype != ElementType::i16)
            throw format_error(path + ": label intent (code 1002 at byte offset 68) requires "
                                      "an integer datatype");
        bool scaled = h.scl_slope != 0.0f && (h.scl_slope != 1.0f || h.scl_inter != 0.0f);
        if (scaled)
            throw format_error(path + ": label volumes must not carry scl_slope/scl_inter "
                                      "scaling (byte offset 112)");
        out.labels.resize(count);
        for (std::size_t e = 0; e < count; ++e) {
            double v = decode(e);
            if (v < 0.0)
                throw format_error(path + ": negative label " + std::to_string(v));
            out.labels[e] = static_cast<std::int32_t>(v);
        }
    } else {
        bool scaled = h.scl_slope != 0.0f && (h.scl_slope != 1.0f || h.scl_inter != 0.0f);
        if (scaled)
            std::cerr << "note: " << path << ": applying scl_slope = " << h.scl_slope
                      << ", scl_inter = " << h.scl_inter << "\n";
        out.data.resize(count);
        for (std::size_t e = 0; e < count; ++e) {
            double v = decode(e);
            if (scaled)
                v = static_cast<double>(h.scl_slope) * v + static_cast<double>(h.scl_inter);
            out.data[e] = v;
        }
    }
    return out;
}

void validate_volume_for(const VolumeGrid& volume, ElementType dtype) {
    std::span<const double> vals = volume.values();
    for (std::size_t i = 0; i < vals.size(); ++i) {
        double v = vals[i];
        bool ok = true;
        switch (dtype) {
        case ElementType::u8:
            ok = v == std::floor(v) && v >= 0.0 && v <= 255.0;
            break;
        case ElementType::i16:
            ok = v == std::floor(v) && v >= -32768.0 && v <= 32767.0;
            break;
        case ElementType::f32:
            ok = std::isfinite(v) && std::abs(v) <= FLT_MAX;
            break;
        case ElementType::f64:
            ok = std::isfinite(v);
            break;
        }
        if (!ok)
            throw range_error("sample " + std::to_string(v) + " at linear offset " +
                              std::to_string(i) + " is not representable as " +
                              element_type_name(dtype));
    }
}

std::vector<unsigned char> encode_elements(std::span<const double> vals, ElementType dtype) {
    int esize = element_size(dtype);
    std::vector<unsigned char> bytes(vals.size() * static_cast<std::size_t>(esize));
    for (std::size_t i = 0; i < vals.size(); ++i) {
        unsigned char* p = bytes.data() + i * static_cast<std::size_t>(esize);
        switch (dtype) {
        case ElementType::u8: {
            unsigned char v = static_cast<unsigned char>(vals[i]);
            *p = v;
            break;
        }
        case ElementType::i16: {
            std::int16_t v = static_cast<std::int16_t>(vals[i]);
            std::memcpy(p, &v, 2);
            break;
        }
        case ElementType::f32: {
            float v = static_cast<float>(vals[i]);
            std::memcpy(p, &v, 4);
            break;
        }
        case ElementType::f64: {
            double v = vals[i];
            std::memcpy(p, &v, 8);
            break;
        }
        }
    }
    return bytes;
}

NiftiHeader make_header(const GridSpec& spec, ElementType dtype, VolumeIntent intent,
                        int label_count = 0) {
    NiftiHeader h{};
    h.sizeof_hdr = 348;
    h.regular = 'r';
    h.dim[0] = 3;
    for (int d = 0; d < 3; ++d)
        h.dim[d + 1] = static_cast<std::int16_t>(spec.shape[d]);
    for (int d = 4; d < 8; ++d)
        h.dim[d] = 1;
    h.intent_code = intent == VolumeIntent::labels ? kIntentLabel : 0;
    if (intent == VolumeIntent::labels && label_count > 0)
        h.intent_p1 = static_cast<float>(label_count);
    h.datatype = nifti_code(dtype);
    h.bitpix = static_cast<std::int16_t>(8 * element_size(dtype));
    vec3 spacing = spec.spacing();
    h.pixdim[0] = 1.0f;
    for (int d = 0; d < 3; ++d)
        h.pixdim[d + 1] = static_cast<float>(spacing[d]);
    h.vox_offset = static_cast<float>(kVoxOffset);
    h.scl_slope = 1.0f;
    h.scl_inter = 0.0f;
    std::strncpy(h.descrip, "fakeres volume", sizeof(h.descrip) - 1);
    h.qform_code = 1;
    h.sform_code = 1;
    h.quatern_b = h.quatern_c = h.quatern_d = 0.0f;
    h.qoffset_x = static_cast<float>(spec.domain.lower[0]);
    h.qoffset_y = static_cast<float>(spec.domain.lower[1]);
    h.qoffset_z = static_cast<float>(spec.domain.lower[2]);
    h.srow_x[0] = static_cast<float>(spacing[0]);
    h.srow_x[3] = h.qoffset_x;
    h.srow_y[1] = static_cast<float>(spacing[1]);
    h.srow_y[3] = h.qoffset_y;
    h.srow_z[2] = static_cast<float>(spacing[2]);
    h.srow_z[3] = h.qoffset_z;
    std::memcpy(h.magic, "n+1", 4);
    return h;
}

void write_nifti_bytes(const std::string& path, const NiftiHeader& h,
                       std::span<const unsigned char> data) {
    // Four zero bytes after the header say "no extensions", landing the data
    // at the standard offset 352.
    const unsigned char pad[4] = {0, 0, 0, 0};
    if (has_gz_suffix(path)) {
        GzFile out(path, "wb");
        out.write_exact(&h, sizeof(h));
        out.write_exact(pad, sizeof(pad));
        out.write_exact(data.data(), data.size());
        out.close();
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw io_error("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(&h), sizeof(h));
    out.write(reinterpret_cast<const char*>(pad), sizeof(pad));
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out)
        throw io_error("write failed on " + path);
}

} // namespace

const char* element_type_name(ElementType t) {
    switch (t) {
    case ElementType::u8:
        return "u8";
    case ElementType::i16:
        return "i16";
    case ElementType::f32:
        return "f32";
    case ElementType::f64:
        return "f64";
    }
    return "?";
}

ElementType element_type_by_name(const std::string& name) {
    if (name == "u8")
        return ElementType::u8;
    if (name == "i16")
        return ElementType::i16;
    if (name == "f32")
        return ElementType::f32;
    if (name == "f64")
        return ElementType::f64;
    throw parameter_error("unknown element type \"" + name +
                          "\" (expected u8, i16, f32, or f64)");
}

std::variant<VolumeGrid, SegmentationMask> read_nifti(const std::string& path) {
    ParsedNifti parsed = parse_nifti(path);
    if (parsed.header.intent == VolumeIntent::labels) {
        std::int32_t top = 0;
        for (std::int32_t l : parsed.labels)
            top = std::max(top, l);
        int count = std::max(top + 1, parsed.declared_label_count);
        return SegmentationMask(parsed.spec, count, std::move(parsed.labels));
    }
    return VolumeGrid(parsed.spec, std::move(parsed.data));
}

VolumeGrid read_volume_nifti(const std::string& path) {
    auto v = read_nifti(path);
    if (std::holds_alternative<SegmentationMask>(v))
        throw input_error(path + " holds a label volume, not an image");
    return std::get<VolumeGrid>(std::move(v));
}

SegmentationMask read_mask_nifti(const std::string& path) {
    auto v = read_nifti(path);
    if (std::holds_alternative<VolumeGrid>(v))
        throw input_error(path + " holds an image, not a label volume");
    return std::get<SegmentationMask>(std::move(v));
}

void write_nifti(const VolumeGrid& volume, const std::string& path, ElementType dtype) {
    validate_volume_for(volume, dtype);
    NiftiHeader h = make_header(volume.spec(), dtype, VolumeIntent::image);
    write_nifti_bytes(path, h, encode_elements(volume.values(), dtype));
}

void write_nifti(const SegmentationMask& mask, const std::string& path, ElementType dtype) {
    if (dtype != ElementType::u8 && dtype != ElementType::i16)
        throw parameter_error("label volumes require an integer element type");
    double top = dtype == ElementType::u8 ? 255.0 : 32767.0;
    std::vector<double> widened(mask.labels().begin(), mask.labels().end());
    for (std::size_t i = 0; i < widened.size(); ++i)
        if (widened[i] > top)
            throw range_error("label " + std::to_string(widened[i]) +
                              " does not fit element type " + element_type_name(dtype));
    NiftiHeader h = make_header(mask.spec(), dtype, VolumeIntent::labels, mask.label_count());
    write_nifti_bytes(path, h, encode_elements(widened, dtype));
}

void write_raw(const VolumeGrid& volume, const std::string& base_path) {
    const GridSpec& spec = volume.spec();
    nlohmann::json j;
    j["shape"] = spec.shape;
    j["spacing"] = spec.spacing();
    j["domain_lower"] = spec.domain.lower;
    j["dtype"] = "f64";
    j["intent"] = "image";
    std::ofstream js(base_path + ".json", std::ios::trunc);
    if (!js)
        throw io_error("cannot open " + base_path + ".json for writing");
    js << j.dump(2) << "\n";
    if (!js)
        throw io_error("write failed on " + base_path + ".json");

    std::ofstream rw(base_path + ".raw", std::ios::binary | std::ios::trunc);
    if (!rw)
        throw io_error("cannot open " + base_path + ".raw for writing");
    std::span<const double> vals = volume.values();
    rw.write(reinterpret_cast<const char*>(vals.data()),
             static_cast<std::streamsize>(vals.size() * sizeof(double)));
    if (!rw)
        throw io_error("write failed on " + base_path + ".raw");
}

void write_raw(const SegmentationMask& mask, const std::string& base_path) {
    const GridSpec& spec = mask.spec();
    nlohmann::json j;
    j["shape"] = spec.shape;
    j["spacing"] = spec.spacing();
    j["domain_lower"] = spec.domain.lower;
    j["dtype"] = "i32";
    j["intent"] = "labels";
    j["label_count"] = mask.label_count();
    std::ofstream js(base_path + ".json", std::ios::trunc);
    if (!js)
        throw io_error("cannot open " + base_path + ".json for writing");
    js << j.dump(2) << "\n";
    if (!js)
        throw io_error("write failed on " + base_path + ".json");

    std::ofstream rw(base_path + ".raw", std::ios::binary | std::ios::trunc);
    if (!rw)
        throw io_error("cannot open " + base_path + ".raw for writing");
    std::span<const std::int32_t> labels = mask.labels();
    rw.write(reinterpret_cast<const char*>(labels.data()),
             static_cast<std::streamsize>(labels.size() * sizeof(std::int32_t)));
    if (!rw)
        throw io_error("write failed on " + base_path + ".raw");
}

std::variant<VolumeGrid, SegmentationMask> read_raw(const std::string& base_path) {
    std::ifstream js(base_path + ".json");
    if (!js)
        throw io_error("cannot open " + base_path + ".json");
    nlohmann::json j;
    try {
        js >> j;
    } catch (const nlohmann::json::exception& e) {
        throw format_error(base_path + ".json: " + e.what());
    }

    index3 shape;
    vec3 spacing, lower;
    std::string dtype, intent;
    try {
        shape = j.at("shape").get<index3>();
        spacing = j.at("spacing").get<vec3>();
        lower = j.at("domain_lower").get<vec3>();
        dtype = j.at("dtype").get<std::string>();
        intent = j.at("intent").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw format_error(base_path + ".json: " + e.what());
    }

    Domain dom;
    for (int d = 0; d < 3; ++d) {
        dom.lower[d] = lower[d];
        dom.upper[d] = lower[d] + (shape[d] - 1) * spacing[d];
    }
    GridSpec spec(dom, shape);
    std::size_t count = static_cast<std::size_t>(spec.node_count());

    std::ifstream rw(base_path + ".raw", std::ios::binary);
    if (!rw)
        throw io_error("cannot open " + base_path + ".raw");

    if (intent == "labels") {
        if (dtype != "i32")
            throw format_error(base_path + ".json: labels require dtype i32, got " + dtype);
        int label_count = j.value("label_count", 0);
        std::vector<std::int32_t> labels(count);
        rw.read(reinterpret_cast<char*>(labels.data()),
                static_cast<std::streamsize>(count * sizeof(std::int32_t)));
        if (rw.gcount() != static_cast<std::streamsize>(count * sizeof(std::int32_t)))
            throw format_error(base_path + ".raw: truncated label data");
        if (label_count <= 0) {
            for (std::int32_t l : labels)
                label_count = std::max(label_count, l + 1);
        }
        return SegmentationMask(spec, label_count, std::move(labels));
    }
    if (intent != "image")
        throw format_error(base_path + ".json: unknown intent " + intent);
    if (dtype != "f64")
        throw format_error(base_path + ".json: images require dtype f64, got " + dtype);
    std::vector<double> data(count);
    rw.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (rw.gcount() != static_cast<std::streamsize>(count * sizeof(double)))
        throw format_error(base_path + ".raw: truncated image data");
    return VolumeGrid(spec, std::move(data));
}

bool grids_equivalent(const GridSpec& a, const GridSpec& b, double tol) {
    if (a.shape != b.shape)
        return false;
    const vec3 ha = a.spacing(), hb = b.spacing();
    for (int d = 0; d < 3; ++d) {
        const double h = std::max(ha[d], hb[d]);
        if (std::abs(ha[d] - hb[d]) > tol * h)
            return false;
        const double origin_scale =
            std::max({std::abs(a.domain.lower[d]), std::abs(b.domain.lower[d]), h});
        if (std::abs(a.domain.lower[d] - b.domain.lower[d]) > tol * origin_scale)
            return false;
    }
    return true;
}

SegmentationMask align_mask_to(const SegmentationMask& mask, const GridSpec& spec, double tol) {
    if (mask.spec() == spec)
        return mask;
    if (!grids_equivalent(mask.spec(), spec, tol)) {
        auto shape_of = [](const index3& s) {
            return std::to_string(s[0]) + "x" + std::to_string(s[1]) + "x" +
                   std::to_string(s[2]);
        };
        throw input_error("segmentation grid differs from the requested grid beyond storage "
                          "rounding (" + shape_of(mask.spec().shape) + " vs " +
                          shape_of(spec.shape) + ")");
    }
    return SegmentationMask(spec, mask.label_count(),
                            std::vector<std::int32_t>(mask.labels().begin(),
                                                      mask.labels().end()));
}

} // namespace fakeres
