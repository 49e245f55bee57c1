#include <doctest.h>

#include <fakeres/analysis.hpp>
#include <fakeres/fakenodes.hpp>
#include <fakeres/grid.hpp>
#include <fakeres/io.hpp>
#include <fakeres/resample.hpp>

#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace fakeres;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

const fs::path& scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "fakeres_cli_scratch";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string path_of(const std::string& name) { return (scratch() / name).string(); }

// Runs the CLI through the shell, captures combined output, returns the exit
// code (or -1 if the shell itself failed to launch).
int run_cli(const std::string& args, std::string* output = nullptr,
            const std::string& env_prefix = "") {
    static int counter = 0;
    fs::path cap = scratch() / ("capture_" + std::to_string(counter++) + ".txt");
    std::string cmd = env_prefix + (env_prefix.empty() ? "" : " ") + FAKERES_CLI_PATH + " " + args +
                      " > " + cap.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    if (output) {
        std::ifstream in(cap);
        std::ostringstream buf;
        buf << in.rdbuf();
        *output = buf.str();
    }
    if (status < 0 || !WIFEXITED(status))
        return -1;
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json parse_json_file(const fs::path& p) { return json::parse(slurp(p)); }

// Shared two-compartment fixture: one centered sphere so every label is
// populated even at 9^3. Generated through the CLI itself, once.
struct PhantomPair {
    std::string vol;
    std::string mask;
};

const PhantomPair& phantom9() {
    static const PhantomPair p = [] {
        PhantomPair q{path_of("p9_vol.nii"), path_of("p9_mask.nii")};
        if (run_cli("phantom -o " + path_of("p9") + " --kind two-compartment --size 9 --radii 0.3") != 0)
            throw std::runtime_error("fixture phantom 9^3 failed");
        return q;
    }();
    return p;
}

const PhantomPair& phantom17() {
    static const PhantomPair p = [] {
        PhantomPair q{path_of("p17_vol.nii"), path_of("p17_mask.nii")};
        if (run_cli("phantom -o " + path_of("p17") + " --kind two-compartment --size 17 --radii 0.3") != 0)
            throw std::runtime_error("fixture phantom 17^3 failed");
        return q;
    }();
    return p;
}

} // namespace

TEST_CASE("help exits clean, usage mistakes exit 2") {
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("resample --help") == 0);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("no-such-command") == 2);
    CHECK(run_cli("phantom --bogus-flag -o " + path_of("x")) == 2);
    CHECK(run_cli("phantom") == 2);
    CHECK(run_cli("resample -i a.nii -o b.nii --target-size 8 --fill nearest") == 2);
}

TEST_CASE("phantom writes a volume and mask pair") {
    std::string out;
    CHECK(run_cli("phantom -o " + path_of("head") + " --kind shepp --size 12", &out) == 0);
    CHECK(out.find("6 labels") != std::string::npos);

    VolumeGrid vol = read_volume_nifti(path_of("head_vol.nii"));
    SegmentationMask mask = read_mask_nifti(path_of("head_mask.nii"));
    CHECK(vol.spec().shape == index3{12, 12, 12});
    // Spacing rides in 32-bit header fields, so the domain comes back rounded.
    for (int d = 0; d < 3; ++d) {
        CHECK(vol.spec().domain.lower[d] == -1.0);
        CHECK(vol.spec().domain.upper[d] == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK(mask.spec() == vol.spec());
    CHECK(mask.label_count() == 6);

    CHECK(run_cli("phantom -o " + path_of("x") + " --kind file") == 2);
    CHECK(run_cli("phantom -o " + path_of("x") + " --kind shepp --definition d.txt") == 2);
}

TEST_CASE("phantom accepts an ellipsoid definition file") {
    fs::path def = scratch() / "blob.txt";
    std::ofstream(def) << "# one blob\n"
                          "domain 0 1 0 1 0 1\n"
                          "labels 0 3\n"
                          "0.5 0.5 0.5  0.3 0.3 0.3  0 3.0\n";
    std::string out;
    CHECK(run_cli("phantom -o " + path_of("blob") + " --kind file --definition " + def.string() +
                      " --size 8",
                  &out) == 0);
    SegmentationMask mask = read_mask_nifti(path_of("blob_mask.nii"));
    CHECK(mask.label_count() == 2);
    CHECK(mask.count_of(1) > 0);
}

TEST_CASE("plain resample at the source size reproduces the input") {
    const PhantomPair& p = phantom9();
    CHECK(run_cli("resample -i " + p.vol + " -o " + path_of("ident.nii") + " --target-size 9") == 0);
    VolumeGrid src = read_volume_nifti(p.vol);
    VolumeGrid out = read_volume_nifti(path_of("ident.nii"));
    REQUIRE(out.spec() == src.spec());
    double max_abs = 0.0;
    for (std::size_t i = 0; i < src.values().size(); ++i)
        max_abs = std::max(max_abs, std::abs(out.values()[i] - src.values()[i]));
    CHECK(max_abs <= 1e-12);
}

TEST_CASE("resample honors per-axis sizes and the requested element type") {
    const PhantomPair& p = phantom9();
    std::string out_path = path_of("small.nii");
    CHECK(run_cli("resample -i " + p.vol + " -o " + out_path +
                  " --target-size 5 6 7 --dtype f32") == 0);
    VolumeGrid out = read_volume_nifti(out_path);
    CHECK(out.spec().shape == index3{5, 6, 7});
    CHECK(fs::file_size(out_path) == 352 + 5u * 6u * 7u * 4u);

    CHECK(run_cli("resample -i " + p.vol + " -o " + path_of("x.nii") + " --target-size 5 6") == 2);
}

TEST_CASE("fake mode needs a target mask, plain mode rejects stack export") {
    const PhantomPair& p = phantom9();
    CHECK(run_cli("resample -i " + p.vol + " -o " + path_of("x.nii") +
                  " --target-size 17 --mode fake") == 2);
    CHECK(run_cli("resample -i " + p.vol + " -o " + path_of("x.nii") +
                  " --target-size 17 --emit-stack " + path_of("s.nii")) == 2);
}

TEST_CASE("fake resample matches the library and can export its block stack") {
    const PhantomPair& lo = phantom9();
    const PhantomPair& hi = phantom17();
    std::string out_path = path_of("fake17.nii");
    std::string stack_path = path_of("stack17.nii");
    CHECK(run_cli("resample -i " + lo.vol + " -o " + out_path + " --target-size 17 --mode fake" +
                  " --mask " + hi.mask + " --mask-low " + lo.mask +
                  " --sigma 1.0 --iterations 2 --emit-stack " + stack_path) == 0);

    VolumeGrid src = read_volume_nifti(lo.vol);
    SegmentationMask low_mask = read_mask_nifti(lo.mask);
    SegmentationMask high_mask = read_mask_nifti(hi.mask);
    ResamplePlan plan(src.spec(), GridSpec(src.spec().domain, {17, 17, 17}),
                      KernelKind::trilinear);
    FakeStackConfig cfg;
    cfg.smoothing_sigma = 1.0;
    cfg.smoothing_iterations = 2;
    cfg.background_fill = BackgroundFill::segment_mean;
    FakeResampleResult expect = fake_resample(src, low_mask, high_mask, plan, cfg);

    VolumeGrid out = read_volume_nifti(out_path);
    REQUIRE(out.spec() == expect.volume.spec());
    CHECK(std::equal(out.values().begin(), out.values().end(), expect.volume.values().begin()));

    // The stack holds the source-grid extension blocks, concatenated on x.
    VolumeGrid stack = read_volume_nifti(stack_path);
    CHECK(stack.spec().shape == index3{9 * 4, 9, 9});

    // Without --mask-low the source segmentation is derived from the target's.
    CHECK(run_cli("resample -i " + lo.vol + " -o " + path_of("fake17b.nii") +
                  " --target-size 17 --mode fake --mask " + hi.mask) == 0);
    CHECK(read_volume_nifti(path_of("fake17b.nii")).spec().shape == index3{17, 17, 17});
}

TEST_CASE("missing inputs exit with the io code") {
    CHECK(run_cli("resample -i " + path_of("absent.nii") + " -o " + path_of("x.nii") +
                  " --target-size 8") == 5);
    CHECK(run_cli("stats -i " + path_of("absent.nii") + " --mask " + path_of("gone.nii")) == 5);
}

TEST_CASE("stats writes reports and prints the mean ratio") {
    const PhantomPair& p = phantom9();
    fs::path dir = scratch() / "statdir";
    std::string out;
    CHECK(run_cli("stats -i " + p.vol + " --mask " + p.mask + " -o " + dir.string() +
                      " --references 0 0.5 1 4 --hot 3 --cold 2",
                  &out) == 0);
    CHECK(out.find("fbr (label 3 over label 2): 4") != std::string::npos);

    json j = parse_json_file(dir / "stats.json");
    REQUIRE(j["segments"].size() == 4);
    CHECK(j["segments"][0]["label"] == 0);
    // Regions are exact constants, so the reference errors vanish.
    for (const json& row : j["segments"])
        CHECK(row["abs_error"].get<double>() == 0.0);
    CHECK(j["fbr"]["value"].get<double>() == 4.0);

    std::string csv = slurp(dir / "stats.csv");
    CHECK(csv.rfind("label,voxel_count,mean,median,min,max,reference,abs_error\n", 0) == 0);
    CHECK(csv.find("# fbr,") != std::string::npos);
}

TEST_CASE("stats rejects inconsistent flags and bad references") {
    const PhantomPair& p = phantom9();
    CHECK(run_cli("stats -i " + p.vol + " --mask " + p.mask + " --hot 3") == 2);
    CHECK(run_cli("stats -i " + p.vol + " --mask " + p.mask + " -o " + path_of("sx") +
                  " --references 1 2") == 3);
}

TEST_CASE("a degenerate mean ratio exits with the numeric code") {
    GridSpec spec = GridSpec::cube(0.0, 1.0, 4);
    const std::size_t n = static_cast<std::size_t>(spec.node_count());
    std::vector<double> vals(n, 0.0);
    std::vector<std::int32_t> labels(n, 0);
    for (std::size_t i = n / 2; i < n; ++i) {
        vals[i] = 2.0;
        labels[i] = 1;
    }
    write_nifti(VolumeGrid(spec, std::move(vals)), path_of("zero_cold_vol.nii"),
                ElementType::f64);
    write_nifti(SegmentationMask(spec, 2, std::move(labels)), path_of("zero_cold_mask.nii"),
                ElementType::u8);
    CHECK(run_cli("stats -i " + path_of("zero_cold_vol.nii") + " --mask " +
                  path_of("zero_cold_mask.nii") + " -o " + path_of("zx") +
                  " --hot 1 --cold 0") == 4);
}

TEST_CASE("kmeans recovers the phantom compartments deterministically") {
    const PhantomPair& p = phantom17();
    std::string seg = path_of("seg17.nii");
    CHECK(run_cli("kmeans -i " + p.vol + " -o " + seg + " --k 4") == 0);

    SegmentationMask found = read_mask_nifti(seg);
    SegmentationMask truth = read_mask_nifti(p.mask);
    REQUIRE(found.label_count() == 4);
    // Four exactly constant region values, so clustering reproduces the truth.
    CHECK(std::equal(found.labels().begin(), found.labels().end(), truth.labels().begin()));

    std::string again = path_of("seg17_again.nii");
    CHECK(run_cli("kmeans -i " + p.vol + " -o " + again + " --k 4") == 0);
    CHECK(slurp(seg) == slurp(again));

    CHECK(run_cli("kmeans -i " + p.vol + " -o " + path_of("x.nii") + " --k 1") == 3);

    GridSpec spec = GridSpec::cube(0.0, 1.0, 4);
    write_nifti(VolumeGrid(spec, std::vector<double>(spec.node_count(), 1.0)),
                path_of("const_vol.nii"), ElementType::f64);
    CHECK(run_cli("kmeans -i " + path_of("const_vol.nii") + " -o " + path_of("x.nii") +
                  " --k 2") == 3);
}

TEST_CASE("verify-bounds passes and writes its report") {
    fs::path dir = scratch() / "vbdir";
    std::string out;
    CHECK(run_cli("verify-bounds --size 8 --probes 400 -o " + dir.string(), &out) == 0);
    CHECK(out.find("FAIL") == std::string::npos);
    json j = parse_json_file(dir / "bounds.json");
    CHECK(j["all_pass"] == true);
    CHECK(j["fields"].size() == 6);
}

TEST_CASE("oversampling experiment reports are thread-count invariant") {
    fs::path a = scratch() / "e1a";
    fs::path b = scratch() / "e1b";
    CHECK(run_cli("experiment1 -o " + a.string() + " --size-lo 9 --size-hi 17 --threads 1") == 0);
    CHECK(run_cli("experiment1 -o " + b.string() + " --size-lo 9 --size-hi 17 --threads 2") == 0);
    CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
    CHECK(slurp(a / "report.csv") == slurp(b / "report.csv"));
    CHECK(fs::exists(a / "timing.json"));
}

TEST_CASE("ratio experiment is seed-deterministic") {
    const std::string common = " --size-lo 9 --size-hi 17 --blur-fwhm 0.2 --noise-sigma 0.01"
                               " --trials 3 --radii 0.3";
    fs::path a = scratch() / "e2a";
    fs::path b = scratch() / "e2b";
    fs::path c = scratch() / "e2c";
    CHECK(run_cli("experiment2-surrogate -o " + a.string() + common) == 0);
    CHECK(run_cli("experiment2-surrogate -o " + b.string() + common) == 0);
    CHECK(run_cli("experiment2-surrogate -o " + c.string() + common + " --seed 99") == 0);
    CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
    CHECK(slurp(a / "groups.csv") == slurp(b / "groups.csv"));
    CHECK(slurp(a / "report.json") != slurp(c / "report.json"));
}

TEST_CASE("stored masks reconcile with full-precision plan grids") {
    // 2/31 and 2/63 both round in the 32-bit header fields, so these files
    // carry slightly different reconstructions of the same physical domain;
    // the pipeline must still treat them as one grid.
    REQUIRE(run_cli("phantom -o " + path_of("r32") + " --kind two-compartment --size 32") == 0);
    REQUIRE(run_cli("phantom -o " + path_of("r64") + " --kind two-compartment --size 64") == 0);
    CHECK(run_cli("resample -i " + path_of("r32_vol.nii") + " -o " + path_of("r64_fake.nii") +
                  " --target-size 64 --mode fake --mask " + path_of("r64_mask.nii") +
                  " --mask-low " + path_of("r32_mask.nii")) == 0);
    std::string out;
    CHECK(run_cli("stats -i " + path_of("r64_fake.nii") + " --mask " + path_of("r64_mask.nii") +
                      " -o " + path_of("rstats") + " --hot 3 --cold 2",
                  &out) == 0);
    // Piecewise-constant regions survive the pipeline, so the ratio is clean.
    CHECK(out.find("fbr (label 3 over label 2): 4") != std::string::npos);
}

TEST_CASE("worker count can come from the environment") {
    CHECK(run_cli("phantom -o " + path_of("env_head") + " --kind shepp --size 8", nullptr,
                  "FAKERES_THREADS=2") == 0);
    CHECK(fs::exists(path_of("env_head_vol.nii")));
}
