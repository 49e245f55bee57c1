#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fakeres/analysis.hpp"
#include "fakeres/errors.hpp"
#include "fakeres/experiments.hpp"
#include "fakeres/fakenodes.hpp"
#include "fakeres/io.hpp"
#include "fakeres/numerics.hpp"
#include "fakeres/phantom.hpp"
#include "fakeres/resample.hpp"
#include "fakeres/test_fields.hpp"

namespace {

using namespace fakeres;
using json = nlohmann::json;

// Flag combinations the parser alone cannot reject (exit code 2).
struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out)
        throw io_error("failed writing " + path.string());
}

KernelKind kernel_by_cli_name(const std::string& name) {
    return BasisKernel::by_name(name, 1.0).kind();
}

BackgroundFill fill_by_cli_name(const std::string& name) {
    if (name == "zero")
        return BackgroundFill::zero;
    if (name == "segment-mean")
        return BackgroundFill::segment_mean;
    throw parameter_error("unknown fill mode \"" + name + "\"");
}

struct PhantomArgs {
    std::string out;
    std::string kind = "shepp";
    std::string definition;
    int size = 128;
    double hot = 4.0;
    double cold = 1.0;
    std::vector<double> radii;
    int threads = 0;
};

int run_phantom(const PhantomArgs& a) {
    if (a.kind == "file" && a.definition.empty())
        throw usage_error("--kind file requires --definition");
    if (a.kind != "file" && !a.definition.empty())
        throw usage_error("--definition only applies to --kind file");

    RasterizedPhantom r = [&] {
        if (a.kind == "two-compartment") {
            std::vector<double> radii = a.radii.empty() ? default_two_compartment_radii() : a.radii;
            return make_two_compartment(GridSpec::cube(-1.0, 1.0, a.size), radii, a.hot, a.cold,
                                        a.threads);
        }
        PhantomDefinition def = a.kind == "file" ? PhantomDefinition::from_file(a.definition)
                                                 : PhantomDefinition::shepp_logan();
        return rasterize_phantom(def, GridSpec(def.domain, {a.size, a.size, a.size}), a.threads);
    }();

    const std::string vol_path = a.out + "_vol.nii";
    const std::string mask_path = a.out + "_mask.nii";
    write_nifti(r.volume, vol_path, ElementType::f64);
    write_nifti(r.mask, mask_path,
                r.mask.label_count() <= 256 ? ElementType::u8 : ElementType::i16);

    std::printf("phantom %s, %d^3 nodes, %d labels\n", a.kind.c_str(), a.size,
                r.mask.label_count());
    for (std::size_t l = 0; l < r.label_values.size(); ++l)
        std::printf("  label %zu: value %s, %lld nodes\n", l, fmt6(r.label_values[l]).c_str(),
                    static_cast<long long>(r.mask.count_of(static_cast<int>(l))));
    std::printf("wrote %s\nwrote %s\n", vol_path.c_str(), mask_path.c_str());
    return 0;
}

struct ResampleArgs {
    std::string in;
    std::string out;
    std::string mode = "plain";
    std::string kernel = "trilinear";
    std::string mask;
    std::string mask_low;
    std::string emit_stack;
    std::string dtype = "f64";
    std::vector<int> target_size;
    double sigma = 1.0;
    int iterations = 3;
    std::string fill = "segment-mean";
    bool skip_empty = false;
    int threads = 0;
};

int run_resample(const ResampleArgs& a) {
    if (a.mode == "fake" && a.mask.empty())
        throw usage_error("--mode fake requires --mask (the target-grid segmentation)");
    if (a.mode == "plain" && !a.emit_stack.empty())
        throw usage_error("--emit-stack only applies to --mode fake");
    if (a.target_size.size() != 1 && a.target_size.size() != 3)
        throw usage_error("--target-size takes one count or three per-axis counts");

    VolumeGrid vol = read_volume_nifti(a.in);
    index3 shape = a.target_size.size() == 1
                       ? index3{a.target_size[0], a.target_size[0], a.target_size[0]}
                       : index3{a.target_size[0], a.target_size[1], a.target_size[2]};
    GridSpec target(vol.spec().domain, shape);
    ResamplePlan plan(vol.spec(), target, kernel_by_cli_name(a.kernel));

    VolumeGrid out = [&] {
        if (a.mode == "plain") {
            if (!a.mask.empty())
                std::cerr << "note: --mask is ignored in plain mode\n";
            return resample_volume(vol, plan, a.threads);
        }
        // Stored geometry is quantized to 32-bit header fields, so masks from
        // disk are reconciled with the full-precision plan grids.
        SegmentationMask high = align_mask_to(read_mask_nifti(a.mask), target);
        FakeStackConfig cfg;
        cfg.smoothing_sigma = a.sigma;
        cfg.smoothing_iterations = a.iterations;
        cfg.background_fill = fill_by_cli_name(a.fill);
        cfg.skip_empty = a.skip_empty;
        cfg.validate();
        FakeResampleResult r =
            a.mask_low.empty()
                ? fake_resample(vol, high, plan, cfg, a.threads)
                : fake_resample(vol, align_mask_to(read_mask_nifti(a.mask_low), vol.spec()),
                                high, plan, cfg, a.threads);
        if (!a.emit_stack.empty()) {
            write_nifti(r.stack.assemble_stacked(), a.emit_stack, element_type_by_name(a.dtype));
            std::printf("wrote %s (%zu blocks stacked along x)\n", a.emit_stack.c_str(),
                        r.stack.blocks.size());
        }
        return std::move(r.volume);
    }();

    write_nifti(out, a.out, element_type_by_name(a.dtype));
    std::printf("%s resample %s: %dx%dx%d -> %dx%dx%d\nwrote %s\n", a.mode.c_str(),
                a.kernel.c_str(), vol.spec().shape[0], vol.spec().shape[1], vol.spec().shape[2],
                shape[0], shape[1], shape[2], a.out.c_str());
    return 0;
}

struct StatsArgs {
    std::string in;
    std::string mask;
    std::string out_dir = ".";
    std::vector<double> references;
    int hot = -1;
    int cold = -1;
};

int run_stats(const StatsArgs& a) {
    if ((a.hot < 0) != (a.cold < 0))
        throw usage_error("--hot and --cold must be given together");

    VolumeGrid vol = read_volume_nifti(a.in);
    SegmentationMask mask = align_mask_to(read_mask_nifti(a.mask), vol.spec());
    SegmentStats stats = segment_stats(vol, mask, a.references);

    json j;
    j["segments"] = json::array();
    std::string csv = "label,voxel_count,mean,median,min,max,reference,abs_error\n";
    std::printf("%7s %12s %13s %13s %13s %13s %13s %13s\n", "label", "count", "mean", "median",
                "min", "max", "reference", "abs_error");
    for (const LabelStats& s : stats.labels) {
        json row{{"label", s.label}, {"voxel_count", s.voxel_count}};
        csv += std::to_string(s.label) + ',' + std::to_string(s.voxel_count) + ',';
        auto put = [&](const char* key, const std::optional<double>& v, bool last = false) {
            row[key] = v ? json(*v) : json(nullptr);
            csv += v ? format_double(*v) : std::string();
            csv += last ? '\n' : ',';
        };
        put("mean", s.mean);
        put("median", s.median);
        put("min", s.min);
        put("max", s.max);
        put("reference", s.reference);
        put("abs_error", s.abs_error, true);
        auto cell = [&](const std::optional<double>& v) {
            return v ? fmt6(*v) : std::string("-");
        };
        std::printf("%7d %12lld %13s %13s %13s %13s %13s %13s\n", s.label,
                    static_cast<long long>(s.voxel_count), cell(s.mean).c_str(),
                    cell(s.median).c_str(), cell(s.min).c_str(), cell(s.max).c_str(),
                    cell(s.reference).c_str(), cell(s.abs_error).c_str());
        j["segments"].push_back(row);
    }
    if (a.hot >= 0) {
        double r = fbr(vol, mask, a.hot, a.cold);
        j["fbr"] = {{"hot_label", a.hot}, {"cold_label", a.cold}, {"value", r}};
        csv += "# fbr," + format_double(r) + '\n';
        std::printf("fbr (label %d over label %d): %s\n", a.hot, a.cold, fmt6(r).c_str());
    }

    std::filesystem::path dir(a.out_dir);
    std::filesystem::create_directories(dir);
    write_text(dir / "stats.json", j.dump(2) + "\n");
    write_text(dir / "stats.csv", csv);
    std::printf("wrote %s and %s\n", (dir / "stats.json").string().c_str(),
                (dir / "stats.csv").string().c_str());
    return 0;
}

struct KmeansArgs {
    std::string in;
    std::string out;
    int k = 2;
    std::uint64_t seed = kDefaultSeed;
};

int run_kmeans(const KmeansArgs& a) {
    std::printf("seed: %llu\n", static_cast<unsigned long long>(a.seed));
    VolumeGrid vol = read_volume_nifti(a.in);
    SegmentationMask mask = kmeans_segment(vol, a.k, a.seed);
    for (int l = 0; l < mask.label_count(); ++l)
        std::printf("  cluster %d: %lld nodes\n", l, static_cast<long long>(mask.count_of(l)));
    write_nifti(mask, a.out, mask.label_count() <= 256 ? ElementType::u8 : ElementType::i16);
    std::printf("wrote %s\n", a.out.c_str());
    return 0;
}

struct VerifyBoundsArgs {
    std::string out_dir;
    std::string kernel = "trilinear";
    int size = 32;
    int probes = 10000;
    std::uint64_t seed = kDefaultSeed;
};

int run_verify_bounds(const VerifyBoundsArgs& a) {
    std::printf("seed: %llu\n", static_cast<unsigned long long>(a.seed));
    const GridSpec spec = GridSpec::cube(0.0, 1.0, a.size);
    const BasisKernel kernel = BasisKernel::by_name(a.kernel, 1.0);

    std::vector<BoundTestField> fields = standard_lipschitz_fields();
    fields.push_back(plane_step_field(0.5037));

    json rows = json::array();
    bool all_pass = true;
    std::printf("%-14s %10s %10s %10s %12s %12s %12s %12s  %s\n", "field", "K", "D", "delta*",
                "bound_glob", "sup_glob", "bound_int", "sup_int", "verdict");
    for (const BoundTestField& field : fields) {
        BoundReport r = verify_error_bound(spec, kernel, field.f, field.segment_of, field.model,
                                           a.probes, a.seed);
        bool pass = r.pass_global && r.pass_interior;
        all_pass = all_pass && pass;
        std::printf("%-14s %10s %10s %10s %12s %12s %12s %12s  %s\n", field.name.c_str(),
                    fmt6(field.model.lipschitz_K).c_str(), fmt6(field.model.aggregated_D).c_str(),
                    fmt6(r.delta_star).c_str(), fmt6(r.bound_global).c_str(),
                    fmt6(r.sup_error_global).c_str(), fmt6(r.bound_interior).c_str(),
                    fmt6(r.sup_error_interior).c_str(), pass ? "pass" : "FAIL");
        rows.push_back({{"field", field.name},
                        {"lipschitz_K", field.model.lipschitz_K},
                        {"jump_D", field.model.aggregated_D},
                        {"delta_star", r.delta_star},
                        {"bound_global", r.bound_global},
                        {"sup_error_global", r.sup_error_global},
                        {"bound_interior", r.bound_interior},
                        {"sup_error_interior", r.sup_error_interior},
                        {"probe_total", r.probe_total},
                        {"probe_interior", r.probe_interior},
                        {"pass", pass}});
    }

    if (!a.out_dir.empty()) {
        std::filesystem::path dir(a.out_dir);
        std::filesystem::create_directories(dir);
        json j{{"config",
                {{"size", a.size},
                 {"probes", a.probes},
                 {"kernel", a.kernel},
                 {"seed", a.seed}}},
               {"fields", rows},
               {"all_pass", all_pass}};
        write_text(dir / "bounds.json", j.dump(2) + "\n");
        std::printf("wrote %s\n", (dir / "bounds.json").string().c_str());
    }
    if (!all_pass) {
        std::cerr << "error: an interpolation error exceeded its continuity bound\n";
        return 4;
    }
    return 0;
}

void print_experiment1(const Experiment1Result& r, const std::string& out_dir) {
    std::printf("seed: %llu\n", static_cast<unsigned long long>(r.params.seed));
    std::printf("%7s %11s %12s %11s %14s %11s %14s\n", "segment", "reference", "count",
                "plain_mean", "plain_abs_err", "fake_mean", "fake_abs_err");
    for (const Experiment1Row& row : r.rows) {
        if (row.voxel_count > 0)
            std::printf("%7d %11s %12lld %11s %14s %11s %14s\n", row.label,
                        fmt6(row.reference).c_str(), static_cast<long long>(row.voxel_count),
                        fmt6(row.plain_mean).c_str(), fmt6(row.plain_abs_error).c_str(),
                        fmt6(row.fake_mean).c_str(), fmt6(row.fake_abs_error).c_str());
        else
            std::printf("%7d %11s %12lld %11s %14s %11s %14s\n", row.label,
                        fmt6(row.reference).c_str(), 0LL, "-", "-", "-", "-");
    }
    std::printf("fake max abs error: %s (%s ceiling 1e-3)\n", fmt6(r.fake_max_abs_error).c_str(),
                r.fake_below_ceiling ? "meets" : "exceeds");
    std::printf("fake at least 50x below plain off background: %s\n",
                r.fake_ratio_ok ? "yes" : "NO");
    if (r.reference_band_evaluated)
        std::printf("plain errors within 30%% of published 128->256 values: %s\n",
                    r.reference_band_ok ? "yes" : "NO");
    for (const StageTiming& t : r.timings)
        std::printf("  %-16s %8.3f s\n", t.stage.c_str(), t.seconds);
    std::printf("wrote %s/report.json, report.csv, timing.json\n", out_dir.c_str());
}

void print_experiment2(const Experiment2Result& r, const std::string& out_dir) {
    std::printf("seed: %llu, trials: %d, true ratio: %s\n",
                static_cast<unsigned long long>(r.params.seed), r.params.trials,
                fmt6(r.true_ratio).c_str());
    std::printf("mean |ratio error|: plain %s, fake %s\n", fmt6(r.plain_mean_abs_error).c_str(),
                fmt6(r.fake_mean_abs_error).c_str());
    std::printf("welch t = %s, p = %s, df = %s\n", fmt6(r.ttest.t).c_str(),
                fmt6(r.ttest.p).c_str(), fmt6(r.ttest.df).c_str());
    std::printf("fake strictly better: %s; significant at 0.05: %s\n",
                r.fake_strictly_better ? "yes" : "NO", r.significant ? "yes" : "NO");
    for (const StageTiming& t : r.timings)
        std::printf("  %-16s %8.3f s\n", t.stage.c_str(), t.seconds);
    std::printf("wrote %s/report.json, report.csv, groups.csv, timing.json\n", out_dir.c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Volumetric resampling with segment-aware oversampling"};
    app.require_subcommand(1);

    PhantomArgs pa;
    CLI::App* phantom = app.add_subcommand("phantom", "Generate a phantom volume and its mask");
    phantom->add_option("-o,--out", pa.out, "Output prefix ({out}_vol.nii, {out}_mask.nii)")
        ->required();
    phantom->add_option("--kind", pa.kind, "Phantom family")
        ->check(CLI::IsMember({"shepp", "two-compartment", "file"}));
    phantom->add_option("--definition", pa.definition, "Ellipsoid description file for --kind file");
    phantom->add_option("--size", pa.size, "Nodes per axis")->capture_default_str();
    phantom->add_option("--hot", pa.hot, "Sphere value (two-compartment)")->capture_default_str();
    phantom->add_option("--cold", pa.cold, "Compartment value (two-compartment)")->capture_default_str();
    phantom->add_option("--radii", pa.radii, "Relative sphere radii (two-compartment)");
    phantom->add_option("--threads", pa.threads, "Worker threads (0 = auto, FAKERES_THREADS)")->capture_default_str();

    ResampleArgs ra;
    CLI::App* resample = app.add_subcommand("resample", "Interpolate a volume onto a finer or coarser grid");
    resample->add_option("-i,--in", ra.in, "Input volume (.nii/.nii.gz)")->required();
    resample->add_option("-o,--out", ra.out, "Output volume path")->required();
    resample->add_option("--target-size", ra.target_size, "Target nodes per axis (one or three)")
        ->required()
        ->expected(1, 3);
    resample->add_option("--mode", ra.mode, "plain or fake")->capture_default_str()
        ->check(CLI::IsMember({"plain", "fake"}));
    resample->add_option("--kernel", ra.kernel, "Interpolation kernel")->capture_default_str()
        ->check(CLI::IsMember({"trilinear", "nearest"}));
    resample->add_option("--mask", ra.mask, "Target-grid segmentation (fake mode)");
    resample->add_option("--mask-low", ra.mask_low, "Source-grid segmentation (optional, fake mode)");
    resample->add_option("--sigma", ra.sigma, "Smoothing sigma in voxels (fake mode)")->capture_default_str();
    resample->add_option("--iterations", ra.iterations, "Smooth-and-restore rounds (fake mode)")->capture_default_str();
    resample->add_option("--fill", ra.fill, "Off-segment block fill (fake mode)")->capture_default_str()
        ->check(CLI::IsMember({"zero", "segment-mean"}));
    resample->add_flag("--skip-empty", ra.skip_empty,
                       "Serve segments without source nodes from the background block");
    resample->add_option("--emit-stack", ra.emit_stack, "Also write the stacked block volume here");
    resample->add_option("--dtype", ra.dtype, "Output element type")->capture_default_str()
        ->check(CLI::IsMember({"u8", "i16", "f32", "f64"}));
    resample->add_option("--threads", ra.threads, "Worker threads (0 = auto, FAKERES_THREADS)")->capture_default_str();

    StatsArgs sa;
    CLI::App* stats = app.add_subcommand("stats", "Per-segment statistics of a volume under a mask");
    stats->add_option("-i,--in", sa.in, "Input volume")->required();
    stats->add_option("--mask", sa.mask, "Segmentation mask")->required();
    stats->add_option("-o,--out-dir", sa.out_dir, "Report directory")->capture_default_str();
    stats->add_option("--references", sa.references, "Expected value per label");
    stats->add_option("--hot", sa.hot, "Hot label for the mean ratio");
    stats->add_option("--cold", sa.cold, "Cold label for the mean ratio");

    KmeansArgs ka;
    CLI::App* kmeans = app.add_subcommand("kmeans", "Intensity k-means segmentation");
    kmeans->add_option("-i,--in", ka.in, "Input volume")->required();
    kmeans->add_option("-o,--out", ka.out, "Output mask path")->required();
    kmeans->add_option("--k", ka.k, "Cluster count")->required();
    kmeans->add_option("--seed", ka.seed, "Random seed")->capture_default_str();

    VerifyBoundsArgs va;
    CLI::App* verify = app.add_subcommand(
        "verify-bounds", "Check interpolation error against continuity-derived bounds");
    verify->add_option("-o,--out-dir", va.out_dir, "Optional report directory");
    verify->add_option("--size", va.size, "Source nodes per axis")->capture_default_str();
    verify->add_option("--probes", va.probes, "Probe count per field")->capture_default_str();
    verify->add_option("--kernel", va.kernel, "Interpolation kernel")->capture_default_str()
        ->check(CLI::IsMember({"trilinear", "nearest"}));
    verify->add_option("--seed", va.seed, "Random seed")->capture_default_str();

    Experiment1Params e1;
    std::string e1_out;
    CLI::App* exp1 = app.add_subcommand(
        "experiment1", "Head-phantom oversampling comparison (plain vs segment-aware)");
    exp1->add_option("-o,--out-dir", e1_out, "Report directory")->required();
    exp1->add_option("--size-lo", e1.size_lo, "Source nodes per axis")->capture_default_str();
    exp1->add_option("--size-hi", e1.size_hi, "Target nodes per axis")->capture_default_str();
    std::string e1_kernel = "trilinear", e1_fill = "segment-mean";
    exp1->add_option("--kernel", e1_kernel, "Interpolation kernel")->capture_default_str()
        ->check(CLI::IsMember({"trilinear", "nearest"}));
    exp1->add_option("--sigma", e1.smoothing_sigma, "Smoothing sigma in voxels")->capture_default_str();
    exp1->add_option("--iterations", e1.smoothing_iterations, "Smooth-and-restore rounds")->capture_default_str();
    exp1->add_option("--fill", e1_fill, "Off-segment block fill")->capture_default_str()
        ->check(CLI::IsMember({"zero", "segment-mean"}));
    exp1->add_flag("--skip-empty,!--no-skip-empty", e1.skip_empty,
                   "Serve segments without source nodes from the background block");
    exp1->add_option("--seed", e1.seed, "Random seed (echoed in the report)")->capture_default_str();
    exp1->add_option("--threads", e1.threads, "Worker threads (0 = auto, FAKERES_THREADS)")->capture_default_str();

    Experiment2Params e2;
    std::string e2_out;
    CLI::App* exp2 = app.add_subcommand(
        "experiment2-surrogate",
        "Hot-to-cold ratio recovery on noisy blurred scans of a two-compartment phantom");
    exp2->add_option("-o,--out-dir", e2_out, "Report directory")->required();
    exp2->add_option("--size-lo", e2.size_lo, "Scan nodes per axis")->capture_default_str();
    exp2->add_option("--size-hi", e2.size_hi, "Truth nodes per axis")->capture_default_str();
    exp2->add_option("--blur-fwhm", e2.blur_fwhm, "Scanner blur FWHM in physical units")->capture_default_str();
    exp2->add_option("--noise-sigma", e2.noise_sigma, "Additive noise sigma")->capture_default_str();
    exp2->add_option("--trials", e2.trials, "Seeded trials")->capture_default_str();
    exp2->add_option("--hot", e2.hot_value, "Sphere value")->capture_default_str();
    exp2->add_option("--cold", e2.cold_value, "Compartment value")->capture_default_str();
    exp2->add_option("--radii", e2.sphere_radii, "Relative sphere radii");
    std::string e2_kernel = "trilinear", e2_fill = "segment-mean";
    exp2->add_option("--kernel", e2_kernel, "Interpolation kernel")->capture_default_str()
        ->check(CLI::IsMember({"trilinear", "nearest"}));
    exp2->add_option("--sigma", e2.smoothing_sigma, "Smoothing sigma in voxels")->capture_default_str();
    exp2->add_option("--iterations", e2.smoothing_iterations, "Smooth-and-restore rounds")->capture_default_str();
    exp2->add_option("--fill", e2_fill, "Off-segment block fill")->capture_default_str()
        ->check(CLI::IsMember({"zero", "segment-mean"}));
    exp2->add_option("--seed", e2.seed, "Random seed")->capture_default_str();
    exp2->add_option("--threads", e2.threads, "Worker threads (0 = auto, FAKERES_THREADS)")->capture_default_str();

    int rc = 0;
    phantom->callback([&] { rc = run_phantom(pa); });
    resample->callback([&] { rc = run_resample(ra); });
    stats->callback([&] { rc = run_stats(sa); });
    kmeans->callback([&] { rc = run_kmeans(ka); });
    verify->callback([&] { rc = run_verify_bounds(va); });
    exp1->callback([&] {
        e1.kernel = kernel_by_cli_name(e1_kernel);
        e1.fill = fill_by_cli_name(e1_fill);
        Experiment1Result r = run_experiment1(e1);
        write_experiment1_report(r, e1_out);
        print_experiment1(r, e1_out);
    });
    exp2->callback([&] {
        e2.kernel = kernel_by_cli_name(e2_kernel);
        e2.fill = fill_by_cli_name(e2_fill);
        Experiment2Result r = run_experiment2(e2);
        write_experiment2_report(r, e2_out);
        print_experiment2(r, e2_out);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const usage_error& e) {
        std::cerr << "error: " << e.what() << "\nRun with --help for usage.\n";
        return 2;
    } catch (const empty_segment_error& e) {
        std::cerr << "error: " << e.what()
                  << " (pass --skip-empty to serve empty segments from the background block)\n";
        return 3;
    } catch (const numeric_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const toolkit_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
