#include "fakeres/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <string>

#include "fakeres/errors.hpp"
#include "fakeres/numerics.hpp"
#include "fakeres/resample.hpp"

namespace fakeres {

namespace {

// Regularized incomplete beta I_x(a, b) by the standard continued fraction
// (DLMF 8.17.22), evaluated with the modified Lentz scheme.
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 400;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;
    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny)
        d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny)
            d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny)
            d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps)
            break;
    }
    return h;
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0)
        return 0.0;
    if (x >= 1.0)
        return 1.0;
    double ln_prefactor = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
    double prefactor = std::exp(ln_prefactor);
    if (x < (a + 1.0) / (a + b + 2.0))
        return prefactor * beta_continued_fraction(a, b, x) / a;
    return 1.0 - prefactor * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double compensated_mean(std::span<const double> xs) {
    CompensatedSum s;
    for (double x : xs)
        s.add(x);
    return s.value() / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs, double mean) {
    CompensatedSum s;
    for (double x : xs)
        s.add((x - mean) * (x - mean));
    return s.value() / static_cast<double>(xs.size() - 1);
}

double max_norm(const vec3& v) {
    return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
}

vec3 random_point(std::mt19937_64& g, const Domain& dom) {
    return {uniform_in(g, dom.lower[0], dom.upper[0]),
            uniform_in(g, dom.lower[1], dom.upper[1]),
            uniform_in(g, dom.lower[2], dom.upper[2])};
}

int checked_segment(const SegmentField& segment_of, const vec3& x, int label_count) {
    int s = segment_of(x);
    if (s < 0 || s >= label_count)
        throw input_error("segment field returned label " + std::to_string(s) +
                          " outside [0, " + std::to_string(label_count) + ")");
    return s;
}

// Scans face-adjacent node pairs with differing labels and records the
// largest value difference per label pair into the dense jump matrix.
void collect_jumps(const SegmentationMask& mask,
                   const std::function<double(int, int, int)>& value_at,
                   std::vector<double>& jump) {
    const index3& shape = mask.shape();
    const int S = mask.label_count();
    auto update = [&](int la, int lb, double diff) {
        double& fwd = jump[static_cast<std::size_t>(la) * S + lb];
        double& bwd = jump[static_cast<std::size_t>(lb) * S + la];
        if (diff > fwd)
            fwd = bwd = diff;
    };
    for (int k = 1; k <= shape[2]; ++k)
        for (int j = 1; j <= shape[1]; ++j)
            for (int i = 1; i <= shape[0]; ++i) {
                int la = mask.at(i, j, k);
                if (i < shape[0]) {
                    int lb = mask.at(i + 1, j, k);
                    if (la != lb)
                        update(la, lb, std::abs(value_at(i, j, k) - value_at(i + 1, j, k)));
                }
                if (j < shape[1]) {
                    int lb = mask.at(i, j + 1, k);
                    if (la != lb)
                        update(la, lb, std::abs(value_at(i, j, k) - value_at(i, j + 1, k)));
                }
                if (k < shape[2]) {
                    int lb = mask.at(i, j, k + 1);
                    if (la != lb)
                        update(la, lb, std::abs(value_at(i, j, k) - value_at(i, j, k + 1)));
                }
            }
}

} // namespace

SegmentStats segment_stats(const VolumeGrid& volume, const SegmentationMask& mask,
                           std::span<const double> references) {
    if (!(volume.spec() == mask.spec()))
        throw input_error("statistics need the volume and segmentation on one grid");
    const int S = mask.label_count();
    if (!references.empty() && static_cast<int>(references.size()) != S)
        throw input_error("got " + std::to_string(references.size()) +
                          " reference values for " + std::to_string(S) + " labels");

    std::vector<CompensatedSum> sums(static_cast<std::size_t>(S));
    std::vector<std::int64_t> counts(static_cast<std::size_t>(S), 0);
    std::vector<double> mins(static_cast<std::size_t>(S),
                             std::numeric_limits<double>::infinity());
    std::vector<double> maxs(static_cast<std::size_t>(S),
                             -std::numeric_limits<double>::infinity());
    std::vector<std::vector<double>> per_label(static_cast<std::size_t>(S));

    std::span<const double> vals = volume.values();
    std::span<const std::int32_t> labels = mask.labels();
    for (std::size_t idx = 0; idx < vals.size(); ++idx) {
        std::size_t l = static_cast<std::size_t>(labels[idx]);
        double v = vals[idx];
        sums[l].add(v);
        ++counts[l];
        mins[l] = std::min(mins[l], v);
        maxs[l] = std::max(maxs[l], v);
        per_label[l].push_back(v);
    }

    SegmentStats out;
    out.labels.resize(static_cast<std::size_t>(S));
    for (int l = 0; l < S; ++l) {
        LabelStats& st = out.labels[static_cast<std::size_t>(l)];
        st.label = l;
        st.voxel_count = counts[static_cast<std::size_t>(l)];
        if (!references.empty())
            st.reference = references[static_cast<std::size_t>(l)];
        if (st.voxel_count == 0)
            continue;
        st.mean = sums[static_cast<std::size_t>(l)].value() /
                  static_cast<double>(st.voxel_count);
        st.min = mins[static_cast<std::size_t>(l)];
        st.max = maxs[static_cast<std::size_t>(l)];
        std::vector<double>& vs = per_label[static_cast<std::size_t>(l)];
        std::size_t mid = vs.size() / 2;
        std::nth_element(vs.begin(), vs.begin() + mid, vs.end());
        double median = vs[mid];
        if (vs.size() % 2 == 0) {
            double lower = *std::max_element(vs.begin(), vs.begin() + mid);
            median = 0.5 * (lower + median);
        }
        st.median = median;
        if (st.reference)
            st.abs_error = std::abs(*st.mean - *st.reference);
    }
    return out;
}

double fbr(const VolumeGrid& volume, const SegmentationMask& mask, int hot_label,
           int cold_label) {
    if (!(volume.spec() == mask.spec()))
        throw input_error("ratio needs the volume and segmentation on one grid");
    const int S = mask.label_count();
    if (hot_label < 0 || hot_label >= S || cold_label < 0 || cold_label >= S)
        throw input_error("hot/cold labels must lie in [0, " + std::to_string(S) + ")");

    CompensatedSum hot_sum, cold_sum;
    std::int64_t hot_n = 0, cold_n = 0;
    std::span<const double> vals = volume.values();
    std::span<const std::int32_t> labels = mask.labels();
    // Independent tests so hot_label == cold_label degenerates to ratio 1.
    for (std::size_t idx = 0; idx < vals.size(); ++idx) {
        if (labels[idx] == hot_label) {
            hot_sum.add(vals[idx]);
            ++hot_n;
        }
        if (labels[idx] == cold_label) {
            cold_sum.add(vals[idx]);
            ++cold_n;
        }
    }
    if (hot_n == 0)
        throw empty_segment_error(hot_label, "hot segment " + std::to_string(hot_label) +
                                                 " has no node");
    if (cold_n == 0)
        throw empty_segment_error(cold_label, "cold segment " + std::to_string(cold_label) +
                                                  " has no node");
    double cold_mean = cold_sum.value() / static_cast<double>(cold_n);
    if (cold_mean == 0.0)
        throw numeric_error("cold segment mean is zero; the ratio is undefined");
    double hot_mean = hot_sum.value() / static_cast<double>(hot_n);
    return hot_mean / cold_mean;
}

SegmentationMask kmeans_segment(const VolumeGrid& volume, int k, std::uint64_t seed) {
    if (k < 2)
        throw parameter_error("k-means needs k >= 2, got " + std::to_string(k));
    std::span<const double> raw = volume.values();
    std::vector<double> sorted(raw.begin(), raw.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    std::vector<double> uniq;
    for (double v : sorted)
        if (uniq.empty() || v != uniq.back())
            uniq.push_back(v);
    if (static_cast<int>(uniq.size()) < k)
        throw clustering_error("volume has " + std::to_string(uniq.size()) +
                               " distinct values, fewer than k = " + std::to_string(k));

    // Farthest-point initialization on the distinct values: first centroid is
    // a seeded draw, each next one maximizes the distance to the chosen set
    // (first candidate wins ties, so the result is seed-deterministic).
    std::mt19937_64 gen(seed);
    std::vector<double> centroids;
    centroids.push_back(sorted[static_cast<std::size_t>(gen() % n)]);
    while (static_cast<int>(centroids.size()) < k) {
        double best_val = uniq.front();
        double best_dist = -1.0;
        for (double u : uniq) {
            double dist = std::numeric_limits<double>::infinity();
            for (double c : centroids)
                dist = std::min(dist, std::abs(u - c));
            if (dist > best_dist) {
                best_dist = dist;
                best_val = u;
            }
        }
        centroids.push_back(best_val);
    }
    std::sort(centroids.begin(), centroids.end());

    // Prefix sums in extended precision make cluster means cheap and stable.
    std::vector<long double> prefix(n + 1, 0.0L);
    for (std::size_t i = 0; i < n; ++i)
        prefix[i + 1] = prefix[i] + static_cast<long double>(sorted[i]);

    std::vector<double> midpoints(static_cast<std::size_t>(k - 1));
    for (int iter = 0; iter < 300; ++iter) {
        for (int j = 0; j + 1 < k; ++j)
            midpoints[static_cast<std::size_t>(j)] =
                0.5 * (centroids[static_cast<std::size_t>(j)] +
                       centroids[static_cast<std::size_t>(j + 1)]);
        double movement = 0.0;
        std::size_t left = 0;
        for (int j = 0; j < k; ++j) {
            std::size_t right =
                j + 1 < k
                    ? static_cast<std::size_t>(
                          std::upper_bound(sorted.begin(), sorted.end(),
                                           midpoints[static_cast<std::size_t>(j)]) -
                          sorted.begin())
                    : n;
            double& c = centroids[static_cast<std::size_t>(j)];
            if (right > left) {
                double next = static_cast<double>((prefix[right] - prefix[left]) /
                                                  static_cast<long double>(right - left));
                movement = std::max(movement, std::abs(next - c));
                c = next;
            }
            left = right;
        }
        if (movement < 1e-9)
            break;
    }
    for (int j = 0; j + 1 < k; ++j)
        midpoints[static_cast<std::size_t>(j)] =
            0.5 * (centroids[static_cast<std::size_t>(j)] +
                   centroids[static_cast<std::size_t>(j + 1)]);

    std::vector<std::int32_t> labels(raw.size());
    for (std::size_t idx = 0; idx < raw.size(); ++idx) {
        // Values equal to a midpoint belong to the lower cluster.
        auto it = std::lower_bound(midpoints.begin(), midpoints.end(), raw[idx]);
        labels[idx] = static_cast<std::int32_t>(it - midpoints.begin());
    }
    return SegmentationMask(volume.spec(), k, std::move(labels));
}

TTestResult welch_ttest(std::span<const double> group_a, std::span<const double> group_b) {
    if (group_a.size() < 2 || group_b.size() < 2)
        throw input_error("each group needs at least 2 samples, got " +
                          std::to_string(group_a.size()) + " and " +
                          std::to_string(group_b.size()));
    double na = static_cast<double>(group_a.size());
    double nb = static_cast<double>(group_b.size());
    double ma = compensated_mean(group_a);
    double mb = compensated_mean(group_b);
    double va = sample_variance(group_a, ma);
    double vb = sample_variance(group_b, mb);
    double sea = va / na;
    double seb = vb / nb;
    double se2 = sea + seb;

    TTestResult res;
    if (se2 == 0.0) {
        // Two exactly constant groups: no spread to test against.
        res.df = na + nb - 2.0;
        if (ma == mb) {
            res.t = 0.0;
            res.p = 1.0;
        } else {
            res.t = ma > mb ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
            res.p = 0.0;
        }
        return res;
    }
    res.t = (ma - mb) / std::sqrt(se2);
    res.df = se2 * se2 / (sea * sea / (na - 1.0) + seb * seb / (nb - 1.0));
    double x = res.df / (res.df + res.t * res.t);
    res.p = std::clamp(regularized_incomplete_beta(0.5 * res.df, 0.5, x), 0.0, 1.0);
    return res;
}

double ContinuityModel::jump_at(int i, int j) const {
    if (i < 0 || i >= segment_count || j < 0 || j >= segment_count)
        throw input_error("jump index outside [0, " + std::to_string(segment_count) + ")");
    return jump[static_cast<std::size_t>(i) * segment_count + j];
}

double ContinuityModel::max_pair_jump() const {
    double m = 0.0;
    for (double d : jump)
        m = std::max(m, d);
    return m;
}

ContinuityModel ContinuityModel::aggregate(std::vector<double> segment_k,
                                           std::vector<double> jump) {
    const int S = static_cast<int>(segment_k.size());
    if (S < 1)
        throw input_error("continuity model needs at least one segment");
    if (jump.size() != static_cast<std::size_t>(S) * S)
        throw input_error("jump matrix must be dense " + std::to_string(S) + "x" +
                          std::to_string(S));
    ContinuityModel m;
    m.segment_count = S;
    // Symmetrize and zero the diagonal before aggregating.
    for (int i = 0; i < S; ++i) {
        jump[static_cast<std::size_t>(i) * S + i] = 0.0;
        for (int j = i + 1; j < S; ++j) {
            double d = std::max(jump[static_cast<std::size_t>(i) * S + j],
                                jump[static_cast<std::size_t>(j) * S + i]);
            jump[static_cast<std::size_t>(i) * S + j] = d;
            jump[static_cast<std::size_t>(j) * S + i] = d;
        }
    }
    m.segment_k = std::move(segment_k);
    m.jump = std::move(jump);
    if (S == 1) {
        m.lipschitz_K = m.segment_k[0];
        m.aggregated_D = 0.0;
    } else if (S == 2) {
        m.lipschitz_K = m.segment_k[0] + m.segment_k[1];
        m.aggregated_D = m.jump_at(0, 1);
    } else {
        double kmax = *std::max_element(m.segment_k.begin(), m.segment_k.end());
        m.lipschitz_K = S * kmax;
        m.aggregated_D = S * m.max_pair_jump();
    }
    return m;
}

SegmentField segment_field_from_mask(const SegmentationMask& mask) {
    auto held = std::make_shared<SegmentationMask>(mask);
    return [held](const vec3& p) {
        const GridSpec& spec = held->spec();
        index3 idx;
        for (int d = 0; d < 3; ++d) {
            double lo = spec.domain.lower[d];
            double h = (spec.domain.upper[d] - lo) / (spec.shape[d] - 1);
            int s = static_cast<int>(std::ceil((p[d] - lo) / h - 0.5));
            idx[d] = std::clamp(s + 1, 1, spec.shape[d]);
        }
        return static_cast<int>(held->at(idx[0], idx[1], idx[2]));
    };
}

SegmentField single_segment() {
    return [](const vec3&) { return 0; };
}

ContinuityModel estimate_continuity(const ScalarField& f, const SegmentField& segment_of,
                                    const SegmentationMask& mask, int probe_count,
                                    std::uint64_t seed) {
    if (probe_count < 10)
        throw input_error("continuity estimation needs at least 10 probes, got " +
                          std::to_string(probe_count));
    const GridSpec& spec = mask.spec();
    const int S = mask.label_count();
    vec3 h = spec.spacing();
    std::vector<double> segment_k(static_cast<std::size_t>(S), 0.0);
    std::vector<double> jump(static_cast<std::size_t>(S) * S, 0.0);

    std::mt19937_64 gen(seed);
    const double scales[3] = {1.0, 0.5, 0.25};
    for (int p = 0; p < probe_count; ++p) {
        vec3 x = random_point(gen, spec.domain);
        double scale = scales[p % 3];
        for (int dir = 0; dir < 4; ++dir) {
            vec3 dv{0.0, 0.0, 0.0};
            if (dir < 3) {
                dv[dir] = scale * h[dir];
            } else {
                for (int d = 0; d < 3; ++d)
                    dv[d] = scale * h[d] * (2.0 * uniform01(gen) - 1.0);
                if (dv[0] == 0.0 && dv[1] == 0.0 && dv[2] == 0.0)
                    continue;
            }
            vec3 y{x[0] + dv[0], x[1] + dv[1], x[2] + dv[2]};
            if (!domain_contains(spec.domain, y)) {
                y = {x[0] - dv[0], x[1] - dv[1], x[2] - dv[2]};
                if (!domain_contains(spec.domain, y))
                    continue;
            }
            int a = checked_segment(segment_of, x, S);
            int b = checked_segment(segment_of, y, S);
            if (a != b)
                continue;
            double dist = max_norm({y[0] - x[0], y[1] - x[1], y[2] - x[2]});
            if (dist == 0.0)
                continue;
            double ratio = std::abs(f(x) - f(y)) / dist;
            segment_k[static_cast<std::size_t>(a)] =
                std::max(segment_k[static_cast<std::size_t>(a)], ratio);
        }
    }

    collect_jumps(mask,
                  [&](int i, int j, int k) {
                      return f(node_coordinate(spec, {i, j, k}));
                  },
                  jump);

    ContinuityModel model = ContinuityModel::aggregate(std::move(segment_k), std::move(jump));
    model.delta_star = std::max({h[0], h[1], h[2]});
    return model;
}

ContinuityModel estimate_continuity(const VolumeGrid& volume, const SegmentationMask& mask,
                                    int probe_count, std::uint64_t seed) {
    if (probe_count < 10)
        throw input_error("continuity estimation needs at least 10 probes, got " +
                          std::to_string(probe_count));
    if (!(volume.spec() == mask.spec()))
        throw input_error("continuity estimation needs the volume and mask on one grid");
    const GridSpec& spec = mask.spec();
    const int S = mask.label_count();
    vec3 h = spec.spacing();
    std::vector<double> segment_k(static_cast<std::size_t>(S), 0.0);
    std::vector<double> jump(static_cast<std::size_t>(S) * S, 0.0);

    std::mt19937_64 gen(seed);
    const int steps[3] = {1, 2, 4};
    for (int p = 0; p < probe_count; ++p) {
        index3 idx{1 + static_cast<int>(gen() % static_cast<std::uint64_t>(spec.shape[0])),
                   1 + static_cast<int>(gen() % static_cast<std::uint64_t>(spec.shape[1])),
                   1 + static_cast<int>(gen() % static_cast<std::uint64_t>(spec.shape[2]))};
        int axis = static_cast<int>(gen() % 3);
        int step = steps[p % 3];
        index3 other = idx;
        other[axis] += step;
        if (other[axis] > spec.shape[axis]) {
            other[axis] = idx[axis] - step;
            if (other[axis] < 1)
                continue;
        }
        int la = mask.at(idx[0], idx[1], idx[2]);
        int lb = mask.at(other[0], other[1], other[2]);
        if (la != lb)
            continue;
        double diff = std::abs(volume.at(idx[0], idx[1], idx[2]) -
                               volume.at(other[0], other[1], other[2]));
        double ratio = diff / (step * h[axis]);
        segment_k[static_cast<std::size_t>(la)] =
            std::max(segment_k[static_cast<std::size_t>(la)], ratio);
    }

    collect_jumps(mask, [&](int i, int j, int k) { return volume.at(i, j, k); }, jump);

    ContinuityModel model = ContinuityModel::aggregate(std::move(segment_k), std::move(jump));
    model.delta_star = std::max({h[0], h[1], h[2]});
    return model;
}

BoundReport verify_error_bound(const GridSpec& source, const BasisKernel& kernel,
                               const ScalarField& f, const SegmentField& segment_of,
                               const ContinuityModel& model, int probe_count,
                               std::uint64_t seed, std::span<const vec3> extra_probes) {
    if (probe_count < 0)
        throw parameter_error("probe count must be >= 0");
    vec3 h = source.spacing();

    std::vector<double> samples(static_cast<std::size_t>(source.node_count()));
    std::size_t idx = 0;
    for (int k = 1; k <= source.shape[2]; ++k)
        for (int j = 1; j <= source.shape[1]; ++j)
            for (int i = 1; i <= source.shape[0]; ++i)
                samples[idx++] = f(node_coordinate(source, {i, j, k}));
    VolumeGrid volume(source, std::move(samples));

    double scale = std::max(std::abs(volume.min_value()), std::abs(volume.max_value()));
    double slack = 1e-12 * (1.0 + scale);

    BoundReport report;
    int a = kernel.support_radius_cells();
    report.delta_star = a * std::max({h[0], h[1], h[2]});
    report.bound_interior = model.lipschitz_K * report.delta_star;
    report.bound_global = report.bound_interior + model.aggregated_D;

    const int S = model.segment_count;
    std::mt19937_64 gen(seed);
    auto probe_one = [&](const vec3& x) {
        if (!domain_contains(source.domain, x))
            throw input_error("probe point lies outside the source domain");
        double err = std::abs(eval_point(volume, kernel.kind(), x) - f(x));
        report.sup_error_global = std::max(report.sup_error_global, err);
        ++report.probe_total;

        // Interior means: every node in the interpolation window lies in the
        // probe's own segment, so no jump can enter the interpolant.
        int seg = checked_segment(segment_of, x, S);
        bool interior = true;
        int lo[3], hi[3];
        for (int d = 0; d < 3; ++d) {
            int p = locate_cell_axis(source, d, x[d]);
            lo[d] = std::max(1, p - a + 1);
            hi[d] = std::min(source.shape[d], p + a);
        }
        for (int k = lo[2]; k <= hi[2] && interior; ++k)
            for (int j = lo[1]; j <= hi[1] && interior; ++j)
                for (int i = lo[0]; i <= hi[0] && interior; ++i)
                    if (checked_segment(segment_of, node_coordinate(source, {i, j, k}), S) !=
                        seg)
                        interior = false;
        if (interior) {
            report.sup_error_interior = std::max(report.sup_error_interior, err);
            ++report.probe_interior;
        }
    };

    for (int p = 0; p < probe_count; ++p)
        probe_one(random_point(gen, source.domain));
    for (const vec3& x : extra_probes)
        probe_one(x);

    report.pass_global = report.sup_error_global <= report.bound_global + slack;
    report.pass_interior = report.sup_error_interior <= report.bound_interior + slack;
    return report;
}

} // namespace fakeres
