// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "endovqa/blackmask.hpp"
#include "endovqa/commands.hpp"
#include "endovqa/dataprep.hpp"
#include "endovqa/fusion.hpp"
#include "endovqa/highlight.hpp"
#include "endovqa/image_io.hpp"
#include "endovqa/inpaint.hpp"
#include "endovqa/metrics.hpp"
#include "support/synthetic.hpp"

using namespace endovqa;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

double sorted_median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome zscore_oracle() {
    Outcome o;
    std::mt19937_64 rng(1001);
    std::uniform_int_distribution<int> len(1, 50), val(1, 1000000);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> a(static_cast<std::size_t>(len(rng)));
        for (auto& v : a) v = val(rng);
        const double med = sorted_median(a);
        std::vector<double> dev;
        for (double v : a) dev.push_back(std::abs(v - med));
        const double mad = sorted_median(dev);
        const auto got = highlight::modified_z_scores(a);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (mad == 0.0) {
                o.require(got[i] == (dev[i] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity()), "MAD=0 rule");
            } else {
                const double want = dev[i] / mad;
                o.require(std::abs(got[i] - want) <= 1e-9 * std::max(want, 1e-300) || got[i] == want,
                          "relative error above 1e-9");
            }
        }
    }
    const auto same = highlight::modified_z_scores(std::vector<double>{7, 7, 7, 7});
    o.require(std::all_of(same.begin(), same.end(), [](double s) { return s == 0.0; }), "all-equal case");
    return o;
}

Outcome highlight_pipeline() {
    Outcome o;
    const auto scene = synth::three_dot_scene(true);
    const auto det = highlight::detect_highlights(scene);
    const auto dots = synth::three_dot_mask();
    o.require(det.contours.size() == 4, "expected four post-dilation contours");
    o.require(det.hard == dots, "hard mask is not exactly the three dots");
    const auto out = inpaint::remove_highlights(scene);
    const auto oracle = synth::diffusion_fill(scene, dots);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            if (dots.at(x, y)) {
                o.require(std::abs(out.at(x, y) - 100) <= 3, "dot not within 3 of background");
                o.require(std::abs(out.at(x, y) - oracle[static_cast<std::size_t>(y) * 32 + x]) <= 3.0,
                          "dot not within 3 of diffusion oracle");
            }
    return o;
}

Outcome telea_identities() {
    Outcome o;
    std::mt19937_64 rng(3);
    const auto img = synth::random_image(rng, 16, 16, 3);
    o.require(inpaint::telea_inpaint(img, BinaryMask(16, 16), 5) == img, "empty mask is not identity");

    RasterImage flat(9, 9, 3, 137);
    BinaryMask one(9, 9);
    one.set(4, 4, true);
    flat.at(4, 4, 1) = 3;
    const auto f = inpaint::telea_inpaint(flat, one, 5);
    for (int c = 0; c < 3; ++c) o.require(f.at(4, 4, c) == 137, "uniform field not reproduced exactly");

    RasterImage ramp(9, 9, 1);
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 9; ++x) ramp.at(x, y) = static_cast<std::uint8_t>(10 * x);
    const auto oracle = synth::diffusion_fill(ramp, one);
    const auto r = inpaint::telea_inpaint(ramp, one, 5);
    o.require(std::abs(r.at(4, 4) - oracle[4 * 9 + 4]) <= 2.0, "ramp fill off the diffusion oracle by more than 2");
    return o;
}

Outcome blackmask_geometry() {
    Outcome o;
    using blackmask::BorderWidths;
    o.require(blackmask::detect_border_widths(synth::framed_image(64, 64, {0, 0, 0, 0})) == BorderWidths{0, 0, 0, 0},
              "borderless");
    o.require(blackmask::detect_border_widths(synth::framed_image(64, 64, {6, 6, 6, 6})) == BorderWidths{6, 6, 6, 6},
              "6-px frame");
    o.require(blackmask::detect_border_widths(synth::framed_image(64, 64, {10, 0, 0, 0})) ==
                  BorderWidths{10, 0, 0, 0},
              "10-px left band");

    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> sig(1.0001, 2.5);
    int configs = 0;
    while (configs < 1000) {
        const int w = 8 + static_cast<int>(rng() % 57), h = 8 + static_cast<int>(rng() % 57);
        const BorderWidths b{static_cast<int>(rng() % (w / 3)), static_cast<int>(rng() % (h / 3)),
                             static_cast<int>(rng() % (w / 3)), static_cast<int>(rng() % (h / 3))};
        const double sigma = sig(rng);
        BinaryMask want(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const bool rect = x >= b.left + 2 && x <= w - 1 - b.right - 2 && y >= b.top + 2 &&
                                  y <= h - 1 - b.bottom - 2;
                const double dx = x - w / 2.0, dy = y - h / 2.0, r = (h / 2.0) * sigma;
                want.set(x, y, !(rect && dx * dx + dy * dy <= r * r));
            }
        if (want.count() == want.size()) continue;
        o.require(blackmask::build_artificial_mask(w, h, b, sigma) == want, "artificial mask differs from brute force");
        ++configs;
    }
    return o;
}

Outcome counting_laws() {
    Outcome o;
    const auto& q = dataprep::standard_questions();
    const auto single = dataprep::stratified_split(synth::manifest({2000}), 2022);
    o.require(single.train.size() == 1600 && single.val.size() == 200 && single.test.size() == 200, "1600/200/200");
    o.require(dataprep::expand_qa(synth::manifest({1}), q).size() == 18, "18 records per image");
    o.require(dataprep::expand_qa(single.train, q).size() == 28800, "28,800 training records");
    o.require(dataprep::expand_qa(single.val, q).size() == 3600, "3,600 validation records");
    o.require(dataprep::expand_qa(single.test, q).size() == 3600, "3,600 test records");

    const std::vector<std::size_t> sizes = {731, 402, 388, 250, 117, 77, 35};
    const auto multi = dataprep::stratified_split(synth::manifest(sizes), 7);
    std::map<std::string, std::array<double, 3>> counts;
    for (const auto& e : multi.train) counts[e.abnormality][0] += 1;
    for (const auto& e : multi.val) counts[e.abnormality][1] += 1;
    for (const auto& e : multi.test) counts[e.abnormality][2] += 1;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        const auto& got = counts["class" + std::to_string(c)];
        const double n = static_cast<double>(sizes[c]);
        o.require(std::abs(got[0] - 0.8 * n) <= 1 && std::abs(got[1] - 0.1 * n) <= 1 && std::abs(got[2] - 0.1 * n) <= 1,
                  "per-class proportion off by more than 1");
    }
    return o;
}

Outcome trainer_numerics() {
    Outcome o;
    std::mt19937_64 rng(66);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 3; ++trial) {
        auto model = fusion::FusionModel::initialized(5, 10 + trial, 16, 12);
        std::vector<fusion::Sample> batch(6);
        for (auto& s : batch) {
            s.input.resize(12);
            for (auto& v : s.input) v = u(rng);
            s.target.resize(5);
            for (auto& t : s.target) t = rng() % 2;
        }
        const auto lg = fusion::loss_and_gradient(model, batch);
        auto params = model.params.tensors();
        const auto grads = lg.grad.tensors();
        double worst = 0.0;
        for (std::size_t t = 0; t < 4; ++t)
            for (std::size_t i = 0; i < params[t].size(); ++i) {
                const double keep = params[t][i], h = 1e-4;
                params[t][i] = keep + h;
                const double up = fusion::loss_and_gradient(model, batch).loss;
                params[t][i] = keep - h;
                const double down = fusion::loss_and_gradient(model, batch).loss;
                params[t][i] = keep;
                const double fd = (up - down) / (2 * h);
                worst = std::max(worst, std::abs(fd - grads[t][i]) / std::max(1e-6, std::abs(fd) + std::abs(grads[t][i])));
            }
        o.require(worst < 1e-4, "gradient relative error " + std::to_string(worst));
    }

    for (double z = -20.0; z <= 20.0; z += 1.0 / 64)
        for (double y : {0.0, 0.5, 1.0}) {
            const double s = 1.0 / (1.0 + std::exp(-z));
            const double naive = -(y * std::log(s) + (1 - y) * std::log(1 - s));
            o.require(std::abs(fusion::bce_with_logits(std::vector<double>{z}, std::vector<double>{y}) - naive) < 1e-6,
                      "stable loss differs from naive");
        }
    for (double z : {-1e4, 1e4})
        for (double y : {0.0, 1.0})
            o.require(std::isfinite(fusion::bce_with_logits(std::vector<double>{z}, std::vector<double>{y})),
                      "loss not finite at |z|=1e4");

    const double expect[15] = {5e-5,    4.6665e-5, 4.333e-5, 3.9995e-5, 3.666e-5, 3.3325e-5, 2.999e-5, 2.6655e-5,
                               2.332e-5, 1.9985e-5, 1.665e-5, 1.3315e-5, 9.98e-6,  6.645e-6,  3.31e-6};
    const fusion::TrainConfig cfg;
    for (int e = 0; e < 15; ++e) {
        const double lr = fusion::lr_schedule(e, cfg);
        o.require(std::abs(lr - expect[e]) <= 1e-14 * expect[e], "lr schedule at epoch " + std::to_string(e));
    }
    return o;
}

Outcome desk_scale_learning() {
    Outcome o;
    const auto task = synth::separable_task(500, 200, 2024);
    const fusion::TrainConfig cfg;
    const auto model = fusion::FusionModel::initialized(static_cast<int>(task.vocab.size()), cfg.seed + 1);
    const auto a = fusion::train(model, task.train, task.val, cfg);
    const auto b = fusion::train(model, task.train, task.val, cfg);
    const double f1 = a.history[static_cast<std::size_t>(a.best_epoch)].val.f1;
    o.require(f1 >= 0.95, "best validation F1 " + std::to_string(f1));
    o.require(a.history == b.history && a.best == b.best, "reruns differ");
    o.detail = o.ok ? "best F1 " + std::to_string(f1) + " at epoch " + std::to_string(a.best_epoch) : o.detail;
    return o;
}

Outcome metrics_oracle() {
    Outcome o;
    std::mt19937_64 rng(88);
    std::vector<metrics::ScoredSample> samples;
    double sp = 0, sr = 0, sf = 0, se = 0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n = 1 + rng() % 10;
        dataprep::LabelVector t(n), p(n);
        for (std::size_t k = 0; k < n; ++k) {
            t[k] = rng() % 3 == 0;
            p[k] = rng() % 3 == 0;
        }
        double tp = 0, nt = 0, np = 0;
        for (std::size_t k = 0; k < n; ++k) {
            tp += t[k] && p[k];
            nt += t[k];
            np += p[k];
        }
        double P, R;
        if (nt == 0 && np == 0) {
            P = R = 1;
        } else {
            P = np ? tp / np : 0;
            R = nt ? tp / nt : 0;
        }
        const double F = P + R > 0 ? 2 * P * R / (P + R) : 0;
        const double E = t == p;
        const auto s = metrics::sample_score(t, p);
        o.require(std::abs(s.precision - P) <= 1e-12 && std::abs(s.recall - R) <= 1e-12 && std::abs(s.f1 - F) <= 1e-12 &&
                      s.exact_match == E,
                  "sample score differs from brute force");
        sp += P, sr += R, sf += F, se += E;
        samples.push_back({static_cast<int>(rng() % 18), s});
    }
    const auto rep = metrics::aggregate(samples);
    o.require(std::abs(rep.overall.precision - sp / 1000) <= 1e-12 && std::abs(rep.overall.recall - sr / 1000) <= 1e-12 &&
                  std::abs(rep.overall.f1 - sf / 1000) <= 1e-12 && std::abs(rep.overall.accuracy - se / 1000) <= 1e-12,
              "aggregate differs from brute force");
    double wf = 0, wp = 0;
    for (const auto& [q, row] : rep.per_question) {
        wf += row.f1 * static_cast<double>(row.count);
        wp += row.precision * static_cast<double>(row.count);
    }
    o.require(std::abs(wf / 1000 - rep.overall.f1) <= 1e-12 && std::abs(wp / 1000 - rep.overall.precision) <= 1e-12,
              "per-question rows do not re-aggregate");

    const auto& qs = dataprep::standard_questions();
    const std::vector<std::string> names(qs.begin(), qs.end());
    std::istringstream table(metrics::format_table(rep, names));
    std::vector<std::string> lines;
    for (std::string l; std::getline(table, l);) lines.push_back(l);
    o.require(lines.size() == 1 + 18 + 1, "table should have header + 18 question rows + All");
    o.require(!lines.empty() && lines.back().rfind("All", 0) == 0, "last row is not All");
    return o;
}

Outcome parallel_determinism() {
    Outcome o;
    const fs::path root = fs::temp_directory_path() / "endovqa_acceptance_enhance";
    fs::remove_all(root);
    fs::create_directories(root / "in");
    std::mt19937_64 rng(909);
    for (int i = 0; i < 20; ++i) {
        auto img = synth::three_dot_scene(i % 3 == 0, i % 7, 64, 3);
        const int b = 4 + i % 5;
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x) {
                for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<std::uint8_t>(std::min(255, img.at(x, y, c) + int(rng() % 9)));
                if (x < b || y < b || x >= 64 - b || y >= 64 - b)
                    for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<std::uint8_t>(rng() % 5);
            }
        save_image(img, root / "in" / ("frame_" + std::to_string(i) + ".png"));
    }
    std::ostringstream sink;
    const std::vector<std::string> one = {"endovqa", "enhance", "--in", (root / "in").string(), "--out",
                                          (root / "serial").string(), "--jobs", "1"};
    const std::vector<std::string> four = {"endovqa", "enhance", "--in", (root / "in").string(), "--out",
                                           (root / "parallel").string(), "--jobs", "4"};
    o.require(cli::run(one, sink, sink) == 0, "serial run failed");
    o.require(cli::run(four, sink, sink) == 0, "parallel run failed");
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    for (int i = 0; i < 20; ++i) {
        const std::string name = "frame_" + std::to_string(i) + ".png";
        const auto a = slurp(root / "serial" / name);
        o.require(!a.empty() && a == slurp(root / "parallel" / name), "bytes differ for " + name);
    }
    fs::remove_all(root);
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {1, "modified z-score matches brute-force median/MAD", 1.0, zscore_oracle},
        {2, "highlight pipeline on the three-dot + block synthetic", 1.0, highlight_pipeline},
        {3, "Telea identities and ramp fill", 1.0, telea_identities},
        {4, "black-mask border widths and artificial mask geometry", 2.0, blackmask_geometry},
        {5, "split and QA counting laws", 1.0, counting_laws},
        {6, "trainer gradients, stable loss and lr schedule", 10.0, trainer_numerics},
        {7, "desk-scale learning on the separable synthetic", 30.0, desk_scale_learning},
        {8, "metrics oracle, decomposition and report layout", 1.0, metrics_oracle},
        {9, "enhance with 4 workers matches 1 worker byte for byte", 10.0, parallel_determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.ok = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (out.ok && secs > c.limit_s) {
            out.ok = false;
            out.detail = "runtime over " + std::to_string(c.limit_s) + " s";
        }
        failed += !out.ok;
        std::printf("%s criterion %d: %s (%.3f s)%s%s\n", out.ok ? "PASS" : "FAIL", c.id, c.name, secs,
                    out.detail.empty() ? "" : " - ", out.detail.c_str());
    }
    std::printf("%d of 9 criteria passed\n", 9 - failed);
    return failed ? 1 : 0;
}
