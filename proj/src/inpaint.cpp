#include "endovqa/inpaint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace endovqa::inpaint {

void InpaintConfig::validate() const {
    if (blur_passes < 1) throw std::invalid_argument("blur_passes must be >= 1");
    if (telea_radius < 1) throw std::invalid_argument("telea_radius must be >= 1");
}

RasterImage initial_restore(const RasterImage& img, const SoftMask& feathered, int passes) {
    if (img.width() != feathered.width() || img.height() != feathered.height()) {
        throw std::invalid_argument("initial_restore: mask and image sizes differ");
    }
    const RasterImage blurred = raster::box_blur_iterated(img, passes);
    RasterImage out = img;
    const int ch = img.channels();
    const auto alpha = feathered.data();
    const auto src = img.data();
    const auto blur = blurred.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        const double a = alpha[i];
        if (a == 0.0) continue;
        for (int c = 0; c < ch; ++c) {
            const std::size_t k = i * ch + c;
            const double v = a * blur[k] + (1.0 - a) * src[k];
            dst[k] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
    }
    return out;
}

namespace {

enum class State : std::uint8_t { Known, Band, Inside };

constexpr double kInf = std::numeric_limits<double>::infinity();

class TeleaSolver {
public:
    TeleaSolver(const RasterImage& img, const BinaryMask& mask, const TeleaOptions& opts)
        : w_(img.width()), h_(img.height()), ch_(img.channels()), opts_(opts),
          state_(img.pixel_count(), State::Known), time_(img.pixel_count(), 0.0),
          value_(img.data().begin(), img.data().end()) {
        for (std::size_t i = 0; i < state_.size(); ++i) {
            if (mask.data()[i]) {
                state_[i] = State::Inside;
                time_[i] = kInf;
            }
        }
    }

    void run(std::vector<FillRecord>* trace) {
        for (int y = 0; y < h_; ++y) {
            for (int x = 0; x < w_; ++x) {
                if (state_[idx(x, y)] == State::Inside) relax(x, y);
            }
        }

        while (!heap_.empty()) {
            const auto [t, i] = heap_.top();
            heap_.pop();
            if (state_[i] == State::Known || t != time_[i]) continue;
            const int x = static_cast<int>(i % static_cast<std::size_t>(w_));
            const int y = static_cast<int>(i / static_cast<std::size_t>(w_));
            FillRecord rec = fill(x, y);
            state_[i] = State::Known;
            if (trace) trace->push_back(rec);
            for (const auto& [dx, dy] : kNeighbours) {
                const int nx = x + dx;
                const int ny = y + dy;
                if (inside_image(nx, ny) && state_[idx(nx, ny)] != State::Known) relax(nx, ny);
            }
        }
    }

    RasterImage result() const {
        RasterImage out(w_, h_, ch_);
        auto dst = out.data();
        for (std::size_t k = 0; k < value_.size(); ++k) {
            dst[k] = static_cast<std::uint8_t>(std::clamp(std::lround(value_[k]), 0L, 255L));
        }
        return out;
    }

private:
    static constexpr std::pair<int, int> kNeighbours[4] = {{0, -1}, {-1, 0}, {1, 0}, {0, 1}};

    // Min-heap on (arrival time, scanline index); stale entries are skipped on pop.
    using Entry = std::pair<double, std::size_t>;
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            return std::tie(a.first, a.second) > std::tie(b.first, b.second);
        }
    };

    std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * w_ + x; }
    bool inside_image(int x, int y) const { return x >= 0 && y >= 0 && x < w_ && y < h_; }

    double known_time(int x, int y) const {
        if (!inside_image(x, y) || state_[idx(x, y)] != State::Known) return kInf;
        return time_[idx(x, y)];
    }

    // First-order upwind eikonal update, minimum over the four quadrants.
    double solve(int x, int y) const {
        double best = kInf;
        for (int sx : {-1, 1}) {
            for (int sy : {-1, 1}) {
                const double a = known_time(x + sx, y);
                const double b = known_time(x, y + sy);
                double sol = kInf;
                if (a < kInf && b < kInf) {
                    const double d = a - b;
                    sol = std::abs(d) >= 1.0 ? 1.0 + std::min(a, b) : 0.5 * (a + b + std::sqrt(2.0 - d * d));
                } else if (a < kInf) {
                    sol = 1.0 + a;
                } else if (b < kInf) {
                    sol = 1.0 + b;
                }
                best = std::min(best, sol);
            }
        }
        return best;
    }

    void relax(int x, int y) {
        const double t = solve(x, y);
        const std::size_t i = idx(x, y);
        if (t < time_[i]) {
            time_[i] = t;
            state_[i] = State::Band;
            heap_.push({t, i});
        }
    }

    // Central difference where both neighbours are usable, one-sided where
    // only one is, zero otherwise.
    static double central(bool lo_ok, bool hi_ok, double lo, double mid, double hi) {
        if (lo_ok && hi_ok) return 0.5 * (hi - lo);
        if (hi_ok) return hi - mid;
        if (lo_ok) return mid - lo;
        return 0.0;
    }

    bool known_at(int x, int y) const { return inside_image(x, y) && state_[idx(x, y)] == State::Known; }

    double pixel(int x, int y, int c) const { return value_[idx(x, y) * ch_ + c]; }

    double image_gradient(int x, int y, int c, bool horizontal) const {
        const int dx = horizontal ? 1 : 0;
        const int dy = horizontal ? 0 : 1;
        const bool lo_ok = known_at(x - dx, y - dy);
        const bool hi_ok = known_at(x + dx, y + dy);
        const double lo = lo_ok ? pixel(x - dx, y - dy, c) : 0.0;
        const double hi = hi_ok ? pixel(x + dx, y + dy, c) : 0.0;
        return central(lo_ok, hi_ok, lo, pixel(x, y, c), hi);
    }

    double time_gradient(int x, int y, bool horizontal) const {
        const int dx = horizontal ? 1 : 0;
        const int dy = horizontal ? 0 : 1;
        auto reached = [&](int xx, int yy) {
            return inside_image(xx, yy) && time_[idx(xx, yy)] < kInf;
        };
        const bool lo_ok = reached(x - dx, y - dy);
        const bool hi_ok = reached(x + dx, y + dy);
        const double lo = lo_ok ? time_[idx(x - dx, y - dy)] : 0.0;
        const double hi = hi_ok ? time_[idx(x + dx, y + dy)] : 0.0;
        return central(lo_ok, hi_ok, lo, time_[idx(x, y)], hi);
    }

    FillRecord fill(int px, int py) {
        const std::size_t pi = idx(px, py);
        double nx = time_gradient(px, py, true);
        double ny = time_gradient(px, py, false);
        const double norm = std::hypot(nx, ny);
        if (norm > 0.0) {
            nx /= norm;
            ny /= norm;
        }

        FillRecord rec;
        rec.index = pi;
        rec.arrival = time_[pi];
        rec.known_min = kInf;
        rec.known_max = -kInf;

        const int r = opts_.radius;
        std::vector<double> acc(static_cast<std::size_t>(ch_), 0.0);
        double weight_sum = 0.0;
        for (int qy = std::max(py - r, 0); qy <= std::min(py + r, h_ - 1); ++qy) {
            for (int qx = std::max(px - r, 0); qx <= std::min(px + r, w_ - 1); ++qx) {
                const int rx = px - qx;
                const int ry = py - qy;
                const int d2 = rx * rx + ry * ry;
                if (d2 == 0 || d2 > r * r || !known_at(qx, qy)) continue;
                const double len = std::sqrt(static_cast<double>(d2));
                double dir = std::abs(rx * nx + ry * ny) / len;
                if (dir < 1e-6) dir = 1e-6;
                const double dst = 1.0 / d2;
                const double lev = 1.0 / (1.0 + std::abs(time_[idx(qx, qy)] - time_[pi]));
                const double wgt = dir * dst * lev;
                for (int c = 0; c < ch_; ++c) {
                    double v = pixel(qx, qy, c);
                    if (opts_.extrapolate_gradient) {
                        v += image_gradient(qx, qy, c, true) * rx + image_gradient(qx, qy, c, false) * ry;
                    }
                    acc[static_cast<std::size_t>(c)] += wgt * v;
                }
                rec.known_min = std::min(rec.known_min, pixel(qx, qy, 0));
                rec.known_max = std::max(rec.known_max, pixel(qx, qy, 0));
                weight_sum += wgt;
            }
        }
        for (int c = 0; c < ch_; ++c) {
            value_[pi * ch_ + c] = std::clamp(acc[static_cast<std::size_t>(c)] / weight_sum, 0.0, 255.0);
        }
        return rec;
    }

    int w_, h_, ch_;
    TeleaOptions opts_;
    std::vector<State> state_;
    std::vector<double> time_;
    std::vector<double> value_;
    std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
};

}  // namespace

RasterImage telea_inpaint(const RasterImage& img, const BinaryMask& mask, const TeleaOptions& opts,
                          std::vector<FillRecord>* trace) {
    if (img.width() != mask.width() || img.height() != mask.height()) {
        throw std::invalid_argument("telea_inpaint: mask and image sizes differ");
    }
    if (opts.radius < 1) throw std::invalid_argument("telea_inpaint: radius must be >= 1");
    const std::size_t masked = mask.count();
    if (masked == 0) return img;
    if (masked == mask.size()) {
        throw std::invalid_argument("telea_inpaint: every pixel is masked, nothing to propagate from");
    }

    TeleaSolver solver(img, mask, opts);
    solver.run(trace);
    RasterImage out = solver.result();
    // Known pixels pass through the double buffer unchanged; copy them anyway
    // so identity outside the mask does not depend on rounding.
    const auto src = img.data();
    auto dst = out.data();
    const int ch = img.channels();
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask.data()[i]) std::copy_n(&src[i * ch], ch, &dst[i * ch]);
    }
    return out;
}

RasterImage restore_and_inpaint(const RasterImage& img, const BinaryMask& hard, const SoftMask& blend,
                                const InpaintConfig& cfg) {
    cfg.validate();
    const RasterImage restored = cfg.blend ? initial_restore(img, blend, cfg.blur_passes) : img;
    return telea_inpaint(restored, hard, TeleaOptions{cfg.telea_radius, true});
}

RasterImage remove_highlights(const RasterImage& img, const highlight::HighlightConfig& hcfg,
                              const InpaintConfig& icfg) {
    const auto det = highlight::detect_highlights(img, hcfg);
    if (!det.hard.any()) return img;
    return restore_and_inpaint(img, det.hard, det.feathered, icfg);
}

}  // namespace endovqa::inpaint
