#include "endovqa/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>

#include "endovqa/dataprep.hpp"
#include "endovqa/error.hpp"

namespace endovqa {

namespace {

int parse_int(std::string_view key, std::string_view v) {
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw std::invalid_argument("invalid integer for '" + std::string(key) + "': '" + std::string(v) + "'");
    }
    return out;
}

double parse_double(std::string_view key, std::string_view v) {
    const std::string s(v);
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (s.empty() || used != s.size()) {
        throw std::invalid_argument("invalid number for '" + std::string(key) + "': '" + s + "'");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::invalid_argument("invalid boolean for '" + std::string(key) + "': '" + std::string(v) + "'");
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"threshold", [](RunConfig& c, auto k, auto v) { c.enhance.highlight.threshold = parse_int(k, v); }},
        {"morph_kernel", [](RunConfig& c, auto k, auto v) { c.enhance.highlight.morph_kernel = parse_int(k, v); }},
        {"zscore_cutoff", [](RunConfig& c, auto k, auto v) { c.enhance.highlight.zscore_cutoff = parse_double(k, v); }},
        {"feather_kernel", [](RunConfig& c, auto k, auto v) { c.enhance.highlight.feather_kernel = parse_int(k, v); }},
        {"blur_passes",
         [](RunConfig& c, auto k, auto v) {
             c.enhance.highlight.blur_passes = parse_int(k, v);
             c.enhance.inpaint.blur_passes = c.enhance.highlight.blur_passes;
         }},
        {"telea_radius", [](RunConfig& c, auto k, auto v) { c.enhance.inpaint.telea_radius = parse_int(k, v); }},
        {"blend", [](RunConfig& c, auto k, auto v) { c.enhance.inpaint.blend = parse_bool(k, v); }},
        {"black_threshold", [](RunConfig& c, auto k, auto v) { c.enhance.blackmask.black_threshold = parse_int(k, v); }},
        {"erode_kernel", [](RunConfig& c, auto k, auto v) { c.enhance.blackmask.erode_kernel = parse_int(k, v); }},
        {"sigma", [](RunConfig& c, auto k, auto v) { c.enhance.blackmask.sigma = parse_double(k, v); }},
        {"margin", [](RunConfig& c, auto k, auto v) { c.enhance.blackmask.margin = parse_int(k, v); }},
        {"black_box", [](RunConfig& c, auto k, auto v) { c.enhance.blackmask.has_black_box = parse_bool(k, v); }},
        {"box_width_frac", [](RunConfig& c, auto k, auto v) { c.enhance.blackmask.box_width_frac = parse_double(k, v); }},
        {"box_height_frac", [](RunConfig& c, auto k, auto v) { c.enhance.blackmask.box_height_frac = parse_double(k, v); }},
        {"epochs", [](RunConfig& c, auto k, auto v) { c.train.epochs = parse_int(k, v); }},
        {"batch_size", [](RunConfig& c, auto k, auto v) { c.train.batch_size = parse_int(k, v); }},
        {"lr", [](RunConfig& c, auto k, auto v) { c.train.lr0 = parse_double(k, v); }},
        {"lr_decay", [](RunConfig& c, auto k, auto v) { c.train.lr_decay_per_epoch = parse_double(k, v); }},
        {"weight_decay", [](RunConfig& c, auto k, auto v) { c.train.weight_decay = parse_double(k, v); }},
        {"beta1", [](RunConfig& c, auto k, auto v) { c.train.beta1 = parse_double(k, v); }},
        {"beta2", [](RunConfig& c, auto k, auto v) { c.train.beta2 = parse_double(k, v); }},
        {"eps", [](RunConfig& c, auto k, auto v) { c.train.eps = parse_double(k, v); }},
        {"pred_threshold", [](RunConfig& c, auto k, auto v) { c.train.threshold = parse_double(k, v); }},
        {"hidden", [](RunConfig& c, auto k, auto v) { c.train.hidden = parse_int(k, v); }},
        {"seed",
         [](RunConfig& c, auto k, auto v) { c.train.seed = static_cast<std::uint64_t>(parse_int(k, v)); }},
    };
    return table;
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
    it->second(*this, key, dataprep::trim(value));
}

void RunConfig::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config '" + path.string() + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = dataprep::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        }
        try {
            set(dataprep::trim(body.substr(0, eq)), body.substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void RunConfig::validate() const {
    enhance.highlight.validate();
    enhance.inpaint.validate();
    enhance.blackmask.validate();
    train.validate();
}

std::vector<std::string> RunConfig::keys() {
    std::vector<std::string> out;
    for (const auto& [k, _] : setters()) out.push_back(k);
    return out;
}

}  // namespace endovqa
