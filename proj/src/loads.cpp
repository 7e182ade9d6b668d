#include "dcstab/loads.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace dcstab {

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw ModelError(std::string("buck parameter ") + what + " must be positive");
}

}  // namespace

BuckLoad::BuckLoad(const BuckParams& p) : p_(p) {
    require_positive(p.v_in, "vin");
    require_positive(p.r, "r");
    require_positive(p.l, "l");
    require_positive(p.c, "c");
    require_positive(p.omega_l, "wl");
    require_positive(p.omega_z, "wz");
    require_positive(p.omega_p, "wp");
    require_positive(p.h, "h");
    require_positive(p.v_m, "vm");
    require_positive(p.scale, "scale");
    if (!(p.duty > 0.0 && p.duty < 1.0)) throw ModelError("buck duty cycle must lie in (0, 1)");
    if (!(p.gc_inf >= 0.0)) throw ModelError("buck gcinf must be non-negative");

    // G_vd = G_0 w0^2 / (s^2 + 2 zeta w0 s + w0^2) = G_0 / (LC s^2 + (L/R) s + 1), since
    // 1/w0^2 = LC and 2 zeta / w0 = L/R. The same polynomial is the numerator of Z_D, which
    // is what lets the composition below stay exact.
    const Polynomial lc{1.0, p.l / p.r, p.l * p.c};
    const double k = plant_gain() * p.h * p.gc_inf / p.v_m;
    const Polynomial lead_zero{p.omega_l, 1.0};               // s (1 + wL/s)
    const Polynomial trail_zero{1.0, 1.0 / p.omega_z};        // 1 + s/wz
    const Polynomial pole{1.0, 1.0 / p.omega_p};              // 1 + s/wp
    const Polynomial s{0.0, 1.0};
    loop_num_ = k * (lead_zero * trail_zero);
    loop_den_ = s * lc * pole;

    // Y = (1/Z_N) T/(1+T) + (1/Z_D) 1/(1+T)
    //   = (D^2/R) [ (1 + sRC) s (1 + s/wp) - n_T ] / (d_T + n_T)
    const double dd_r = p.scale * p.duty * p.duty / p.r;
    const Polynomial rc{1.0, p.r * p.c};
    RationalTF raw{dd_r * (rc * s * pole - loop_num_), loop_den_ + loop_num_};
    y_ = raw.cancel_common_roots();
}

double BuckLoad::natural_frequency() const { return 1.0 / std::sqrt(p_.l * p_.c); }

double BuckLoad::damping() const { return std::sqrt(p_.l / p_.c) / (2.0 * p_.r); }

LoopGain BuckLoad::loop_gain(double omega) const {
    if (omega == 0.0) {
        if (loop_num_.is_zero()) return {Complex(0.0, 0.0), false};
        return {Complex(std::numeric_limits<double>::infinity(), 0.0), true};
    }
    const Complex s(0.0, omega);
    return {loop_num_(s) / loop_den_(s), false};
}

Complex BuckLoad::admittance(double omega) const {
    if (omega > 0.0) {
        const Complex s(0.0, omega);
        const Complex one_plus_t = (loop_den_(s) + loop_num_(s)) / loop_den_(s);
        if (std::abs(one_plus_t) < 1e-12) throw ModelError("standalone converter marginal");
    }
    return y_.at_omega(omega);
}

double BuckLoad::z_nulled() const { return -p_.r / (p_.duty * p_.duty) / p_.scale; }

Complex BuckLoad::z_open(double omega) const {
    const Complex s(0.0, omega);
    const Complex num = 1.0 + s * p_.l / p_.r + s * s * p_.l * p_.c;
    const Complex den = 1.0 + s * p_.r * p_.c;
    return p_.r / (p_.duty * p_.duty) * num / den / p_.scale;
}

double BuckLoad::power() const {
    const double v_out = p_.duty * p_.v_in;
    return p_.scale * v_out * v_out / p_.r;
}

TableLoad::TableLoad(std::vector<TableSample> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) throw ModelError("table load has no samples");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (!(samples_[i].omega > 0.0)) throw ModelError("table load frequencies must be positive");
        if (i > 0 && !(samples_[i].omega > samples_[i - 1].omega))
            throw ModelError("table load frequencies must be strictly increasing");
    }
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_field(std::string_view field, std::size_t line_no) {
    field = trim(field);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw ModelError("table line " + std::to_string(line_no) + ": bad number '" +
                         std::string(field) + "'");
    return v;
}

}  // namespace

TableLoad TableLoad::parse_csv(std::string_view text) {
    std::vector<TableSample> samples;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != "omega_rad_s,re_y,im_y")
                throw ModelError("table header must be 'omega_rad_s,re_y,im_y'");
            header_seen = true;
            continue;
        }
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos)
            throw ModelError("table line " + std::to_string(line_no) + ": expected 3 columns");
        samples.push_back({parse_field(line.substr(0, c1), line_no),
                           Complex(parse_field(line.substr(c1 + 1, c2 - c1 - 1), line_no),
                                   parse_field(line.substr(c2 + 1), line_no))});
    }
    if (!header_seen) throw ModelError("table file is empty");
    return TableLoad(std::move(samples));
}

TableLoad TableLoad::read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open table file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

bool TableLoad::in_range(double omega) const {
    return omega >= samples_.front().omega && omega <= samples_.back().omega;
}

Complex TableLoad::admittance(double omega) const {
    if (omega <= samples_.front().omega) return samples_.front().y;
    if (omega >= samples_.back().omega) return samples_.back().y;
    auto hi = std::upper_bound(samples_.begin(), samples_.end(), omega,
                               [](double w, const TableSample& s) { return w < s.omega; });
    auto lo = hi - 1;
    const double t = (std::log(omega) - std::log(lo->omega)) / (std::log(hi->omega) - std::log(lo->omega));
    return lo->y + t * (hi->y - lo->y);
}

std::string_view load_kind_name(const LoadModel& m) {
    struct Visitor {
        std::string_view operator()(const CplLoad&) const { return "cpl"; }
        std::string_view operator()(const BuckLoad&) const { return "buck"; }
        std::string_view operator()(const TableLoad&) const { return "table"; }
    };
    return std::visit(Visitor{}, m);
}

}  // namespace dcstab
