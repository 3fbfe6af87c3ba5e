#include "fhl/grid_function.hpp"

#include "fhl/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fhl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_value(double v) {
    if (v == kInf) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_value(const std::string& tok) {
    if (tok == "inf" || tok == "+inf") return kInf;
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("bad numeric token '" + tok + "'");
    return v;
}

} // namespace

GridFunction::GridFunction(std::vector<double> points, std::vector<double> values)
    : points_(std::move(points)), values_(std::move(values)) {
    if (points_.empty()) throw std::invalid_argument("grid function needs at least one point");
    if (points_.size() != values_.size()) {
        throw std::invalid_argument("grid/value length mismatch");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!std::isfinite(points_[i])) throw std::invalid_argument("grid points must be finite");
        if (i > 0 && !(points_[i] > points_[i - 1])) {
            throw std::invalid_argument("grid points must be strictly increasing");
        }
        const double v = values_[i];
        if (std::isnan(v) || v == -kInf) {
            throw std::invalid_argument("values must be finite or +inf");
        }
    }
}

double GridFunction::eval(double x) const {
    if (x < points_.front() || x > points_.back()) return kInf;
    const auto it = std::lower_bound(points_.begin(), points_.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - points_.begin());
    if (hi < points_.size() && points_[hi] == x) return values_[hi];
    const std::size_t lo = hi - 1;
    if (values_[lo] == kInf || values_[hi] == kInf) return kInf;
    const double w = (x - points_[lo]) / (points_[hi] - points_[lo]);
    return values_[lo] + w * (values_[hi] - values_[lo]);
}

bool GridFunction::is_uniform(double rel_tol) const {
    if (points_.size() < 2) return true;
    const double h = (points_.back() - points_.front()) / double(points_.size() - 1);
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (std::fabs(points_[i] - points_[i - 1] - h) > rel_tol * std::fabs(h)) return false;
    }
    return true;
}

double GridFunction::uniform_spacing() const {
    if (points_.size() < 2 || !is_uniform()) {
        throw std::invalid_argument("grid is not uniform");
    }
    return (points_.back() - points_.front()) / double(points_.size() - 1);
}

std::string GridFunction::to_csv() const {
    std::string out = "point,value\n";
    for (std::size_t i = 0; i < points_.size(); ++i) {
        out += format_value(points_[i]);
        out += ',';
        out += format_value(values_[i]);
        out += '\n';
    }
    return out;
}

GridFunction GridFunction::from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<double> pts, vals;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.find("point") != std::string::npos) continue;  // header
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("CSV row missing comma: " + line);
        pts.push_back(parse_value(line.substr(0, comma)));
        vals.push_back(parse_value(line.substr(comma + 1)));
    }
    return GridFunction(std::move(pts), std::move(vals));
}

std::vector<double> make_uniform_grid(double lo, double hi, std::size_t count) {
    if (count < 2) throw std::invalid_argument("grid needs at least two points");
    if (!(hi > lo)) throw std::invalid_argument("grid needs hi > lo");
    std::vector<double> out(count);
    const double h = (hi - lo) / double(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = lo + double(i) * h;
    out.back() = hi;
    return out;
}

} // namespace fhl
