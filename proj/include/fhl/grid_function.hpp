#pragma once

#include <string>
#include <vector>

namespace fhl {

/// A scalar function tabulated on a strictly increasing 1-D grid. Values may
/// be +infinity (excluded domain); NaN and -infinity are rejected.
class GridFunction {
public:
    GridFunction(std::vector<double> points, std::vector<double> values);

    const std::vector<double>& points() const { return points_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return points_.size(); }

    /// Piecewise-linear evaluation; +infinity outside the grid or on any
    /// segment touching an infinite value.
    double eval(double x) const;

    bool is_uniform(double rel_tol = 1e-9) const;
    double uniform_spacing() const;  // throws when not uniform

    /// Two-column CSV ("point,value"); infinities serialise as "inf".
    std::string to_csv() const;
    static GridFunction from_csv(const std::string& text);

private:
    std::vector<double> points_;
    std::vector<double> values_;
};

std::vector<double> make_uniform_grid(double lo, double hi, std::size_t count);

} // namespace fhl
