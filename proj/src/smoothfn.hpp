#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "common.hpp"

namespace hyst {

// Scalar function with three derivatives, enough for every derivative the
// catalog needs.
struct SmoothFn {
    std::string name;
    std::function<double(double)> f, d1, d2, d3;
};

// Bivariate function with partials through order three (only the ones the
// formulas use: f1, f2, f11, f12, f22, f111).
struct BivariateFn {
    std::string name;
    std::function<double(double, double)> f, f1, f2, f11, f12, f22, f111;
};

SmoothFn smooth_fn(const std::string& name);
BivariateFn bivariate_fn(const std::string& name);

inline SmoothFn make_smooth_fn(std::string name, std::function<double(double)> f,
                               std::function<double(double)> d1,
                               std::function<double(double)> d2,
                               std::function<double(double)> d3) {
    return SmoothFn{std::move(name), std::move(f), std::move(d1), std::move(d2), std::move(d3)};
}

} // namespace hyst
