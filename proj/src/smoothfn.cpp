#include "smoothfn.hpp"

namespace hyst {

SmoothFn smooth_fn(const std::string& name) {
    auto c = [](double v) { return [v](double) { return v; }; };
    if (name == "zero")
        return {name, c(0.0), c(0.0), c(0.0), c(0.0)};
    if (name == "identity")
        return {name, [](double x) { return x; }, c(1.0), c(0.0), c(0.0)};
    if (name == "half_square")
        return {name, [](double x) { return 0.5 * x * x; }, [](double x) { return x; }, c(1.0),
                c(0.0)};
    if (name == "cubic_sixth")
        return {name, [](double x) { return x * x * x / 6.0; },
                [](double x) { return 0.5 * x * x; }, [](double x) { return x; }, c(1.0)};
    if (name == "sin")
        return {name, [](double x) { return std::sin(x); }, [](double x) { return std::cos(x); },
                [](double x) { return -std::sin(x); }, [](double x) { return -std::cos(x); }};
    if (name == "exp")
        return {name, [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); },
                [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); }};
    // positive part; weight function for the tipping example (vanishes for x <= 0)
    if (name == "relu")
        return {name, [](double x) { return x > 0.0 ? x : 0.0; },
                [](double x) { return x > 0.0 ? 1.0 : 0.0; }, c(0.0), c(0.0)};
    throw ConfigError("unknown scalar function: " + name);
}

BivariateFn bivariate_fn(const std::string& name) {
    auto c = [](double v) { return [v](double, double) { return v; }; };
    if (name == "y") // pure integral effect
        return {name, [](double, double y) { return y; }, c(0.0), c(1.0),
                c(0.0), c(0.0), c(0.0), c(0.0)};
    if (name == "xy") // present value times past average
        return {name, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
                [](double x, double) { return x; }, c(0.0), c(1.0), c(0.0), c(0.0)};
    if (name == "x_plus_y2") // x + y^2/2, quadratic past effect
        return {name, [](double x, double y) { return x + 0.5 * y * y; }, c(1.0),
                [](double, double y) { return y; }, c(0.0), c(0.0), c(1.0), c(0.0)};
    throw ConfigError("unknown bivariate function: " + name);
}

} // namespace hyst
