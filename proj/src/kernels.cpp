#include "kernels.hpp"

namespace hyst {

std::unique_ptr<DetKernel> make_det_kernel(const std::string& name, double rate, double scale) {
    if (name == "exp") return std::make_unique<ExpDetKernel>(rate, scale);
    if (name == "const" || name == "one") return std::make_unique<ConstDetKernel>(scale);
    throw ConfigError("unknown averaging kernel: " + name);
}

std::unique_ptr<WKernel> make_w_kernel(const std::string& name, double rate, double scale) {
    if (name == "exp") return std::make_unique<ExpWKernel>(rate, scale);
    if (name == "const" || name == "one") return std::make_unique<ConstWKernel>(scale);
    if (name == "ws") return std::make_unique<NoiseLevelWKernel>();
    throw ConfigError("unknown damage kernel: " + name);
}

} // namespace hyst
