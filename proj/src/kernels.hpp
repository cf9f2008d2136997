#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>

#include "grid.hpp"

namespace hyst {

// Deterministic averaging kernel a_{t,s} (weight of the value at s in the
// average taken at t, s <= t). d1/d2 are partials in the first/second slot.
// tail_integral(t, s) = int_t^s a(s, r) dr, used by Malliavin formulas.
class DetKernel {
public:
    virtual ~DetKernel() = default;
    virtual std::string name() const = 0;
    virtual double a(double t, double s) const = 0;
    virtual double d1(double t, double s) const = 0;
    virtual double d2(double t, double s) const = 0;
    virtual double tail_integral(double t, double s) const = 0;
};

// a_{t,s} = scale * exp(-rate * (t - s))
class ExpDetKernel final : public DetKernel {
public:
    ExpDetKernel(double rate, double scale = 1.0) : rate_(rate), scale_(scale) {}
    std::string name() const override { return "exp"; }
    double a(double t, double s) const override { return scale_ * std::exp(-rate_ * (t - s)); }
    double d1(double t, double s) const override { return -rate_ * a(t, s); }
    double d2(double t, double s) const override { return rate_ * a(t, s); }
    double tail_integral(double t, double s) const override {
        // int_t^s scale * e^{-rate (s-r)} dr
        if (rate_ == 0.0) return scale_ * (s - t);
        return scale_ * (1.0 - std::exp(-rate_ * (s - t))) / rate_;
    }
    double rate() const { return rate_; }

private:
    double rate_, scale_;
};

class ConstDetKernel final : public DetKernel {
public:
    explicit ConstDetKernel(double value) : value_(value) {}
    std::string name() const override { return "const"; }
    double a(double, double) const override { return value_; }
    double d1(double, double) const override { return 0.0; }
    double d2(double, double) const override { return 0.0; }
    double tail_integral(double t, double s) const override { return value_ * (s - t); }

private:
    double value_;
};

// Damage kernel k_{t,s}(w^s): marginal damage at time s per unit of policy at
// time t <= s, possibly reading the noise path up to s.
//   dt        : partial in the first (policy-time) slot
//   malliavin : D_t applied to w -> k_{t,s}(w^s)
class WKernel {
public:
    virtual ~WKernel() = default;
    virtual std::string name() const = 0;
    virtual double eval(int t_idx, int s_idx, PathRef w) const = 0;
    virtual double dt(int t_idx, int s_idx, PathRef w) const = 0;
    virtual double malliavin(int t_idx, int s_idx, PathRef w) const = 0;
    virtual bool deterministic() const { return false; }
};

class ConstWKernel final : public WKernel {
public:
    explicit ConstWKernel(double value) : value_(value) {}
    std::string name() const override { return "const"; }
    double eval(int, int, PathRef) const override { return value_; }
    double dt(int, int, PathRef) const override { return 0.0; }
    double malliavin(int, int, PathRef) const override { return 0.0; }
    bool deterministic() const override { return true; }

private:
    double value_;
};

// k_{t,s} = scale * exp(-rate * (s - t)), the decaying-damage kernel.
class ExpWKernel final : public WKernel {
public:
    ExpWKernel(double rate, double scale = 1.0) : rate_(rate), scale_(scale) {}
    std::string name() const override { return "exp"; }
    double eval(int t, int s, PathRef w) const override {
        return scale_ * std::exp(-rate_ * (w.grid->node(s) - w.grid->node(t)));
    }
    double dt(int t, int s, PathRef w) const override { return rate_ * eval(t, s, w); }
    double malliavin(int, int, PathRef) const override { return 0.0; }
    bool deterministic() const override { return true; }
    double rate() const { return rate_; }

private:
    double rate_, scale_;
};

// k_{t,s}(w^s) = w_s: every past unit of policy is marked to the current shock.
class NoiseLevelWKernel final : public WKernel {
public:
    std::string name() const override { return "ws"; }
    double eval(int, int s, PathRef w) const override { return w[s]; }
    double dt(int, int, PathRef) const override { return 0.0; }
    double malliavin(int, int, PathRef) const override { return 1.0; }
};

std::unique_ptr<DetKernel> make_det_kernel(const std::string& name, double rate, double scale);
std::unique_ptr<WKernel> make_w_kernel(const std::string& name, double rate, double scale);

} // namespace hyst
